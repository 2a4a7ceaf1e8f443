"""Experiment configuration files.

A config is a flat text file of ``key = value`` lines with dotted keys::

    # strong error rate of the linear jump OU model
    experiment = strong_rate
    model.name = linear_jump_ou
    model.a = 1
    run.epsilons = 0.0625, 0.03125, 0.015625

Blank lines and lines starting with ``#`` are ignored. Values stay strings
until ExperimentConfigSerializer validates them.
"""
import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Tuple

from dynamics.assumptions import ProbeBox
from dynamics.builtins import builtin_model
from noise.paths import TimeGrid
from skjump.exceptions import ConfigError

from .serializers import ExperimentConfigSerializer

logger = logging.getLogger(__name__)


def parse_config_text(text):
    """Parse key = value lines into a nested dict of strings.

    Raises:
        ConfigError: a line without '=', an empty key or a repeated key.
            ``errors`` is keyed by 'line N'.
    """

    tree = {}
    errors = {}
    seen = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        where = 'line {}'.format(number)
        key, sep, value = line.partition('=')
        key = key.strip()
        parts = key.split('.')
        if not sep or not key or not all(parts):
            errors[where] = ['Expected "dotted.key = value", got {!r}.'.format(
                raw)]
            continue
        if key in seen:
            errors[where] = ['Key {!r} is set twice.'.format(key)]
            continue
        seen.add(key)

        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                break
        if not isinstance(node, dict) or isinstance(node.get(parts[-1]),
                                                    dict):
            errors[where] = ['Key {!r} clashes with a section.'.format(key)]
            continue
        node[parts[-1]] = value.strip()

    if errors:
        raise ConfigError('Malformed config file', errors)
    return tree


def flatten_errors(errors, prefix=''):
    """DRF's nested error dict as {dotted key: [messages]}."""
    flat = {}
    if isinstance(errors, Mapping):
        for key, value in errors.items():
            name = key if key != 'non_field_errors' else ''
            dotted = '.'.join(part for part in (prefix, name) if part)
            flat.update(flatten_errors(value, dotted))
    elif isinstance(errors, (list, tuple)) and errors and all(
            isinstance(item, Mapping) for item in errors):
        for item in errors:
            flat.update(flatten_errors(item, prefix))
    elif isinstance(errors, (list, tuple)):
        for index, item in enumerate(errors):
            if isinstance(item, (Mapping, list, tuple)):
                flat.update(flatten_errors(item, '{}.{}'.format(prefix,
                                                                index)))
            else:
                flat.setdefault(prefix or 'config', []).append(str(item))
    else:
        flat.setdefault(prefix or 'config', []).append(str(errors))
    return flat


def canonical_json(value):
    return json.dumps(value, sort_keys=True, separators=(',', ':'),
                      ensure_ascii=False)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A validated experiment configuration.

    Fields mirror the config keys; ``threads`` and ``source`` do not take
    part in the config hash because they cannot change the results.
    """

    experiment: str
    model_name: str
    model_params: Mapping[str, float]
    T: float
    n_steps: int
    t_eval: Tuple[float, ...]
    epsilons: Tuple[float, ...]
    n_paths: int
    p_values: Tuple[float, ...]
    sk_scheme: str
    seed: int
    ks_coupling: str
    kinds: Tuple[str, ...]
    x_min: float = -10.0
    x_max: float = 10.0
    n_probes: int = 1000
    threads: object = None
    source: Optional[str] = field(default=None)

    @classmethod
    def from_validated(cls, data, source=None):
        run = data['run']
        probes = data['assumptions']
        return cls(
            experiment=data['experiment'],
            model_name=data['model']['name'],
            model_params=dict(data['model']['params']),
            T=run['T'],
            n_steps=run['n_steps'],
            t_eval=tuple(run['t_eval']),
            epsilons=tuple(run['epsilons']),
            n_paths=run['n_paths'],
            p_values=tuple(run['p_values']),
            sk_scheme=run['sk_scheme'],
            seed=run['seed'],
            ks_coupling=run['ks_coupling'],
            kinds=tuple(run['kinds']),
            x_min=probes['x_min'],
            x_max=probes['x_max'],
            n_probes=probes['n_probes'],
            threads=run.get('threads'),
            source=source,
        )

    @cached_property
    def grid(self):
        return TimeGrid(self.T, self.n_steps)

    @cached_property
    def t_indices(self):
        """Grid index of each t_eval; validation keeps them on nodes."""
        return tuple(self.grid.index_of(t) for t in self.t_eval)

    def build_model(self):
        return builtin_model(self.model_name, self.model_params)

    def probe_box(self):
        return ProbeBox(x_min=self.x_min, x_max=self.x_max, t_min=0.0,
                        t_max=self.T)

    def semantic(self):
        """Every field that can change results, as JSON-ready values."""
        return {
            'experiment': self.experiment,
            'model': {'name': self.model_name,
                      'params': dict(self.model_params)},
            'run': {
                'T': self.T,
                'n_steps': self.n_steps,
                't_eval': list(self.t_eval),
                'epsilons': list(self.epsilons),
                'n_paths': self.n_paths,
                'p_values': list(self.p_values),
                'sk_scheme': self.sk_scheme,
                'seed': self.seed,
                'ks_coupling': self.ks_coupling,
                'kinds': list(self.kinds),
            },
            'assumptions': {'x_min': self.x_min, 'x_max': self.x_max,
                            'n_probes': self.n_probes},
        }

    @property
    def config_hash(self):
        return config_hash(self)

    def with_overrides(self, seed=None, threads=None):
        """Copy with the CLI's --seed / --threads applied."""
        changes = {}
        if seed is not None:
            if not 0 <= seed < 2 ** 64:
                raise ConfigError('Invalid --seed',
                                  {'run.seed': ['Must lie in [0, 2**64).']})
            changes['seed'] = int(seed)
        if threads is not None:
            changes['threads'] = threads
        return dataclasses.replace(self, **changes) if changes else self


def config_hash(config):
    """sha256 of the canonical JSON of the semantic config fields."""
    payload = canonical_json(config.semantic()).encode('utf-8')
    return hashlib.sha256(payload).hexdigest()


def validate_config_data(data, source=None):
    """Validate a nested config mapping into an ExperimentConfig.

    Raises:
        ConfigError: with per dotted key messages.
    """

    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        errors = flatten_errors(serializer.errors)
        raise ConfigError('Invalid config {}'.format(source or ''), errors)
    return ExperimentConfig.from_validated(serializer.validated_data, source)


def load_config(path):
    """Read, parse and validate a config file."""
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError('Cannot read config {}: {}'.format(path, e))
    config = validate_config_data(parse_config_text(text), source=str(path))
    logger.info('Loaded %s config %s (%s)', config.experiment, path,
                config.config_hash[:12])
    return config
