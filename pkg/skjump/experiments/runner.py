"""Experiment driver.

``run(config, out_dir)`` simulates the coupled paths of a run in chunks of
CHUNK_SIZE paths, serially or on a process pool, stacks the chunk results
in path-index order and writes the experiment's tables and manifest. The
chunk layout does not depend on the worker count, so CSV bodies are
identical for every ``threads`` value.
"""
import logging
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

import django
import numpy as np
import rest_framework
import scipy
from django.utils import timezone
from rest_framework.exceptions import ValidationError

import skjump
from dynamics.assumptions import validate_assumptions
from dynamics.oracles import brownian_norm_reference, strong_gap_reference
from integrate.malliavin import FieldKind
from skjump.conf import sim_settings
from skjump.exceptions import ConfigError, NoiseFloorError, NumericalAbort
from stats.estimators import (EstimateWithError, dkw_band, inverse_norm_moment,
                              ks_distance, ks_noise_floor, lp_error,
                              moment_sup)
from stats.exceptions import EstimatorError
from stats.rates import fit_rate

from . import writers
from .planning import plan_noise_floor, plan_resolution, plan_substeps
from .serializers import INDEPENDENT, ThreadsField
from .workers import (ORACLE_LEVELS, coupled_chunk, init_worker,
                      inverse_norm_chunk, malliavin_chunk, oracle_chunk)

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
NO_ESTIMATE = EstimateWithError(value=math.nan, std_error=math.nan, n=0)


@dataclass(frozen=True)
class ResultBundle:
    """What a run left in ``out_dir``.

    Fields:
        out_dir: the output directory
        files: result file names, manifest last
        manifest: the manifest as written
        aborts: total count of paths excluded for going non-finite

    """

    out_dir: str
    files: Tuple[str, ...]
    manifest: Dict = field(default_factory=dict)
    aborts: int = 0


def resolve_threads(flag=None, configured=None):
    """Worker count: --threads, then run.threads, then SKJUMP_THREADS, else 1.

    'auto' means one worker per CPU.
    """

    sources = (('--threads', flag), ('run.threads', configured),
               ('SKJUMP_THREADS', os.environ.get('SKJUMP_THREADS')))
    for name, value in sources:
        if value is None or value == '':
            continue
        try:
            value = ThreadsField().to_internal_value(value)
        except ValidationError as e:
            raise ConfigError('Invalid worker count',
                              {name: [str(m) for m in e.detail]})
        if value == 'auto':
            return os.cpu_count() or 1
        return value
    return 1


def versions():
    return {
        'skjump': skjump.__version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'django': django.get_version(),
        'djangorestframework': rest_framework.VERSION,
    }


def gap_moment(pairs, p):
    """lp_error, or the bare |gap|^p when a single pair is left."""
    if len(pairs) >= 2:
        return lp_error(pairs, p)
    if len(pairs) == 1:
        logger.warning('Only one usable path; its strong error has no '
                       'standard error')
        return EstimateWithError.from_samples(
            np.abs(pairs[:, 0] - pairs[:, 1]) ** p)
    return NO_ESTIMATE


def _fit(points, what):
    try:
        fit = fit_rate(points)
    except EstimatorError as e:
        logger.warning('No %s rate fitted: %s', what, e)
        return None
    logger.info('%s rate: slope %.4f +- %.4f, r^2 %.4f', what, fit.slope,
                fit.slope_se, fit.r_squared)
    return fit


def _rate_details(fit):
    if fit is None:
        return None
    return {'slope': fit.slope, 'slope_se': fit.slope_se,
            'intercept': fit.intercept, 'r_squared': fit.r_squared,
            'n_points': fit.n_points}


class ExperimentRunner:
    """Runs one validated ExperimentConfig into ``out_dir``.

    Methods:
        run: dispatch on config.experiment, write tables and manifest,
            raise NumericalAbort when paths went non-finite.

    """

    def __init__(self, config, out_dir, threads=1):
        self.config = config
        self.out_dir = str(out_dir)
        self.threads = threads
        self.model = config.build_model()
        self.files = []
        self.aborts = {}
        self.details = {}

    def run(self):
        config = self.config
        os.makedirs(self.out_dir, exist_ok=True)
        logger.info('Running %s on %s (config %s, seed %d, %d worker(s))',
                    config.experiment, config.model_name,
                    config.config_hash[:12], config.seed, self.threads)
        getattr(self, 'run_' + config.experiment)()

        total = sum(self.aborts.values())
        manifest = writers.jsonable(self.manifest(total))
        self.files.append(writers.write_manifest(
            os.path.join(self.out_dir, MANIFEST), manifest))
        bundle = ResultBundle(out_dir=self.out_dir, files=tuple(self.files),
                              manifest=manifest, aborts=total)
        if total:
            raise NumericalAbort(
                '{} path evaluation(s) went non-finite; see {}'.format(
                    total, os.path.join(self.out_dir, MANIFEST)),
                aborts=total, bundle=bundle)
        return bundle

    def manifest(self, total):
        config = self.config
        return {
            'experiment': config.experiment,
            'model': config.model_name,
            'config_hash': config.config_hash,
            'seed': config.seed,
            'config': config.semantic(),
            'source': config.source,
            'threads': self.threads,
            'versions': versions(),
            'aborts': self.aborts,
            'total_aborts': total,
            'files': list(self.files),
            'details': self.details,
            'created': timezone.now().isoformat(),
        }

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def map_chunks(self, fn, n_paths):
        """Run ``fn(config, start, stop)`` over CHUNK_SIZE path chunks and
        stack the per-path arrays in path-index order.
        """

        size = sim_settings.CHUNK_SIZE
        tasks = [(lo, min(lo + size, n_paths))
                 for lo in range(0, n_paths, size)]
        logger.info('%s: %d paths in %d chunk(s)', fn.__name__, n_paths,
                    len(tasks))
        if self.threads == 1 or len(tasks) == 1:
            results = []
            for number, (lo, hi) in enumerate(tasks, start=1):
                results.append(fn(self.config, lo, hi))
                logger.info('%s: chunk %d/%d done', fn.__name__, number,
                            len(tasks))
        else:
            workers = min(self.threads, len(tasks))
            with ProcessPoolExecutor(
                    max_workers=workers, initializer=init_worker,
                    initargs=(sim_settings.snapshot(),)) as pool:
                futures = [pool.submit(fn, self.config, lo, hi)
                           for lo, hi in tasks]
                for number, _ in enumerate(as_completed(futures), start=1):
                    logger.info('%s: %d/%d chunks done', fn.__name__, number,
                                len(tasks))
                results = [future.result() for future in futures]
        return {key: np.concatenate([r[key] for r in results])
                for key in results[0]}

    def plan_substeps(self):
        factors, finest = plan_substeps(self.config)
        if finest > 1:
            for eps, factor in factors.items():
                logger.info('Direct SK scheme at eps = %g: %d substeps per '
                            'step', eps, factor)
        self.details['substep_factors'] = factors
        return factors

    def run_strong_rate(self):
        config = self.config
        self.plan_substeps()
        data = self.map_chunks(coupled_chunk, config.n_paths)
        last = len(config.t_eval) - 1
        rows, moments, points = [], [], []
        for eps in config.epsilons:
            good = ~(data['limit_aborted'] | data['sk_aborted', eps])
            aborts = int(np.count_nonzero(~good))
            self.aborts[eps] = aborts
            for k, t in enumerate(config.t_eval):
                pairs = np.column_stack((data['sk', eps][good, k],
                                         data['limit'][good, k]))
                for p in config.p_values:
                    estimate = gap_moment(pairs, p)
                    rows.append((eps, t, p, estimate.value,
                                 estimate.std_error, estimate.n, aborts))
                    if k == last and p == config.p_values[0]:
                        points.append((eps, estimate.value))
            sups = data['sk_sup', eps][good][:, None]
            for p in config.p_values:
                moment = moment_sup(sups, p) if sups.size else NO_ESTIMATE
                moments.append((eps, p, moment.value, moment.std_error,
                                moment.n))

        self.strong_references()
        fit = _fit(points, 'strong error')
        self.details['rate'] = _rate_details(fit)
        self.files.append(writers.write_csv(
            self.path('strong_rate.csv'), writers.STRONG_RATE_COLUMNS, rows,
            fit, with_rate=True))
        self.files.append(writers.write_csv(
            self.path('moments.csv'), writers.MOMENT_COLUMNS, moments))

    def strong_references(self):
        """|X^eps_t - X_t|^p in closed form, when the model has one."""
        config = self.config
        references = []
        for eps in config.epsilons:
            for t in config.t_eval:
                gap = strong_gap_reference(config.model_name,
                                           config.model_params, eps, t)
                if gap is None:
                    return
                references.extend(
                    {'epsilon': eps, 't': t, 'p': p, 'value': abs(gap) ** p}
                    for p in config.p_values)
        if references:
            logger.info('%s: %d closed-form strong errors in the manifest',
                        config.model_name, len(references))
            self.details['reference'] = references

    def run_kolmogorov_rate(self):
        config = self.config
        plan = plan_noise_floor(config.epsilons, config.n_paths)
        self.details['noise_floor'] = asdict(plan)
        logger.info(plan.describe())
        if not plan.ok:
            raise NoiseFloorError(
                'KS signal is below {:g} x the noise floor; use n_paths >= '
                '{}'.format(plan.margin, plan.required_n), plan.required_n)

        self.plan_substeps()
        data = self.map_chunks(coupled_chunk, config.n_paths)
        independent = config.ks_coupling == INDEPENDENT
        reference = 'independent' if independent else 'limit'
        reference_ok = ~data[reference + '_aborted']
        if independent:
            self.aborts['limit'] = int(np.count_nonzero(~reference_ok))

        last = len(config.t_eval) - 1
        rows, points, bands = [], [], {}
        for eps in config.epsilons:
            sk_ok = ~data['sk_aborted', eps]
            if independent:
                a = data['sk', eps][sk_ok]
                b = data[reference][reference_ok]
                self.aborts[eps] = int(np.count_nonzero(~sk_ok))
            else:
                good = sk_ok & reference_ok
                a = data['sk', eps][good]
                b = data[reference][good]
                self.aborts[eps] = int(np.count_nonzero(~good))
            n = min(len(a), len(b))
            floor = ks_noise_floor(n) if n else math.nan
            if n:
                bands[eps] = dkw_band(n)
            for k, t in enumerate(config.t_eval):
                ks = ks_distance(a[:, k], b[:, k]) if n else math.nan
                if ks < plan.margin * floor:
                    logger.warning('KS at eps = %g, t = %g is %.4g, below '
                                   '%g x its noise floor %.4g', eps, t, ks,
                                   plan.margin, floor)
                rows.append((eps, t, ks, floor, n))
                if k == last:
                    points.append((eps, ks))

        fit = _fit(points, 'Kolmogorov')
        self.details['rate'] = _rate_details(fit)
        self.details['dkw_band'] = bands
        self.files.append(writers.write_csv(
            self.path('kolmogorov_rate.csv'), writers.KOLMOGOROV_COLUMNS,
            rows, fit, with_rate=True))

    def run_malliavin_check(self):
        config = self.config
        warning = plan_resolution(config)
        if warning:
            logger.warning(warning)
            self.details['resolution_warning'] = warning
        self.plan_substeps()
        data = self.map_chunks(malliavin_chunk, config.n_paths)
        last = len(config.t_eval) - 1
        first_kind = config.kinds[0]
        rows, points = [], []
        for eps in config.epsilons:
            good = ~data['aborted', eps]
            aborts = int(np.count_nonzero(~good))
            self.aborts[eps] = aborts
            for k, t in enumerate(config.t_eval):
                for kind in config.kinds:
                    samples = data[kind, eps][good, k]
                    estimate = EstimateWithError.from_samples(samples) \
                        if samples.size else NO_ESTIMATE
                    rows.append((eps, t, kind, estimate.value,
                                 estimate.std_error, estimate.n, aborts))
                    if k == last and kind == first_kind:
                        points.append((eps, estimate.value))

        fit = _fit(points, 'Malliavin field')
        self.details['rate'] = _rate_details(fit)
        self.files.append(writers.write_csv(
            self.path('malliavin_check.csv'), writers.MALLIAVIN_COLUMNS, rows,
            fit, with_rate=True))
        self.run_oracle()

    def run_oracle(self):
        """Propagated vs closed-form limit fields under dt refinement."""
        config = self.config
        n_paths = min(sim_settings.ORACLE_PATHS, config.n_paths)
        data = self.map_chunks(oracle_chunk, n_paths)
        rows, gaps = [], {}
        oracle_aborts = 0
        for level in ORACLE_LEVELS:
            good = ~data['aborted', level]
            oracle_aborts += int(np.count_nonzero(~good))
            dt = config.T / (config.n_steps * level)
            for kind in config.kinds:
                if (kind, level) not in data:
                    continue
                values = data[kind, level][good]
                gap = float(np.max(values)) if values.size else math.nan
                gaps.setdefault(kind, []).append(gap)
                rows.append((dt, kind, gap, values.size))
        for kind, values in gaps.items():
            logger.info('Oracle %s field gaps under dt halving: %s', kind,
                        ', '.join('{:.3g}'.format(v) for v in values))
        if oracle_aborts:
            self.aborts['oracle'] = oracle_aborts
        self.details['oracle'] = gaps
        self.files.append(writers.write_csv(
            self.path('oracle.csv'), writers.ORACLE_COLUMNS, rows))

    def run_inverse_norm(self):
        config = self.config
        kinds = []
        for kind in config.kinds:
            if kind == FieldKind.JUMP.value and not self.model.has_jumps:
                logger.warning('%s has no jumps; skipping jump norms',
                               config.model_name)
                continue
            kinds.append(kind)

        data = self.map_chunks(inverse_norm_chunk, config.n_paths)
        good = ~data['aborted']
        aborts = int(np.count_nonzero(~good))
        self.aborts['limit'] = aborts
        rows, points = [], []
        for k, t in enumerate(config.t_eval):
            for p in config.p_values:
                for kind in kinds:
                    samples = data[kind][good, k]
                    estimate = inverse_norm_moment(samples, p) \
                        if samples.size else NO_ESTIMATE
                    rows.append((t, p, kind, estimate.value,
                                 estimate.std_error, estimate.value * t ** p,
                                 estimate.n, aborts))
                    if p == config.p_values[0] and kinds and \
                            kind == kinds[0]:
                        points.append((t, estimate.value))

        self.inverse_norm_references(kinds)
        with_rate = len(config.t_eval) >= 3
        fit = _fit(points, 'inverse norm') if with_rate else None
        self.details['rate'] = _rate_details(fit)
        self.files.append(writers.write_csv(
            self.path('inverse_norm.csv'), writers.INVERSE_NORM_COLUMNS, rows,
            fit, with_rate=with_rate))

    def inverse_norm_references(self, kinds):
        """||D^B X_t||^{-2p} in closed form when the Brownian norm is fixed."""
        config = self.config
        if FieldKind.BROWNIAN.value not in kinds:
            return
        norms = [brownian_norm_reference(config.model_name,
                                         config.model_params, t)
                 for t in config.t_eval]
        if any(norm is None or norm <= 0 for norm in norms):
            return
        references = []
        for t, norm in zip(config.t_eval, norms):
            for p in config.p_values:
                references.append({'t': t, 'p': p,
                                   'kind': FieldKind.BROWNIAN.value,
                                   'value': norm ** -p})
                logger.info('Reference E[norm^-2p] at t = %g, p = %g: %.6g',
                            t, p, norm ** -p)
        self.details['reference'] = references

    def run_assumptions(self):
        config = self.config
        report = validate_assumptions(self.model, config.probe_box(),
                                      config.n_probes, rng_seed=config.seed)
        row = report.as_row()
        self.details['ratios'] = report.ratios
        self.details['all_ok'] = report.all_ok
        self.files.append(writers.write_csv(
            self.path('assumptions.csv'), writers.ASSUMPTION_COLUMNS,
            [[row[column] for column in writers.ASSUMPTION_COLUMNS]]))


def run(config, out_dir, threads=None):
    """Run ``config`` into ``out_dir`` and return its ResultBundle.

    Args:
        config (ExperimentConfig): validated config.
        out_dir (str): output directory, created when missing.
        threads (int or 'auto'): worker processes; overrides the config.

    Raises:
        ConfigError: bad worker count.
        NoiseFloorError: kolmogorov_rate with too few paths.
        NumericalAbort: paths went non-finite; results are written first
            and the bundle rides on the exception.
    """

    threads = resolve_threads(threads, config.threads)
    return ExperimentRunner(config, out_dir, threads).run()
