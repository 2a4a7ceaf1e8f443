"""Per-chunk work items.

Each function simulates the paths ``start, ..., stop - 1`` of a run and
returns a dict of per-path arrays (first axis = path). The runner
concatenates the dicts of consecutive chunks, so results depend on the path
index only and never on how chunks were scheduled. Functions are module
level so a process pool can pickle them; the model is rebuilt from the
config in every worker.
"""
import logging

import django
import numpy as np
from django.apps import apps

from integrate.malliavin import (FieldKind, field_gap_norm_batch,
                                 norm_profile_batch, oracle_gap_batch)
from integrate.schemes import simulate_limit_batch, simulate_sk_batch
from noise.batch import NoiseBatch
from noise.paths import TimeGrid, sample_noise
from skjump.conf import sim_settings

from .planning import plan_substeps
from .serializers import INDEPENDENT, KOLMOGOROV_RATE

logger = logging.getLogger(__name__)

# paths per field computation; memory grows with paths x rows x steps
MALLIAVIN_BATCH = 32
ORACLE_BATCH = 8
# the oracle compares fields at n, 2n and 4n steps
ORACLE_LEVELS = (1, 2, 4)


def init_worker(user_settings):
    """Process pool initializer: set up Django, pin the parent's settings."""
    if not apps.ready:
        django.setup()
    sim_settings.pin(user_settings)


def sample_batch(config, model, grid, indices):
    return NoiseBatch([
        sample_noise(grid, model.jump_intensity, model.mark_sampler,
                     config.seed, k)
        for k in indices])


def _blocks(start, stop, size):
    for lo in range(start, stop, size):
        yield lo, min(lo + size, stop)


def _stack(parts):
    return {key: np.concatenate(values) for key, values in parts.items()}


def coupled_chunk(config, start, stop):
    """Limit and SK states at t_eval for strong_rate and kolmogorov_rate.

    Keys:
        'limit', 'limit_aborted'
        ('sk', eps), ('sk_aborted', eps), ('sk_sup', eps): sup_t |X^eps_t|
        'independent', 'independent_aborted': limit on paths offset by
            n_paths, when the KS ensembles are independent

    """

    model = config.build_model()
    factors, finest = plan_substeps(config)
    fine = TimeGrid(config.T, config.n_steps * finest)
    t_indices = np.asarray(config.t_indices)

    batch = sample_batch(config, model, fine, range(start, stop))
    limit = simulate_limit_batch(model, batch.coarsen(finest))
    out = {'limit': limit.x[:, t_indices], 'limit_aborted': limit.aborted}
    for eps in config.epsilons:
        factor = factors[eps]
        sk = simulate_sk_batch(model, batch.coarsen(finest // factor), eps,
                               config.sk_scheme, factor)
        out['sk', eps] = sk.x[:, t_indices]
        out['sk_aborted', eps] = sk.aborted
        with np.errstate(invalid='ignore'):
            out['sk_sup', eps] = np.max(np.abs(sk.x), axis=1)

    if config.experiment == KOLMOGOROV_RATE and \
            config.ks_coupling == INDEPENDENT:
        offset = config.n_paths
        other = sample_batch(config, model, fine,
                             range(offset + start, offset + stop))
        independent = simulate_limit_batch(model, other.coarsen(finest))
        out['independent'] = independent.x[:, t_indices]
        out['independent_aborted'] = independent.aborted

    logger.debug('Coupled chunk [%d, %d) done', start, stop)
    return out


def malliavin_chunk(config, start, stop):
    """||D X^eps_t - D X_t||^2 per path, epsilon, kind and t_eval.

    Keys:
        (kind, eps): shape (paths, len(t_eval))
        ('aborted', eps): limit or SK path went non-finite

    """

    model = config.build_model()
    factors, finest = plan_substeps(config)
    fine = TimeGrid(config.T, config.n_steps * finest)
    t_indices = np.asarray(config.t_indices)

    parts = {}
    for lo, hi in _blocks(start, stop, MALLIAVIN_BATCH):
        batch = sample_batch(config, model, fine, range(lo, hi))
        coarse = batch.coarsen(finest)
        limit = simulate_limit_batch(model, coarse)
        for eps in config.epsilons:
            factor = factors[eps]
            sk = simulate_sk_batch(model, batch.coarsen(finest // factor),
                                   eps, config.sk_scheme, factor)
            parts.setdefault(('aborted', eps), []).append(
                limit.aborted | sk.aborted)
            for kind in config.kinds:
                gaps = field_gap_norm_batch(model, sk, limit, coarse, kind,
                                            t_indices)
                parts.setdefault((kind, eps), []).append(gaps)

    logger.debug('Malliavin chunk [%d, %d) done', start, stop)
    return _stack(parts)


def inverse_norm_chunk(config, start, stop):
    """normB^2 / normN^2 of the limit process at t_eval.

    Keys:
        kind: shape (paths, len(t_eval))
        'aborted': the limit path went non-finite

    """

    model = config.build_model()
    t_indices = np.asarray(config.t_indices)
    parts = {}
    for lo, hi in _blocks(start, stop, MALLIAVIN_BATCH):
        batch = sample_batch(config, model, config.grid, range(lo, hi))
        limit = simulate_limit_batch(model, batch)
        parts.setdefault('aborted', []).append(limit.aborted)
        for kind in config.kinds:
            parts.setdefault(kind, []).append(
                norm_profile_batch(model, limit, batch, kind, t_indices))

    logger.debug('Inverse norm chunk [%d, %d) done', start, stop)
    return _stack(parts)


def oracle_r_indices(n_steps):
    """ORACLE_R_POINTS evenly spaced perturbation indices on n_steps."""
    count = max(1, min(sim_settings.ORACLE_R_POINTS, n_steps))
    return np.arange(count) * (n_steps // count)


def oracle_chunk(config, start, stop):
    """Propagated against closed-form limit fields at every oracle level.

    Noise is sampled once at the finest level and coarsened, so the three
    levels see the same realizations and the same perturbation times.

    Keys:
        (kind, level): largest relative field gap per path
        ('aborted', level): the limit path went non-finite

    """

    model = config.build_model()
    finest = max(ORACLE_LEVELS)
    fine = TimeGrid(config.T, config.n_steps * finest)
    base = oracle_r_indices(config.n_steps)

    parts = {}
    for lo, hi in _blocks(start, stop, ORACLE_BATCH):
        batch = sample_batch(config, model, fine, range(lo, hi))
        for level in ORACLE_LEVELS:
            noise = batch.coarsen(finest // level)
            limit = simulate_limit_batch(model, noise)
            parts.setdefault(('aborted', level), []).append(limit.aborted)
            for kind in config.kinds:
                if kind == FieldKind.JUMP.value and not model.has_jumps:
                    continue
                gaps = oracle_gap_batch(model, limit, noise, base * level,
                                        kind)
                parts.setdefault((kind, level), []).append(gaps)

    logger.debug('Oracle chunk [%d, %d) done', start, stop)
    return _stack(parts)
