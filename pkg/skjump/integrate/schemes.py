"""Integrators for the limit SDE and the small-mass SK system.

All schemes freeze coefficients at the left end of each step. Jumps enter
through the compensated measure: raw jumps are added at their step and the
compensator ``lam * E_mu[c(X_i, .)] * dt`` is subtracted, with the mark mean
taken from ``model.c_mean`` when the model has one and from ``M_COMP``
per-step Monte Carlo marks otherwise. Without jumps c is never evaluated.

Each scheme has a batch form integrating a NoiseBatch path-parallel; the
single-path forms wrap it and raise on non-finite states.
"""
import logging
import math

import numpy as np

from noise.batch import NoiseBatch
from noise.paths import coarsen
from skjump.conf import sim_settings

from .exceptions import IntegrationError, PathMismatchError, StabilityError
from .trajectories import (DIRECT, EXPONENTIAL, LIMIT, CoupledPair,
                           TrajectoryBatch)

logger = logging.getLogger(__name__)

# direct-scheme factors are powers of two so every grid in a run nests
MAX_SUBSTEP_FACTOR = 2 ** 20


class JumpMean:
    """Per-step estimate of lam * E_mu[f(x, .)].

    Uses the analytic mean when given, else the mean over the batch's
    COMPENSATOR marks of the current step. Zero without jumps.
    """

    def __init__(self, model, batch, fn, mean_fn, marks=None):
        self.lam = model.jump_intensity
        self.fn = fn
        self.mean_fn = mean_fn
        self.marks = None
        if self.lam > 0 and mean_fn is None:
            self.marks = marks if marks is not None else \
                batch.compensator_marks(model.mark_sampler,
                                        sim_settings.M_COMP)

    def __call__(self, step, x):
        if self.lam == 0:
            return 0.0
        if self.mean_fn is not None:
            return self.lam * self.mean_fn(x)
        values = self.fn(x[:, None], self.marks[:, step, :])
        return self.lam * np.mean(values, axis=1)


def _as_batch(noise):
    return noise if isinstance(noise, NoiseBatch) else NoiseBatch(noise)


def _check_noise(model, batch):
    if batch.intensity != model.jump_intensity:
        raise PathMismatchError(
            'Noise sampled with lam = {} but the model has lam = {}'.format(
                batch.intensity, model.jump_intensity))


def _check_epsilon(epsilon):
    if not (math.isfinite(epsilon) and 0 < epsilon <= 1):
        raise IntegrationError('epsilon must lie in (0, 1], got {}'.format(
            epsilon))


def _record_aborts(abort_step, state, step):
    bad = ~np.isfinite(state) & (abort_step < 0)
    abort_step[bad] = step


def _finish(batch, x, scheme, abort_step, **extra):
    result = TrajectoryBatch(
        grid=extra.pop('grid', batch.grid),
        x=x,
        scheme=scheme,
        seeds=np.array([p.seed for p in batch.paths]),
        stream_ids=np.array([p.stream_id for p in batch.paths]),
        abort_step=abort_step,
        **extra
    )
    if result.n_aborts:
        logger.warning('%s scheme: %d of %d paths went non-finite', scheme,
                       result.n_aborts, len(result))
    return result


def simulate_limit_batch(model, noise):
    """Euler-Maruyama for dX = b dt + sigma dB + int c N~(dt, dz).

    Per step: drift, diffusion and compensator at the left point, then the
    step's jumps in time order, each seeing the state left by the previous
    one. ``pre_jump`` records that state for every jump.
    """

    batch = _as_batch(noise)
    _check_noise(model, batch)
    grid = batch.grid
    n, dt, nodes = grid.n_steps, grid.dt, grid.nodes
    P = len(batch)

    x = np.empty((P, n + 1))
    x[:, 0] = model.x0
    pre_jump = np.full(batch.n_jumps, np.nan)
    abort_step = np.full(P, -1)
    compensator = JumpMean(model, batch, model.c, model.c_mean)
    schedule = batch.schedule if model.has_jumps else {}

    state = x[:, 0].copy()
    with np.errstate(over='ignore', invalid='ignore'):
        for i in range(n):
            t = nodes[i]
            state = (state + (model.b(t, state) * dt
                              + model.sigma(t, state) * batch.dB[:, i])
                     - compensator(i, state) * dt)
            for group in schedule.get(i, ()):
                rows = batch.jump_path[group]
                before = state[rows]
                pre_jump[group] = before
                state[rows] = before + model.c(before, batch.jump_mark[group])
            _record_aborts(abort_step, state, i)
            x[:, i + 1] = state

    return _finish(batch, x, LIMIT, abort_step, pre_jump=pre_jump,
                   jump_offsets=batch.jump_offsets)


def exponential_weights(dt, epsilon):
    """(decay, phi) of one step: e^{-dt/eps} and eps (1 - e^{-dt/eps}) / dt.

    phi is the mean of the kernel e^{-(t_{i+1} - s)/eps} over the step, the
    weight a frozen ds or dB increment carries in the weighted integral.
    """
    ratio = dt / epsilon
    decay = math.exp(-ratio)
    phi = -math.expm1(-ratio) / ratio
    return decay, phi


def simulate_sk_exponential_batch(model, noise, epsilon):
    """Variation-of-constants scheme for the second-order system.

    X^eps_t = x0 + eps y0 (1 - e^{-t/eps}) + I_t - J_t, where I integrates
    b ds + sigma dB + c N~ and J is the same integral weighted by
    e^{-(t - s)/eps}. J decays exactly over each step; jumps enter J with
    weight e^{-(t_{i+1} - tau)/eps}.
    """

    _check_epsilon(epsilon)
    batch = _as_batch(noise)
    _check_noise(model, batch)
    grid = batch.grid
    n, dt, nodes = grid.n_steps, grid.dt, grid.nodes
    P = len(batch)
    decay, phi = exponential_weights(dt, epsilon)
    start = model.x0 - epsilon * model.y0 * np.expm1(-nodes / epsilon)

    x = np.empty((P, n + 1))
    x[:, 0] = model.x0
    plain = np.zeros(P)
    weighted = np.zeros(P)
    abort_step = np.full(P, -1)
    compensator = JumpMean(model, batch, model.c, model.c_mean)
    step_jumps = batch.step_jumps if model.has_jumps else {}

    state = x[:, 0].copy()
    with np.errstate(over='ignore', invalid='ignore'):
        for i in range(n):
            t = nodes[i]
            increment = (model.b(t, state) * dt
                         + model.sigma(t, state) * batch.dB[:, i]
                         - compensator(i, state) * dt)
            plain += increment
            weighted = decay * weighted + phi * increment
            flat = step_jumps.get(i)
            if flat is not None:
                rows = batch.jump_path[flat]
                jump = model.c(state[rows], batch.jump_mark[flat])
                np.add.at(plain, rows, jump)
                kernel = np.exp(-(nodes[i + 1] - batch.jump_time[flat])
                                / epsilon)
                np.add.at(weighted, rows, kernel * jump)
            state = start[i + 1] + plain - weighted
            _record_aborts(abort_step, state, i)
            x[:, i + 1] = state

    return _finish(batch, x, EXPONENTIAL, abort_step, epsilon=epsilon)


def check_direct_step(dt, epsilon):
    """Raise StabilityError unless dt <= eps / SK_STABILITY_RATIO."""
    limit = epsilon / sim_settings.SK_STABILITY_RATIO
    if dt > limit * (1 + 1e-12):
        raise StabilityError(
            'Direct SK scheme needs fine dt <= eps / {:g} = {:.6g}, got '
            'dt = {:.6g}'.format(sim_settings.SK_STABILITY_RATIO, limit, dt))


def direct_substep_factor(dt, epsilon):
    """Smallest power of two f with dt / f <= eps / SK_STABILITY_RATIO."""
    _check_epsilon(epsilon)
    factor = 1
    limit = epsilon / sim_settings.SK_STABILITY_RATIO
    while dt / factor > limit * (1 + 1e-12):
        factor *= 2
        if factor > MAX_SUBSTEP_FACTOR:
            raise StabilityError(
                'eps = {:g} needs more than {} substeps per step'.format(
                    epsilon, MAX_SUBSTEP_FACTOR))
    return factor


def simulate_sk_direct_batch(model, noise, epsilon, substep_factor):
    """Euler-Maruyama on the (X, Y) system, dX = Y dt,
    eps dY = (b - Y) dt + sigma dB + int c N~(dt, dz).

    ``noise`` is sampled on the fine grid; X and Y are recorded on the nodes
    of the grid coarsened by ``substep_factor``, i.e. the grid of the
    coupled limit run.
    """

    _check_epsilon(epsilon)
    batch = _as_batch(noise)
    _check_noise(model, batch)
    fine = batch.grid
    coarse = fine.coarsen(substep_factor)
    check_direct_step(fine.dt, epsilon)
    n, dt, nodes = fine.n_steps, fine.dt, fine.nodes
    P = len(batch)
    f = substep_factor

    x = np.empty((P, coarse.n_steps + 1))
    y = np.empty((P, coarse.n_steps + 1))
    x[:, 0] = model.x0
    y[:, 0] = model.y0
    abort_step = np.full(P, -1)
    compensator = JumpMean(model, batch, model.c, model.c_mean)
    step_jumps = batch.step_jumps if model.has_jumps else {}

    position = x[:, 0].copy()
    velocity = y[:, 0].copy()
    with np.errstate(over='ignore', invalid='ignore'):
        for i in range(n):
            t = nodes[i]
            force = (model.b(t, position) * dt
                     + model.sigma(t, position) * batch.dB[:, i]
                     - compensator(i, position) * dt)
            next_velocity = velocity + (force - velocity * dt) / epsilon
            flat = step_jumps.get(i)
            if flat is not None:
                rows = batch.jump_path[flat]
                jump = model.c(position[rows], batch.jump_mark[flat])
                np.add.at(next_velocity, rows, jump / epsilon)
            position = position + velocity * dt
            velocity = next_velocity
            _record_aborts(abort_step, position, i // f)
            _record_aborts(abort_step, velocity, i // f)
            if (i + 1) % f == 0:
                x[:, (i + 1) // f] = position
                y[:, (i + 1) // f] = velocity

    return _finish(batch, x, DIRECT, abort_step, grid=coarse, y=y,
                   epsilon=epsilon)


def simulate_sk_batch(model, noise, epsilon, scheme, substep_factor=1):
    """Dispatch to the direct or exponential batch scheme.

    The exponential scheme integrates on the grid coarsened by
    ``substep_factor`` so both schemes report on the same nodes.
    """
    batch = _as_batch(noise)
    if scheme == DIRECT:
        return simulate_sk_direct_batch(model, batch, epsilon, substep_factor)
    if scheme == EXPONENTIAL:
        return simulate_sk_exponential_batch(
            model, batch.coarsen(substep_factor), epsilon)
    raise IntegrationError('Unknown SK scheme {!r}'.format(scheme))


def simulate_limit(model, path):
    """Limit trajectory of one path. See simulate_limit_batch."""
    return simulate_limit_batch(model, [path]).trajectory(0)


def simulate_sk_direct(model, path, epsilon, substep_factor):
    """SK trajectory of one fine path by the direct scheme."""
    return simulate_sk_direct_batch(
        model, [path], epsilon, substep_factor).trajectory(0)


def simulate_sk_exponential(model, path, epsilon):
    """SK trajectory of one path by the exponential scheme."""
    return simulate_sk_exponential_batch(model, [path], epsilon).trajectory(0)


def simulate_coupled(model, path, epsilon, scheme=EXPONENTIAL,
                     substep_factor=1):
    """Limit and SK trajectories on one noise realization.

    ``path`` is the finest path; the limit runs on
    ``coarsen(path, substep_factor)``.
    """
    coarse = coarsen(path, substep_factor)
    limit = simulate_limit(model, coarse)
    sk = simulate_sk_batch(model, [path], epsilon, scheme,
                           substep_factor).trajectory(0)
    return CoupledPair(limit=limit, sk=sk, path=coarse)
