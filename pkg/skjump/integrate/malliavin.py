"""Malliavin derivatives of the limit and SK solutions.

Along a frozen trajectory the derivative fields solve linear equations.
For the limit process, with a_i = b' dt + sigma' dB_i - lam E[dc_dx] dt,

    D_{i+1} = D_i (1 + a_i) prod_{jumps in step i} (1 + dc_dx(X_{tau-}, z))

started at t_r from sigma(t_r, X_r) (Brownian kind) or dc_dz(X_r, xi)
(jump kind). The eps-fields carry the kernel 1 - e^{-(t - s)/eps}:

    D_k = (1 - e^{-(t_k - t_r)/eps}) D_init + P_k - W_k

where P integrates (a + sum dc_dx) D and W is the same integral weighted by
e^{-(t_k - s)/eps}, discretized like the exponential SK scheme. The closed
form of the limit field is the Doleans exponential of the same integrand.

Fields are computed for many perturbation rows at once: every r of
interest, times every mark for the jump kind, times every path of a batch.
Rows that are not born yet hold exact zeros.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from dynamics.exceptions import LogFloorViolation
from noise.batch import NoiseBatch, per_path_marks
from noise.paths import TimeGrid
from noise.streams import Purpose
from skjump.conf import sim_settings

from .exceptions import FieldIndexError, IntegrationError, PathMismatchError
from .schemes import JumpMean, exponential_weights, simulate_limit
from .trajectories import TrajectoryBatch

logger = logging.getLogger(__name__)


class FieldKind(str, Enum):
    BROWNIAN = 'brownian'
    JUMP = 'jump'


@dataclass(frozen=True, eq=False)
class MalliavinField:
    """D_r X_t (Brownian) or D_{r,xi} X_t (jump) on the trajectory grid.

    Fields:
        kind: FieldKind
        r_index: perturbation time index
        values: n_steps + 1 values, exact zeros before r_index
        grid: TimeGrid of the trajectory
        epsilon: small mass, None for the limit process
        mark: xi for the jump kind
        closed_form: whether values come from the exponential formula

    """

    kind: FieldKind
    r_index: int
    values: np.ndarray
    grid: TimeGrid
    epsilon: Optional[float] = None
    mark: Optional[float] = None
    closed_form: bool = False

    def __post_init__(self):
        self.values.setflags(write=False)

    def at(self, t_index):
        return self.values[t_index]


def _one_row(trajectory, path):
    if trajectory.grid != path.grid:
        raise PathMismatchError('Trajectory and noise path grids differ')
    if (trajectory.seed, trajectory.stream_id) != (path.seed, path.stream_id):
        raise PathMismatchError(
            'Trajectory was driven by stream {} of seed {}, not stream {} of '
            'seed {}'.format(trajectory.stream_id, trajectory.seed,
                             path.stream_id, path.seed))
    jump_offsets = None
    if trajectory.pre_jump is not None:
        jump_offsets = np.array([0, trajectory.pre_jump.size])
    trajectories = TrajectoryBatch(
        grid=trajectory.grid,
        x=trajectory.x[None, :],
        scheme=trajectory.scheme,
        seeds=np.array([trajectory.seed]),
        stream_ids=np.array([trajectory.stream_id]),
        abort_step=np.array([-1]),
        epsilon=trajectory.epsilon,
        pre_jump=trajectory.pre_jump,
        jump_offsets=jump_offsets,
    )
    return trajectories, NoiseBatch([path])


def _check_pair(model, trajectories, batch):
    if trajectories.grid != batch.grid or len(trajectories) != len(batch):
        raise PathMismatchError('Trajectories and noise do not line up')
    ids = np.array([p.stream_id for p in batch.paths])
    if not np.array_equal(ids, trajectories.stream_ids):
        raise PathMismatchError('Trajectories were driven by other streams')
    if batch.intensity != model.jump_intensity:
        raise PathMismatchError('Noise lam differs from the model lam')
    if trajectories.epsilon is None and model.has_jumps and (
            trajectories.pre_jump is None
            or trajectories.pre_jump.size != batch.n_jumps):
        raise PathMismatchError('Limit trajectory lacks pre-jump states')


def _check_rows(grid, r_indices):
    r_indices = np.atleast_1d(np.asarray(r_indices, dtype=np.int64))
    if r_indices.size == 0:
        raise FieldIndexError('No perturbation indices given')
    if r_indices.min() < 0 or r_indices.max() >= grid.n_steps:
        raise FieldIndexError('r_index must lie in [0, {})'.format(
            grid.n_steps))
    return r_indices


def _along(fn, nodes, x):
    """fn(t_k, x[:, k]) for every step k, shape (P, n)."""
    n = x.shape[1] - 1
    out = np.empty((x.shape[0], n))
    for k in range(n):
        out[:, k] = fn(nodes[k], x[:, k])
    return out


def mark_grid(path, model, m_xi=None):
    """xi marks for the jump fields of one path, shape (n_steps, m_xi)."""
    m_xi = m_xi or sim_settings.M_XI
    return per_path_marks(path, model.mark_sampler, Purpose.MALLIAVIN_MARKS,
                          m_xi)


class _Rows:
    """Perturbation rows: their birth index and initial values."""

    def __init__(self, model, x, nodes, kind, r_indices, marks):
        if kind == FieldKind.BROWNIAN:
            self.birth = r_indices
            self.init = np.stack(
                [model.sigma(nodes[r], x[:, r]) * np.ones(x.shape[0])
                 for r in r_indices], axis=1)
            self.per_r = 1
        else:
            P, _, m = marks.shape
            self.birth = np.repeat(r_indices, m)
            self.init = np.concatenate(
                [model.dc_dz(x[:, r][:, None], marks[:, pos, :])
                 * np.ones((P, m))
                 for pos, r in enumerate(r_indices)], axis=1)
            self.per_r = m


def _jump_marks_for(model, batch, kind, r_indices, marks):
    if kind != FieldKind.JUMP:
        return None
    if marks is None:
        marks = batch.malliavin_marks(model.mark_sampler, sim_settings.M_XI)
    marks = np.asarray(marks, dtype=float)
    if marks.ndim != 3 or marks.shape[:2] != (len(batch), batch.grid.n_steps):
        raise IntegrationError(
            'Jump marks must have shape (paths, n_steps, m_xi)')
    return marks[:, r_indices, :]


class _Coefficients:
    """Per-step coefficients of the derivative equations, shape (P, n)."""

    def __init__(self, model, trajectories, batch):
        grid = batch.grid
        nodes, dt = grid.nodes, grid.dt
        x = trajectories.x
        self.bp = _along(model.db_dx, nodes, x)
        self.sp = _along(model.dsigma_dx, nodes, x)
        compensator = JumpMean(model, batch, model.dc_dx, model.dc_dx_mean)
        if model.has_jumps:
            self.mean = np.stack([compensator(k, x[:, k]) * np.ones(x.shape[0])
                                  for k in range(grid.n_steps)], axis=1)
        else:
            self.mean = np.zeros_like(self.bp)
        self.a = (self.bp - self.mean) * dt + self.sp * batch.dB


def _limit_jumps(model, trajectories, batch):
    """Per-step products and log-sums of 1 + dc_dx(X_{tau-}, z)."""
    P, n = len(batch), batch.grid.n_steps
    factor = np.ones((P, n))
    logs = np.zeros((P, n))
    if not model.has_jumps or not batch.n_jumps:
        return factor, logs, None
    one_plus = 1.0 + model.dc_dx(trajectories.pre_jump, batch.jump_mark) \
        * np.ones(batch.n_jumps)
    index = (batch.jump_path, batch.jump_step)
    np.multiply.at(factor, index, one_plus)
    return factor, logs, (index, one_plus)


def _eps_jumps(model, trajectories, batch, epsilon):
    """Per-step sums of dc_dx(X^eps_i, z), plain and kernel weighted."""
    P, n = len(batch), batch.grid.n_steps
    plain = np.zeros((P, n))
    weighted = np.zeros((P, n))
    if not model.has_jumps or not batch.n_jumps:
        return plain, weighted
    left = trajectories.x[batch.jump_path, batch.jump_step]
    slope = model.dc_dx(left, batch.jump_mark) * np.ones(batch.n_jumps)
    kernel = np.exp(-(batch.grid.nodes[batch.jump_step + 1] - batch.jump_time)
                    / epsilon)
    index = (batch.jump_path, batch.jump_step)
    np.add.at(plain, index, slope)
    np.add.at(weighted, index, kernel * slope)
    return plain, weighted


def _groups(indices):
    groups = {}
    for position, k in enumerate(np.asarray(indices).tolist()):
        groups.setdefault(k, []).append(position)
    return groups


def _limit_kernel(multiplier, rows, record):
    P, count = rows.init.shape
    D = np.zeros((P, count))
    out = np.zeros((P, count, len(record)))
    births, slots = _groups(rows.birth), _groups(record)
    last = int(max(record))
    for k in range(last + 1):
        if k in births:
            born = births[k]
            D[:, born] = rows.init[:, born]
        for slot in slots.get(k, ()):
            out[:, :, slot] = D
        if k < last:
            D *= multiplier[:, k][:, None]
    return out


def _eps_kernel(coefficients, jumps, rows, grid, epsilon, record):
    a = coefficients.a
    plain_jumps, weighted_jumps = jumps
    nodes = grid.nodes
    decay, phi = exponential_weights(grid.dt, epsilon)
    born_at = nodes[rows.birth]
    P, count = rows.init.shape
    plain = np.zeros((P, count))
    weighted = np.zeros((P, count))
    out = np.zeros((P, count, len(record)))
    slots = _groups(record)
    last = int(max(record))
    for k in range(last + 1):
        age = np.maximum(nodes[k] - born_at, 0.0)
        D = -np.expm1(-age / epsilon) * rows.init + plain - weighted
        for slot in slots.get(k, ()):
            out[:, :, slot] = D
        if k < last:
            plain += (a[:, k] + plain_jumps[:, k])[:, None] * D
            weighted = decay * weighted \
                + (phi * a[:, k] + weighted_jumps[:, k])[:, None] * D
    return out


def _closed_kernel(model, coefficients, jumps, batch, rows, record):
    dt = batch.grid.dt
    ell = (coefficients.bp - 0.5 * coefficients.sp ** 2
           - coefficients.mean) * dt + coefficients.sp * batch.dB
    _, logs, realized = jumps
    if realized is not None:
        index, one_plus = realized
        floor = sim_settings.DELTA_LOG
        below = np.flatnonzero(one_plus < floor)
        if below.size:
            j = int(below[0])
            raise LogFloorViolation(
                '1 + dc_dx = {:.3g} < {:g} at jump {}'.format(
                    one_plus[j], floor, j), index=j, value=float(one_plus[j]))
        np.add.at(logs, index, np.log(one_plus))
    ell = ell + logs
    P = ell.shape[0]
    L = np.concatenate((np.zeros((P, 1)), np.cumsum(ell, axis=1)), axis=1)
    record = np.asarray(record)
    exponent = L[:, record][:, None, :] - L[:, rows.birth][:, :, None]
    out = rows.init[:, :, None] * np.exp(exponent)
    out[:, rows.birth[:, None] > record[None, :]] = 0.0
    return out


def field_records(model, trajectories, noise, kind, r_indices, t_indices,
                  marks=None, closed_form=False):
    """Evaluate many derivative fields at chosen times.

    Args:
        model (ModelSpec): the model that produced ``trajectories``.
        trajectories (TrajectoryBatch): limit or eps trajectories.
        noise (NoiseBatch): the paths that drove them, same grid.
        kind (FieldKind): Brownian or jump perturbation.
        r_indices (array): perturbation indices, each in [0, n_steps).
        t_indices (array): time indices to record.
        marks (array): jump kind only, xi marks of shape
            (paths, n_steps, m_xi); drawn from the MALLIAVIN_MARKS
            substreams when omitted.
        closed_form (bool): limit only, use the exponential formula.

    Returns:
        tuple: (values of shape (paths, rows, len(t_indices)), birth index
        of each row, marks per r). Rows are r-major, marks minor.
    """

    kind = FieldKind(kind)
    batch = noise if isinstance(noise, NoiseBatch) else NoiseBatch(noise)
    _check_pair(model, trajectories, batch)
    grid = batch.grid
    r_indices = _check_rows(grid, r_indices)
    t_indices = np.atleast_1d(np.asarray(t_indices, dtype=np.int64))
    if t_indices.min() < 0 or t_indices.max() > grid.n_steps:
        raise FieldIndexError('t_index must lie in [0, {}]'.format(
            grid.n_steps))
    marks = _jump_marks_for(model, batch, kind, r_indices, marks)
    logger.debug('%s fields: %d paths, %d r indices, %d record times',
                 kind.value, len(batch), r_indices.size, t_indices.size)

    rows = _Rows(model, trajectories.x, grid.nodes, kind, r_indices, marks)
    coefficients = _Coefficients(model, trajectories, batch)
    epsilon = trajectories.epsilon

    with np.errstate(over='ignore', invalid='ignore'):
        if epsilon is None:
            jumps = _limit_jumps(model, trajectories, batch)
            if closed_form:
                values = _closed_kernel(model, coefficients, jumps, batch,
                                        rows, t_indices)
            else:
                values = _limit_kernel((1.0 + coefficients.a) * jumps[0],
                                       rows, t_indices)
        else:
            if closed_form:
                raise IntegrationError(
                    'The closed form exists for the limit process only')
            jumps = _eps_jumps(model, trajectories, batch, epsilon)
            values = _eps_kernel(coefficients, jumps, rows, grid, epsilon,
                                 t_indices)
    return values, rows.birth, rows.per_r


def _fields(model, trajectory, path, kind, r_indices, marks, closed_form):
    trajectories, batch = _one_row(trajectory, path)
    n = trajectory.grid.n_steps
    values, birth, per_r = field_records(
        model, trajectories, batch, kind, r_indices, np.arange(n + 1), marks,
        closed_form)
    kind = FieldKind(kind)
    fields = []
    for row, r in enumerate(birth.tolist()):
        mark = None
        if kind == FieldKind.JUMP:
            mark = float(marks[0, r, row % per_r])
        fields.append(MalliavinField(
            kind=kind, r_index=r, values=values[0, row].copy(),
            grid=trajectory.grid, epsilon=trajectory.epsilon, mark=mark,
            closed_form=closed_form))
    return fields


def propagate_malliavin(model, trajectory, path, kind, r_index, mark=None):
    """Euler discretization of one derivative field along a trajectory.

    Args:
        model (ModelSpec): the model that produced ``trajectory``.
        trajectory (Trajectory): limit or eps trajectory.
        path (NoisePath): the path that drove ``trajectory``.
        kind (FieldKind): 'brownian' or 'jump'.
        r_index (int): perturbation time index, < n_steps.
        mark (float): xi, required for the jump kind.

    Returns:
        MalliavinField
    """

    return _single_field(model, trajectory, path, kind, r_index, mark, False)


def closed_form_malliavin(model, trajectory, path, kind, r_index, mark=None):
    """Doleans-exponential evaluation of a limit derivative field.

    Raises:
        IntegrationError: ``trajectory`` is an eps trajectory.
        LogFloorViolation: 1 + dc_dx < DELTA_LOG at a realized jump.
    """

    if not trajectory.is_limit:
        raise IntegrationError(
            'The closed form exists for the limit process only')
    return _single_field(model, trajectory, path, kind, r_index, mark, True)


def _single_field(model, trajectory, path, kind, r_index, mark, closed_form):
    kind = FieldKind(kind)
    marks = None
    if kind == FieldKind.JUMP:
        if mark is None:
            raise IntegrationError('The jump kind needs a mark xi')
        marks = np.full((1, trajectory.grid.n_steps, 1), float(mark))
    return _fields(model, trajectory, path, kind, [r_index], marks,
                   closed_form)[0]


def field_family(model, trajectory, path, kind, marks=None,
                 closed_form=False):
    """Every field of one kind along a trajectory.

    Brownian kind: one field per r. Jump kind: one per (r, xi) with ``marks``
    of shape (n_steps, m_xi), by default mark_grid(path, model).
    """

    kind = FieldKind(kind)
    r_indices = np.arange(trajectory.grid.n_steps)
    full = None
    if kind == FieldKind.JUMP:
        if marks is None:
            marks = mark_grid(path, model)
        full = np.asarray(marks, dtype=float)[None, :, :]
    return _fields(model, trajectory, path, kind, r_indices, full,
                   closed_form)


def malliavin_norms(fields, model, grid, t_index=None):
    """(normB^2, normN^2) at time index t_index (default: T).

    normB^2 = sum_{r < t} D_r^2 dt; normN^2 = sum_{r < t} lam mean_xi
    D_{r,xi}^2 dt, left-point quadrature over r.
    """

    fields = list(fields)
    if not fields:
        raise IntegrationError('No fields to take the norm of')
    k = grid.n_steps if t_index is None else t_index
    normB = 0.0
    by_r = {}
    for field in fields:
        if field.r_index >= k:
            continue
        value = field.values[k] ** 2
        if field.kind == FieldKind.BROWNIAN:
            normB += value
        else:
            by_r.setdefault(field.r_index, []).append(value)
    normN = sum(np.mean(values) for values in by_r.values())
    return normB * grid.dt, model.jump_intensity * normN * grid.dt


def _squared_norms(values, birth, per_r, t_indices, dt, kind, lam):
    t_indices = np.atleast_1d(np.asarray(t_indices))
    mask = birth[:, None] < t_indices[None, :]
    total = np.where(mask[None, :, :], values ** 2, 0.0).sum(axis=1) * dt
    if FieldKind(kind) == FieldKind.JUMP:
        total *= lam / per_r
    return total


def norm_profile_batch(model, trajectories, noise, kind, t_indices,
                       marks=None, closed_form=False):
    """normB^2 or normN^2 at each t index for every path, shape (P, K)."""
    kind = FieldKind(kind)
    t_indices = np.atleast_1d(np.asarray(t_indices, dtype=np.int64))
    if kind == FieldKind.JUMP and not model.has_jumps:
        return np.zeros((len(trajectories), t_indices.size))
    r_indices = np.arange(max(int(t_indices.max()), 1))
    values, birth, per_r = field_records(
        model, trajectories, noise, kind, r_indices, t_indices, marks,
        closed_form)
    return _squared_norms(values, birth, per_r, t_indices,
                          trajectories.grid.dt, kind, model.jump_intensity)


def norm_profile(model, trajectory, path, kind, t_indices, marks=None,
                 closed_form=False):
    """normB^2 or normN^2 of one trajectory at each t index."""
    trajectories, batch = _one_row(trajectory, path)
    if marks is not None:
        marks = np.asarray(marks, dtype=float)[None, :, :]
    return norm_profile_batch(model, trajectories, batch, kind, t_indices,
                              marks, closed_form)[0]


def field_gap_norm_batch(model, eps_trajectories, limit_trajectories, noise,
                         kind, t_indices, marks=None):
    """||D X^eps_t - D X_t||^2 in L2([0, t]) (Brownian) or L2([0, t] x R0, nu)
    (jump), per path and t index.
    """
    kind = FieldKind(kind)
    batch = noise if isinstance(noise, NoiseBatch) else NoiseBatch(noise)
    t_indices = np.atleast_1d(np.asarray(t_indices, dtype=np.int64))
    if kind == FieldKind.JUMP and not model.has_jumps:
        return np.zeros((len(batch), t_indices.size))
    r_indices = np.arange(max(int(t_indices.max()), 1))
    if kind == FieldKind.JUMP and marks is None:
        marks = batch.malliavin_marks(model.mark_sampler, sim_settings.M_XI)
    eps_values, birth, per_r = field_records(
        model, eps_trajectories, batch, kind, r_indices, t_indices, marks)
    limit_values, _, _ = field_records(
        model, limit_trajectories, batch, kind, r_indices, t_indices, marks)
    return _squared_norms(eps_values - limit_values, birth, per_r, t_indices,
                          batch.grid.dt, kind, model.jump_intensity)


def field_gap_norm(model, eps_trajectory, limit_trajectory, path, kind,
                   t_indices, marks=None):
    """Single-path form of field_gap_norm_batch."""
    eps_rows, batch = _one_row(eps_trajectory, path)
    limit_rows, _ = _one_row(limit_trajectory, path)
    if marks is not None:
        marks = np.asarray(marks, dtype=float)[None, :, :]
    return field_gap_norm_batch(model, eps_rows, limit_rows, batch, kind,
                                t_indices, marks)[0]


def oracle_gap_batch(model, trajectories, noise, r_indices, kind,
                     marks=None):
    """Largest relative gap between propagated and closed-form limit fields.

    For every path and row: max_t |D_prop - D_closed| / max_t |D_closed|.
    Returns the maximum over rows for each path, shape (P,).
    """
    batch = noise if isinstance(noise, NoiseBatch) else NoiseBatch(noise)
    t_indices = np.arange(batch.grid.n_steps + 1)
    propagated, _, _ = field_records(model, trajectories, batch, kind,
                                     r_indices, t_indices, marks)
    closed, _, _ = field_records(model, trajectories, batch, kind,
                                 r_indices, t_indices, marks,
                                 closed_form=True)
    scale = np.max(np.abs(closed), axis=2)
    gap = np.max(np.abs(propagated - closed), axis=2)
    with np.errstate(divide='ignore', invalid='ignore'):
        relative = np.where(scale > 0, gap / scale, 0.0)
    return np.max(relative, axis=1)


def oracle_gap(model, path, r_indices, kind, marks=None, trajectory=None):
    """oracle_gap_batch for one path; simulates the limit if not given."""
    if trajectory is None:
        trajectory = simulate_limit(model, path)
    trajectories, batch = _one_row(trajectory, path)
    if marks is not None:
        marks = np.asarray(marks, dtype=float)[None, :, :]
    return float(oracle_gap_batch(model, trajectories, batch, r_indices, kind,
                                  marks)[0])
