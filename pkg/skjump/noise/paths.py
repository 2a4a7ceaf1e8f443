"""Time grids and coupled noise realizations.

A NoisePath keeps the Brownian motion at the grid nodes, ``w[i] = B(t_i)``,
and derives increments from it. Coarsening picks every ``factor``-th node,
so the terminal value is kept bit for bit and coarsening composes exactly.
Jumps are never snapped to nodes: a jump at ``tau`` belongs to the step
``i`` with ``t_i < tau <= t_{i+1}``.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import GridError, NoiseError
from .streams import Purpose, standard_normals, substream

logger = logging.getLogger(__name__)


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i T / n_steps on [0, T].

    Fields:
        t_end: horizon T > 0
        n_steps: number of steps >= 1

    """

    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (isinstance(self.t_end, (int, float))
                and math.isfinite(self.t_end) and self.t_end > 0):
            raise GridError('T must be finite and > 0, got {!r}'.format(
                self.t_end))
        if isinstance(self.n_steps, bool) or not isinstance(
                self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise GridError('n_steps must be an integer >= 1, got {!r}'.format(
                self.n_steps))
        object.__setattr__(self, 't_end', float(self.t_end))
        object.__setattr__(self, 'n_steps', int(self.n_steps))

    @property
    def t_start(self):
        return 0.0

    @property
    def dt(self):
        return self.t_end / self.n_steps

    @cached_property
    def nodes(self):
        # i / n is correctly rounded, so nested grids share node values
        return _frozen(self.t_end * (np.arange(self.n_steps + 1)
                                     / self.n_steps))

    def coarsen(self, factor):
        check_factor(self, factor)
        return TimeGrid(self.t_end, self.n_steps // factor)

    def index_of(self, t):
        """Index of the node closest to time t, which must lie in [0, T]."""
        if not 0 <= t <= self.t_end:
            raise GridError('t = {} outside [0, {}]'.format(t, self.t_end))
        return int(round(t / self.dt))


def check_factor(grid, factor):
    if isinstance(factor, bool) or not isinstance(
            factor, (int, np.integer)) or factor < 1:
        raise GridError('factor must be an integer >= 1, got {!r}'.format(
            factor))
    if grid.n_steps % factor:
        raise GridError('factor {} does not divide n_steps = {}'.format(
            factor, grid.n_steps))


@dataclass(frozen=True, eq=False)
class NoisePath:
    """One realization of the Brownian motion and the Poisson jumps.

    Fields:
        grid: TimeGrid the Brownian motion is sampled on
        w: Brownian motion at the n_steps + 1 nodes, w[0] = 0
        jump_times: strictly increasing times in (0, T]
        jump_marks: marks in R0, aligned with jump_times
        intensity: the lam used to sample the jumps
        seed, stream_id: the substream key (stream_id is the path index)

    """

    grid: TimeGrid
    w: np.ndarray
    jump_times: np.ndarray
    jump_marks: np.ndarray
    intensity: float
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        w = _frozen(self.w)
        times = _frozen(self.jump_times)
        marks = _frozen(self.jump_marks)
        if w.shape != (self.grid.n_steps + 1,):
            raise NoiseError('w must hold n_steps + 1 = {} values'.format(
                self.grid.n_steps + 1))
        if times.shape != marks.shape or times.ndim != 1:
            raise NoiseError('jump times and marks must align')
        object.__setattr__(self, 'w', w)
        object.__setattr__(self, 'jump_times', times)
        object.__setattr__(self, 'jump_marks', marks)

    @cached_property
    def dB(self):
        return _frozen(np.diff(self.w))

    @property
    def jumps(self):
        return list(zip(self.jump_times.tolist(), self.jump_marks.tolist()))

    @property
    def n_jumps(self):
        return self.jump_times.size

    @property
    def terminal(self):
        return self.w[-1]

    @cached_property
    def jump_steps(self):
        """Step index of each jump under the (t_i, t_{i+1}] convention."""
        steps = np.searchsorted(self.grid.nodes, self.jump_times, 'left') - 1
        steps = np.clip(steps, 0, self.grid.n_steps - 1)
        steps.setflags(write=False)
        return steps

    def __len__(self):
        return self.grid.n_steps


def from_increments(grid, dB, jump_times=(), jump_marks=(), intensity=0.0,
                    seed=0, stream_id=0):
    """Build a NoisePath from explicit increments and jumps."""
    dB = np.asarray(dB, dtype=float)
    w = np.concatenate(([0.0], np.cumsum(dB)))
    return NoisePath(grid, w, np.asarray(jump_times, dtype=float),
                     np.asarray(jump_marks, dtype=float), float(intensity),
                     seed, stream_id)


def sample_noise(grid, lam, mark_sampler, seed, path_index):
    """Sample the noise of path ``path_index`` of run ``seed``.

    Args:
        grid (TimeGrid): sampling grid.
        lam (float): jump intensity, >= 0.
        mark_sampler (callable): ``(rng, size) -> marks``.
        seed (int): run seed.
        path_index (int): path number; also the stream id.

    Returns:
        NoisePath: identical arguments give a bit-identical path.

    Raises:
        NoiseError: lam < 0 or not finite.
        GridError: grid is not a TimeGrid.
    """

    if not isinstance(grid, TimeGrid):
        raise GridError('grid must be a TimeGrid')
    if not math.isfinite(lam) or lam < 0:
        raise NoiseError('lam must be finite and >= 0, got {}'.format(lam))

    n = grid.n_steps
    brownian = substream(seed, path_index, Purpose.BROWNIAN)
    dB = math.sqrt(grid.dt) * standard_normals(brownian, n)
    w = np.concatenate(([0.0], np.cumsum(dB)))

    count = 0
    if lam > 0:
        counter = substream(seed, path_index, Purpose.JUMP_COUNT)
        count = int(counter.poisson(lam * grid.t_end))

    if count:
        clock = substream(seed, path_index, Purpose.JUMP_TIMES)
        # 1 - U lies in (0, 1]
        times = np.sort(grid.t_end * (1.0 - clock.random(count)))
        marks = np.asarray(mark_sampler(
            substream(seed, path_index, Purpose.MARKS), count), dtype=float)
    else:
        times = np.empty(0)
        marks = np.empty(0)

    logger.debug('Sampled noise path %d of seed %d with %d jumps', path_index,
                 seed, count)
    return NoisePath(grid, w, times, marks, float(lam), seed, path_index)


def coarsen(path, factor):
    """View ``path`` on the grid with ``n_steps / factor`` steps.

    Coarse increments are the sums of the fine increments they cover; the
    jump list is unchanged. ``factor == 1`` returns ``path`` itself.

    Raises:
        GridError: factor does not divide n_steps.
    """

    check_factor(path.grid, factor)
    if factor == 1:
        return path
    return NoisePath(path.grid.coarsen(factor), path.w[::factor],
                     path.jump_times, path.jump_marks, path.intensity,
                     path.seed, path.stream_id)
