"""Stacks of same-grid noise paths for path-parallel integration."""
from functools import cached_property

import numpy as np

from .exceptions import NoiseError
from .paths import coarsen
from .streams import Purpose, substream


def per_path_marks(path, mark_sampler, purpose, per_step):
    """Marks of one path for a per-step Monte Carlo average.

    Drawn from the (seed, stream_id, purpose) substream with shape
    ``(n_steps, per_step)``, so a path gets the same marks alone or in a
    batch.
    """
    gen = substream(path.seed, path.stream_id, purpose)
    marks = mark_sampler(gen, (path.grid.n_steps, per_step))
    return np.asarray(marks, dtype=float)


class NoiseBatch:
    """A list of NoisePaths on one grid, laid out for vectorized kernels.

    Fields:
        paths: the NoisePaths, in path-index order
        grid, intensity: shared by every path
        dB: (n_paths, n_steps) increments
        jump_path, jump_time, jump_mark, jump_step: flat jump arrays, path
            major, time sorted within each path
        jump_offsets: jumps of path k are ``offsets[k]:offsets[k + 1]``

    Methods:
        schedule: per step, groups of flat jump indices touching distinct
            paths, in the order the jumps occur within their path
        coarsen: the batch on a coarser grid
        compensator_marks, malliavin_marks: per-path mark draws

    """

    def __init__(self, paths):
        paths = list(paths)
        if not paths:
            raise NoiseError('A noise batch needs at least one path')
        grid = paths[0].grid
        intensity = paths[0].intensity
        for path in paths:
            if path.grid != grid:
                raise NoiseError('All paths of a batch must share one grid')
            if path.intensity != intensity:
                raise NoiseError('All paths of a batch must share one lam')

        self.paths = paths
        self.grid = grid
        self.intensity = intensity
        self.dB = np.stack([path.dB for path in paths])

        counts = np.array([path.n_jumps for path in paths], dtype=np.int64)
        self.jump_offsets = np.concatenate(([0], np.cumsum(counts)))
        self.jump_path = np.repeat(np.arange(len(paths)), counts)
        if counts.sum():
            self.jump_time = np.concatenate([p.jump_times for p in paths])
            self.jump_mark = np.concatenate([p.jump_marks for p in paths])
            self.jump_step = np.concatenate([p.jump_steps for p in paths])
        else:
            self.jump_time = np.empty(0)
            self.jump_mark = np.empty(0)
            self.jump_step = np.empty(0, dtype=np.int64)

    def __len__(self):
        return len(self.paths)

    @property
    def n_jumps(self):
        return self.jump_time.size

    @cached_property
    def jump_rank(self):
        """Position of each jump among the jumps of its path and step."""
        n = self.jump_time.size
        if not n:
            return np.empty(0, dtype=np.int64)
        key = self.jump_path * self.grid.n_steps + self.jump_step
        starts = np.concatenate(([True], key[1:] != key[:-1]))
        first = np.maximum.accumulate(np.where(starts, np.arange(n), 0))
        return np.arange(n) - first

    @cached_property
    def schedule(self):
        """dict: step -> list of flat jump index arrays, one per rank."""
        if not self.n_jumps:
            return {}
        order = np.lexsort((self.jump_path, self.jump_rank, self.jump_step))
        step = self.jump_step[order]
        rank = self.jump_rank[order]
        cut = np.flatnonzero((step[1:] != step[:-1]) | (rank[1:] != rank[:-1]))
        groups = np.split(order, cut + 1)
        schedule = {}
        for group in groups:
            schedule.setdefault(int(self.jump_step[group[0]]), []).append(group)
        return schedule

    @cached_property
    def step_jumps(self):
        """dict: step -> flat indices of every jump in that step."""
        if not self.n_jumps:
            return {}
        order = np.argsort(self.jump_step, kind='stable')
        step = self.jump_step[order]
        cut = np.flatnonzero(step[1:] != step[:-1])
        return {int(self.jump_step[group[0]]): group
                for group in np.split(order, cut + 1)}

    def coarsen(self, factor):
        if factor == 1:
            return self
        return NoiseBatch([coarsen(path, factor) for path in self.paths])

    def compensator_marks(self, mark_sampler, per_step):
        return np.stack([
            per_path_marks(path, mark_sampler, Purpose.COMPENSATOR, per_step)
            for path in self.paths])

    def malliavin_marks(self, mark_sampler, per_step):
        return np.stack([
            per_path_marks(path, mark_sampler, Purpose.MALLIAVIN_MARKS,
                           per_step)
            for path in self.paths])
