from dataclasses import dataclass
from typing import Optional

import numpy as np

from noise.paths import TimeGrid

from .exceptions import NonFiniteStateError

LIMIT = 'limit'
DIRECT = 'direct'
EXPONENTIAL = 'exponential'


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A discretized path of X (limit) or X^eps.

    Fields:
        grid: TimeGrid of the recorded nodes
        x: positions at the n_steps + 1 nodes, x[0] = x0
        y: velocities (direct SK scheme only)
        epsilon: the small mass, None for the limit process
        pre_jump: limit only, the state X_{tau-} each jump saw, aligned with
            the jumps of the driving path
        scheme: 'limit', 'direct' or 'exponential'
        seed, stream_id: key of the driving noise path

    """

    grid: TimeGrid
    x: np.ndarray
    y: Optional[np.ndarray] = None
    epsilon: Optional[float] = None
    pre_jump: Optional[np.ndarray] = None
    scheme: str = LIMIT
    seed: int = 0
    stream_id: int = 0

    @property
    def is_limit(self):
        return self.epsilon is None

    @property
    def terminal(self):
        return self.x[-1]


@dataclass(eq=False)
class TrajectoryBatch:
    """Trajectories of a NoiseBatch, one row per path.

    ``abort_step[k]`` is the first step at which path k went non-finite, or
    -1. Aborted rows are kept (they hold NaN or inf from that step on).
    """

    grid: TimeGrid
    x: np.ndarray
    scheme: str
    seeds: np.ndarray
    stream_ids: np.ndarray
    abort_step: np.ndarray
    epsilon: Optional[float] = None
    y: Optional[np.ndarray] = None
    pre_jump: Optional[np.ndarray] = None
    jump_offsets: Optional[np.ndarray] = None

    def __len__(self):
        return self.x.shape[0]

    @property
    def aborted(self):
        return self.abort_step >= 0

    @property
    def n_aborts(self):
        return int(np.count_nonzero(self.aborted))

    def trajectory(self, k):
        """Row k as a Trajectory; raises NonFiniteStateError if it aborted."""
        if self.abort_step[k] >= 0:
            raise NonFiniteStateError(
                'Path {} went non-finite at step {}'.format(
                    self.stream_ids[k], self.abort_step[k]),
                path_index=int(self.stream_ids[k]),
                step=int(self.abort_step[k]))
        pre_jump = None
        if self.pre_jump is not None:
            start, stop = self.jump_offsets[k], self.jump_offsets[k + 1]
            pre_jump = self.pre_jump[start:stop]
        return Trajectory(
            grid=self.grid,
            x=self.x[k],
            y=None if self.y is None else self.y[k],
            epsilon=self.epsilon,
            pre_jump=pre_jump,
            scheme=self.scheme,
            seed=int(self.seeds[k]),
            stream_id=int(self.stream_ids[k]),
        )


@dataclass(frozen=True, eq=False)
class CoupledPair:
    """Limit and SK trajectories driven by one noise realization.

    Both trajectories live on the grid of ``path``.
    """

    limit: Trajectory
    sk: Trajectory
    path: object

    @property
    def gap(self):
        return self.sk.x - self.limit.x
