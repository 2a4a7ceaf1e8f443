"""Run planning done before any path is simulated."""
import logging
import math
from dataclasses import dataclass

from integrate.schemes import direct_substep_factor
from integrate.trajectories import DIRECT
from skjump.conf import sim_settings
from stats.estimators import ks_noise_floor

from .serializers import MALLIAVIN_CHECK

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseFloorPlan:
    """Verdict of plan_noise_floor.

    Fields:
        ok: signal >= margin * noise_floor
        signal: predicted smallest KS distance, sqrt(eps_min)
        noise_floor: KS_COEFFICIENT / sqrt(n_paths)
        margin: NOISE_FLOOR_MARGIN
        n_paths: the path count that was checked
        required_n: smallest n_paths that passes

    """

    ok: bool
    signal: float
    noise_floor: float
    margin: float
    n_paths: int
    required_n: int

    def describe(self):
        verdict = 'ok' if self.ok else 'too few paths'
        return ('noise floor {}: signal sqrt(eps_min) = {:.4g}, {:g} x floor '
                '= {:.4g} at n_paths = {}, required n_paths = {}'.format(
                    verdict, self.signal, self.margin,
                    self.margin * self.noise_floor, self.n_paths,
                    self.required_n))


def plan_noise_floor(epsilons, n_paths):
    """Check that the smallest KS signal clears the two-sample noise floor.

    The predicted KS distance at eps is of order sqrt(eps); the statistic of
    two same-law samples of size n fluctuates at KS_COEFFICIENT / sqrt(n).

    Args:
        epsilons (iterable): the run's small masses, not empty.
        n_paths (int): paths per ensemble.

    Returns:
        NoiseFloorPlan
    """

    epsilons = list(epsilons)
    if not epsilons:
        raise ValueError('plan_noise_floor needs at least one epsilon')
    margin = float(sim_settings.NOISE_FLOOR_MARGIN)
    coefficient = float(sim_settings.KS_COEFFICIENT)
    signal = math.sqrt(min(epsilons))
    floor = ks_noise_floor(n_paths)
    required = math.ceil((margin * coefficient / signal) ** 2)
    plan = NoiseFloorPlan(
        ok=signal >= margin * floor,
        signal=signal,
        noise_floor=floor,
        margin=margin,
        n_paths=n_paths,
        required_n=max(required, 1),
    )
    logger.debug(plan.describe())
    return plan


def plan_substeps(config):
    """Substep factor of every epsilon and the finest factor of the run.

    The direct SK scheme runs each epsilon on the grid refined by its own
    power-of-two factor; noise is sampled once on the finest of those grids
    and coarsened for everything else. The exponential scheme needs no
    refinement.

    Returns:
        tuple: ({epsilon: factor}, finest factor)
    """

    if config.sk_scheme != DIRECT or not config.epsilons:
        return {eps: 1 for eps in config.epsilons}, 1
    dt = config.grid.dt
    factors = {eps: direct_substep_factor(dt, eps) for eps in config.epsilons}
    finest = max(factors.values())
    return factors, finest


def plan_resolution(config):
    """Warning for a malliavin_check grid coarser than its smallest epsilon.

    The SK fields relax on the time scale eps; with dt > eps_min the field
    gap at the small epsilons is dominated by the discretization and the
    fitted slope overshoots.

    Returns:
        str or None: the warning, None when the grid resolves every epsilon
    """

    if config.experiment != MALLIAVIN_CHECK or not config.epsilons:
        return None
    dt = config.grid.dt
    eps_min = min(config.epsilons)
    if dt <= eps_min:
        return None
    return ('dt = {:.4g} exceeds eps_min = {:g}; Malliavin field gaps at the '
            'smallest epsilons are under-resolved, use n_steps >= {}'.format(
                dt, eps_min, math.ceil(config.T / eps_min)))
