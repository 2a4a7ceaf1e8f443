"""Monte Carlo estimators over ensembles of trajectories.

Every estimator takes plain sample arrays (or trajectories) and returns an
EstimateWithError or a float. Samples are never reordered in a way that
affects the result beyond floating point summation order, which is fixed by
the caller's path order.
"""
import math
from dataclasses import dataclass

import numpy as np

from skjump.conf import sim_settings

from .exceptions import DegenerateNormError, EstimatorError


@dataclass(frozen=True)
class EstimateWithError:
    """A Monte Carlo mean with its standard error.

    Fields:
        value: sample mean
        std_error: sample standard deviation / sqrt(n), 0 for one sample
        n: number of samples

    """

    value: float
    std_error: float
    n: int

    @classmethod
    def from_samples(cls, samples):
        samples = _samples(samples, 'samples')
        n = samples.size
        std_error = 0.0
        if n > 1:
            std_error = float(np.std(samples, ddof=1) / math.sqrt(n))
        return cls(value=float(np.mean(samples)), std_error=std_error, n=n)


def _samples(values, name):
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EstimatorError('{} is empty'.format(name))
    if not np.all(np.isfinite(values)):
        raise EstimatorError('{} holds non-finite values'.format(name))
    return values


class Ecdf:
    """Empirical distribution function F(x) = #{samples <= x} / n."""

    def __init__(self, samples):
        self.values = np.sort(_samples(samples, 'samples'))
        self.n = self.values.size

    def __len__(self):
        return self.n

    def __call__(self, x):
        counts = np.searchsorted(self.values, x, side='right')
        return counts / self.n

    @property
    def breakpoints(self):
        return np.unique(self.values)


def ks_distance(a, b):
    """Exact two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.

    Both ECDFs are step functions jumping at the pooled samples, so the sup
    is attained at one of them; evaluating there also covers the left
    limits, which equal the value at the previous breakpoint.
    """
    first, second = Ecdf(a), Ecdf(b)
    support = np.concatenate((first.values, second.values))
    gap = np.abs(first(support) - second(support))
    return float(min(gap.max(), 1.0))


def ks_noise_floor(n_paths):
    """KS_COEFFICIENT / sqrt(n): the size of KS between two equal laws."""
    return sim_settings.KS_COEFFICIENT / math.sqrt(n_paths)


def dkw_band(n, alpha=0.05):
    """Half-width of the DKW confidence band of an n-sample ECDF.

    P(sup |F_n - F| > band) <= alpha.
    """
    if n < 1:
        raise EstimatorError('n must be >= 1, got {}'.format(n))
    if not 0 < alpha < 1:
        raise EstimatorError('alpha must lie in (0, 1), got {}'.format(alpha))
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def _check_p(p, minimum):
    if not (math.isfinite(p) and p >= minimum):
        raise EstimatorError('p must be >= {}, got {}'.format(minimum, p))


def lp_error(pairs, p):
    """E|X^eps - X|^p over coupled pairs.

    Args:
        pairs (array): shape (n, 2), rows (x_eps, x) of the same path.
        p (float): moment order, >= 1.

    Returns:
        EstimateWithError

    Raises:
        EstimatorError: fewer than two pairs, bad shape or non-finite data.
    """

    _check_p(p, 1)
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise EstimatorError('pairs must have shape (n, 2)')
    if pairs.shape[0] < 2:
        raise EstimatorError(
            'lp_error needs at least two pairs, got {}'.format(pairs.shape[0]))
    gaps = _samples(pairs[:, 0] - pairs[:, 1], 'pairs')
    return EstimateWithError.from_samples(np.abs(gaps) ** p)


def _ensemble(trajectories):
    # a TrajectoryBatch or a single Trajectory carry their nodes in x
    x = getattr(trajectories, 'x', None)
    if x is None:
        if isinstance(trajectories, np.ndarray):
            x = trajectories
        else:
            x = [getattr(t, 'x', t) for t in trajectories]
    array = np.asarray(x, dtype=float)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2 or array.size == 0:
        raise EstimatorError('Need a non-empty ensemble of paths')
    return array


def moment_sup(trajectories, p):
    """E[max_i |x_i|^p] over an ensemble.

    ``trajectories`` may be a TrajectoryBatch, a list of Trajectory objects
    or a (paths, nodes) array.
    """
    _check_p(p, 1)
    paths = _ensemble(trajectories)
    return EstimateWithError.from_samples(np.max(np.abs(paths), axis=1) ** p)


def inverse_norm_moment(norms2, p):
    """E[(||D X_t||^2)^{-p}] from squared norm samples.

    Raises:
        DegenerateNormError: a sample is <= 0.
    """
    _check_p(p, 0)
    norms2 = _samples(norms2, 'norms2')
    bad = np.flatnonzero(norms2 <= 0)
    if bad.size:
        raise DegenerateNormError(
            'Squared norm {} of sample {} is not positive; the model does '
            'not diffuse'.format(norms2[bad[0]], int(bad[0])))
    return EstimateWithError.from_samples(norms2 ** -p)
