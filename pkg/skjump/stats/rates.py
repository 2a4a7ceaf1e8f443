"""Convergence rates from (epsilon, error) pairs.

The rate is the slope of ln(err) against ln(eps) by ordinary least
squares, fitted with scipy.stats.linregress.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import EstimatorError


@dataclass(frozen=True, eq=False)
class RateFit:
    """Least-squares fit ln(err) = intercept + slope * ln(eps).

    Fields:
        slope, intercept: fitted coefficients
        r_squared: coefficient of determination, in [0, 1]
        n_points: number of (eps, err) pairs
        residuals: ln(err) minus the fitted line, in input order
        slope_se, intercept_se: standard errors of the coefficients

    """

    slope: float
    intercept: float
    r_squared: float
    n_points: int
    residuals: np.ndarray
    slope_se: float
    intercept_se: float

    def predict(self, epsilon):
        return math.exp(self.intercept) * np.asarray(epsilon) ** self.slope


def fit_rate(points):
    """Fit the power law err ~ C eps^slope.

    Args:
        points (iterable): (epsilon, err) pairs.

    Returns:
        RateFit

    Raises:
        EstimatorError: fewer than 3 points, repeated epsilon, or a
            nonpositive or non-finite epsilon or err.
    """

    points = np.asarray(list(points), dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise EstimatorError('points must be (epsilon, err) pairs')
    if points.shape[0] < 3:
        raise EstimatorError(
            'A rate fit needs at least 3 points, got {}'.format(
                points.shape[0]))
    epsilon, err = points[:, 0], points[:, 1]
    if not np.all(np.isfinite(points)):
        raise EstimatorError('epsilon and err must be finite')
    if np.any(epsilon <= 0):
        raise EstimatorError('epsilon must be > 0')
    if np.any(err <= 0):
        raise EstimatorError(
            'err must be > 0; a zero error means the experiment degenerated')
    if np.unique(epsilon).size != epsilon.size:
        raise EstimatorError('epsilon values must be distinct')

    x, y = np.log(epsilon), np.log(err)
    result = stats.linregress(x, y)
    residuals = y - (result.intercept + result.slope * x)
    return RateFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(min(max(result.rvalue ** 2, 0.0), 1.0)),
        n_points=int(x.size),
        residuals=residuals,
        slope_se=float(result.stderr),
        intercept_se=float(result.intercept_stderr),
    )
