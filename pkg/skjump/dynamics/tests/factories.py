"""Hand-built models for tests."""
import numpy as np

from dynamics.builtins import uniform_marks
from dynamics.specs import ModelSpec


def zero(t, x):
    return np.zeros_like(np.asarray(x, dtype=float))


def jump_zero(x, z):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(z)).shape)


def custom_model(**overrides):
    """A ModelSpec with every coefficient zero unless overridden."""
    fields = dict(
        b=zero, sigma=zero, c=jump_zero,
        db_dx=zero, d2b_dx2=zero, dsigma_dx=zero, d2sigma_dx2=zero,
        dc_dx=jump_zero, dc_dz=jump_zero,
        jump_intensity=0.0, mark_sampler=uniform_marks, lipschitz_K=1.0,
    )
    fields.update(overrides)
    return ModelSpec(**fields)


def quadratic_drift_model():
    return custom_model(
        b=lambda t, x: np.asarray(x, dtype=float) ** 2,
        db_dx=lambda t, x: 2 * np.asarray(x, dtype=float),
        d2b_dx2=lambda t, x: np.full_like(np.asarray(x, dtype=float), 2.0),
    )


def geometric_model(beta, varsigma, x0=1.0):
    """b = beta x, sigma = varsigma x, no jumps."""
    return custom_model(
        b=lambda t, x: beta * np.asarray(x, dtype=float),
        sigma=lambda t, x: varsigma * np.asarray(x, dtype=float),
        db_dx=lambda t, x: np.full_like(np.asarray(x, dtype=float), beta),
        dsigma_dx=lambda t, x: np.full_like(np.asarray(x, dtype=float),
                                            varsigma),
        x0=x0,
    )


def shifted_jump_model(lam):
    """c(x, z) = z + 1 with no analytic mark mean, so compensators use
    Monte Carlo marks."""
    return custom_model(
        c=lambda x, z: np.asarray(z, dtype=float) + np.ones_like(
            np.asarray(x, dtype=float)),
        dc_dz=lambda x, z: np.ones(np.broadcast(
            np.asarray(x), np.asarray(z)).shape),
        jump_intensity=lam,
        lipschitz_K=max(1.0, 4 * lam),
    )
