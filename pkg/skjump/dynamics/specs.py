"""Jump-diffusion model specification.

A model is the coefficient triple (b, sigma, c) of

    dX = b(t, X) dt + sigma(t, X) dB + int c(X-, z) N~(dt, dz)

together with the derivatives the Malliavin equations need, the finite
intensity measure nu = lam * mu and the initial state (x0, y0) of the
second-order system. Friction is fixed to 1 and the state is scalar.

Every coefficient must accept numpy arrays and broadcast like a ufunc:
``b(t, x)`` with scalar ``t`` and array ``x``, ``c(x, z)`` with arrays of
matching shape.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

from .exceptions import ModelError

Coefficient = Callable[[float, Any], Any]
JumpCoefficient = Callable[[Any, Any], Any]
MarkMean = Callable[[Any], Any]
MarkSampler = Callable[..., Any]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Immutable description of a jump-diffusion model.

    Fields:
        b, sigma: drift and diffusion, (t, x) -> real
        c: jump coefficient, (x, z) -> real
        db_dx, d2b_dx2, dsigma_dx, d2sigma_dx2: state derivatives of b, sigma
        dc_dx, dc_dz: partials of c
        jump_intensity: total mass lam of nu
        mark_sampler: (rng, size=None) -> mark(s) drawn from mu = nu / lam
        lipschitz_K: the constant K of (H1)/(H2)
        x0, y0: initial position and velocity
        d2c_dx2: optional second state derivative of c
        c_mean, dc_dx_mean: optional analytic mu-means of c(x, .) and
            dc_dx(x, .); compensators fall back to Monte Carlo without them
        name, params: provenance for built-in models

    """

    b: Coefficient
    sigma: Coefficient
    c: JumpCoefficient
    db_dx: Coefficient
    d2b_dx2: Coefficient
    dsigma_dx: Coefficient
    d2sigma_dx2: Coefficient
    dc_dx: JumpCoefficient
    dc_dz: JumpCoefficient
    jump_intensity: float
    mark_sampler: MarkSampler
    lipschitz_K: float
    x0: float = 0.0
    y0: float = 0.0
    d2c_dx2: Optional[JumpCoefficient] = None
    c_mean: Optional[MarkMean] = None
    dc_dx_mean: Optional[MarkMean] = None
    name: str = 'custom'
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        lam = self.jump_intensity
        if not math.isfinite(lam) or lam < 0:
            raise ModelError(
                'jump_intensity must be finite and >= 0, got {}'.format(lam))
        if not math.isfinite(self.lipschitz_K) or self.lipschitz_K <= 0:
            raise ModelError(
                'lipschitz_K must be finite and > 0, got {}'.format(
                    self.lipschitz_K))
        for attr in ('x0', 'y0'):
            if not math.isfinite(getattr(self, attr)):
                raise ModelError('{} must be finite'.format(attr))

    @property
    def has_jumps(self):
        return self.jump_intensity > 0

    def __str__(self):
        return self.name
