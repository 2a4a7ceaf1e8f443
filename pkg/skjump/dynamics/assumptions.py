"""Finite-sample probing of the standing assumptions (H1) and (H2).

Every inequality is turned into a ratio ``lhs / rhs`` evaluated at random
probe points; an inequality holds on the probe set when its worst ratio is
at most ``1 + TOL_ASSUME``. Integrals against nu are estimated as
``lam * mean`` over ``ASSUMPTION_MARKS`` marks per probe.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from skjump.conf import sim_settings

from .exceptions import DerivativeMismatch, LogFloorViolation, ModelError

logger = logging.getLogger(__name__)

H1_LIPSCHITZ = ('lipschitz_b_sigma', 'lipschitz_c')
H1_GROWTH = ('growth',)
H2_DERIVATIVES = ('db_dx', 'd2b_dx2', 'dsigma_dx', 'd2sigma_dx2')
H2_JUMP_MOMENTS = ('dc_dx_p2', 'dc_dx_p4', 'd2c_dx2_p2', 'd2c_dx2_p4',
                   'dc_dx_lipschitz', 'dc_dz_growth', 'dc_dz_lipschitz')


@dataclass(frozen=True)
class ProbeBox:
    """Ranges the probes are drawn from.

    Marks are not boxed; they come from the model's own mark sampler so the
    nu-integrals are estimated against the right law.
    """

    x_min: float = -10.0
    x_max: float = 10.0
    t_min: float = 0.0
    t_max: float = 1.0

    def __post_init__(self):
        values = (self.x_min, self.x_max, self.t_min, self.t_max)
        if not all(math.isfinite(v) for v in values):
            raise ModelError('Probe box bounds must be finite.')
        if not self.x_min < self.x_max:
            raise ModelError('Probe box needs x_min < x_max.')
        if not self.t_min <= self.t_max:
            raise ModelError('Probe box needs t_min <= t_max.')

    def draw(self, rng, n):
        t = rng.uniform(self.t_min, self.t_max, n)
        x = rng.uniform(self.x_min, self.x_max, n)
        y = rng.uniform(self.x_min, self.x_max, n)
        return t, x, y


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of validate_assumptions.

    Fields:
        h1_lipschitz_ok, h1_growth_ok, h2_deriv_bounded_ok, h2_jump_moments_ok:
            whether each assumption group held on every probe
        worst_ratio: the largest ratio over the Lipschitz, derivative and
            jump-moment inequalities. Growth is left out: 1 + x^2 makes
            its ratio approach 1 for any bounded model.
        probe_count: number of (t, x, y) probes
        ratios: worst ratio per individual inequality

    """

    h1_lipschitz_ok: bool
    h1_growth_ok: bool
    h2_deriv_bounded_ok: bool
    h2_jump_moments_ok: bool
    worst_ratio: float
    probe_count: int
    ratios: Dict[str, float] = field(default_factory=dict)

    @property
    def all_ok(self):
        return (self.h1_lipschitz_ok and self.h1_growth_ok
                and self.h2_deriv_bounded_ok and self.h2_jump_moments_ok)

    def as_row(self):
        return {
            'h1_lipschitz_ok': self.h1_lipschitz_ok,
            'h1_growth_ok': self.h1_growth_ok,
            'h2_deriv_bounded_ok': self.h2_deriv_bounded_ok,
            'h2_jump_moments_ok': self.h2_jump_moments_ok,
            'worst_ratio': self.worst_ratio,
            'probe_count': self.probe_count,
        }


def _values(fn, *args):
    return np.asarray(fn(*args), dtype=float) * np.ones(
        np.broadcast(*args).shape)


def _central_difference(fn, point, step, shift):
    return (fn(*shift(point + step)) - fn(*shift(point - step))) / (2 * step)


def check_derivatives(model, probe_box=None, n_probes=100, rng_seed=0):
    """Compare every derivative field against a central finite difference.

    Args:
        model (ModelSpec): model to check.
        probe_box (ProbeBox): where to probe, default ``ProbeBox()``.
        n_probes (int): number of random probe points.
        rng_seed (int): seed of the probe generator.

    Returns:
        float: the largest relative error seen, ``|d - fd| / max(1, |d|)``.

    Raises:
        DerivativeMismatch: some field exceeds ``FD_REL_TOL``.
    """

    if n_probes < 1:
        raise ModelError('n_probes must be >= 1')
    probe_box = probe_box or ProbeBox()
    rng = np.random.default_rng(rng_seed)
    t, x, _ = probe_box.draw(rng, n_probes)
    h = np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(x))

    checks = [
        ('db_dx', model.db_dx, model.b),
        ('d2b_dx2', model.d2b_dx2, model.db_dx),
        ('dsigma_dx', model.dsigma_dx, model.sigma),
        ('d2sigma_dx2', model.d2sigma_dx2, model.dsigma_dx),
    ]
    errors = {}
    for name, derivative, parent in checks:
        exact = _values(derivative, t, x)
        approx = ((_values(parent, t, x + h) - _values(parent, t, x - h))
                  / (2 * h))
        errors[name] = exact, approx

    # c is never evaluated without jumps
    if model.has_jumps:
        z = np.asarray(model.mark_sampler(rng, n_probes), dtype=float)
        hz = np.cbrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(z))
        jump_checks = [
            ('dc_dx', model.dc_dx, model.c, 'x'),
            ('dc_dz', model.dc_dz, model.c, 'z'),
        ]
        if model.d2c_dx2 is not None:
            jump_checks.append(('d2c_dx2', model.d2c_dx2, model.dc_dx, 'x'))
        for name, derivative, parent, wrt in jump_checks:
            exact = _values(derivative, x, z)
            if wrt == 'x':
                approx = (_values(parent, x + h, z)
                          - _values(parent, x - h, z)) / (2 * h)
            else:
                approx = (_values(parent, x, z + hz)
                          - _values(parent, x, z - hz)) / (2 * hz)
            errors[name] = exact, approx

    worst = 0.0
    tolerance = sim_settings.FD_REL_TOL
    for name, (exact, approx) in errors.items():
        relative = np.abs(exact - approx) / np.maximum(1.0, np.abs(exact))
        max_error = float(np.max(relative))
        if not max_error <= tolerance:
            raise DerivativeMismatch(
                '{} disagrees with a finite difference of its parent '
                '(relative error {:.3g} > {:g})'.format(
                    name, max_error, tolerance),
                field=name, max_error=max_error)
        worst = max(worst, max_error)

    logger.debug('Derivative check of %s passed, max relative error %.3g',
                 model, worst)
    return worst


def _worst(values):
    return float(np.max(values)) if np.size(values) else 0.0


def validate_assumptions(model, probe_box=None, n_probes=1000, rng_seed=0):
    """Probe (H1) and (H2) at random points.

    Args:
        model (ModelSpec): model to probe.
        probe_box (ProbeBox): state and time ranges, default ``ProbeBox()``.
        n_probes (int): number of (t, x, y) probes, at least 1.
        rng_seed (int): seed; equal seeds give equal reports.

    Returns:
        AssumptionReport

    Raises:
        ModelError: n_probes < 1.
        DerivativeMismatch: derivative fields are inconsistent.
        LogFloorViolation: 1 + dc_dx <= DELTA_LOG at some probe.
    """

    if n_probes < 1:
        raise ModelError('n_probes must be >= 1')
    probe_box = probe_box or ProbeBox()
    check_derivatives(model, probe_box, rng_seed=rng_seed)

    K = model.lipschitz_K
    lam = model.jump_intensity
    rng = np.random.default_rng(rng_seed)
    t, x, y = probe_box.draw(rng, n_probes)
    dx = x - y
    distinct = dx != 0.0
    ratios = {}

    db = _values(model.b, t, x) - _values(model.b, t, y)
    ds = _values(model.sigma, t, x) - _values(model.sigma, t, y)
    ratios['lipschitz_b_sigma'] = _worst(
        ((db ** 2 + ds ** 2) / (K * np.where(distinct, dx, 1.0) ** 2))[distinct])

    growth = _values(model.b, t, x) ** 2 + _values(model.sigma, t, x) ** 2

    for name in H2_DERIVATIVES:
        ratios[name] = _worst(np.abs(_values(getattr(model, name), t, x)) / K)

    if model.has_jumps:
        marks = np.asarray(model.mark_sampler(
            rng, (n_probes, sim_settings.ASSUMPTION_MARKS)), dtype=float)
        xs, ys = x[:, None], y[:, None]
        dcx = _values(model.dc_dx, xs, marks)

        floor = sim_settings.DELTA_LOG
        below = np.any(1.0 + dcx <= floor, axis=1)
        if below.any():
            index = int(np.argmax(below))
            value = float(np.min(1.0 + dcx[index]))
            raise LogFloorViolation(
                '1 + dc_dx = {:.3g} <= {:g} at probe {} (x = {:g})'.format(
                    value, floor, index, x[index]),
                index=index, value=value)

        cx = _values(model.c, xs, marks)
        cy = _values(model.c, ys, marks)
        lipschitz_c = lam * np.mean((cx - cy) ** 2, axis=1)
        ratios['lipschitz_c'] = _worst(
            (lipschitz_c / (K * np.where(distinct, dx, 1.0) ** 2))[distinct])
        growth = growth + lam * np.mean(cx ** 2, axis=1)

        for p in (2, 4):
            ratios['dc_dx_p{}'.format(p)] = _worst(
                lam * np.mean(np.abs(dcx) ** p, axis=1) / K)
        if model.d2c_dx2 is not None:
            d2cx = _values(model.d2c_dx2, xs, marks)
            for p in (2, 4):
                ratios['d2c_dx2_p{}'.format(p)] = _worst(
                    lam * np.mean(np.abs(d2cx) ** p, axis=1) / K)

        dcy = _values(model.dc_dx, ys, marks)
        ratios['dc_dx_lipschitz'] = _worst((
            lam * np.mean((dcx - dcy) ** 2, axis=1)
            / (K * np.where(distinct, dx, 1.0) ** 2))[distinct])

        dczx = _values(model.dc_dz, xs, marks)
        dczy = _values(model.dc_dz, ys, marks)
        ratios['dc_dz_growth'] = _worst(
            np.abs(dczx) / (K * (1.0 + np.abs(xs))))
        ratios['dc_dz_lipschitz'] = _worst((
            np.max(np.abs(dczx - dczy), axis=1)
            / (K * np.abs(np.where(distinct, dx, 1.0))))[distinct])
    else:
        for name in ('lipschitz_c',) + H2_JUMP_MOMENTS:
            ratios[name] = 0.0

    ratios['growth'] = _worst(growth / (K * (1.0 + x ** 2)))
    for name in H2_JUMP_MOMENTS:
        ratios.setdefault(name, 0.0)

    limit = 1.0 + sim_settings.TOL_ASSUME

    def holds(names):
        return all(ratios[name] <= limit for name in names)

    report = AssumptionReport(
        h1_lipschitz_ok=holds(H1_LIPSCHITZ),
        h1_growth_ok=holds(H1_GROWTH),
        h2_deriv_bounded_ok=holds(H2_DERIVATIVES),
        h2_jump_moments_ok=holds(H2_JUMP_MOMENTS),
        worst_ratio=max(value for name, value in ratios.items()
                        if name not in H1_GROWTH),
        probe_count=n_probes,
        ratios=ratios,
    )
    logger.info('Assumptions for %s: worst ratio %.6g over %d probes',
                model, report.worst_ratio, n_probes)
    return report
