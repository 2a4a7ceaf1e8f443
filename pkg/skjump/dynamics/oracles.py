"""Closed-form reference values for the built-in models."""
import math

from .builtins import UNIFORM_MARK_SECOND_MOMENT


def _noise_power(s, gamma, lam):
    return s ** 2 + lam * gamma ** 2 * UNIFORM_MARK_SECOND_MOMENT


def linear_ou_second_moment(a, s, gamma, lam, x0, t):
    """E[X_t^2] of the linear_jump_ou limit process.

    Solves dm/dt = -2a m + s^2 + lam gamma^2 E[z^2], m(0) = x0^2.
    """
    q = _noise_power(s, gamma, lam)
    if a == 0:
        return x0 ** 2 + q * t
    decay = math.exp(-2 * a * t)
    return x0 ** 2 * decay - q * math.expm1(-2 * a * t) / (2 * a)


def linear_ou_stationary_variance(a, s, gamma, lam):
    """Limit of Var X_t as t -> infinity; needs a > 0."""
    if a <= 0:
        raise ValueError('Stationary variance needs a > 0.')
    return _noise_power(s, gamma, lam) / (2 * a)


def linear_ou_brownian_norm(a, s, t):
    """||D^B X_t||^2 = int_0^t s^2 e^{-2a(t-r)} dr for linear_jump_ou."""
    if a == 0:
        return s ** 2 * t
    return -s ** 2 * math.expm1(-2 * a * t) / (2 * a)


def deterministic_sk_position(x0, y0, epsilon, t):
    """X^eps_t of the second-order system with b = sigma = c = 0."""
    return x0 - epsilon * y0 * math.expm1(-t / epsilon)


def brownian_norm_reference(model_name, params, t):
    """||D^B X_t||^2 for built-ins where it is deterministic, else None."""
    if model_name == 'pure_brownian':
        return float(t)
    if model_name == 'linear_jump_ou':
        return linear_ou_brownian_norm(params['a'], params['s'], t)
    return None


def strong_gap_reference(model_name, params, epsilon, t):
    """X^eps_t - X_t for deterministic_relax, else None."""
    if model_name != 'deterministic_relax':
        return None
    x0 = params.get('x0', 0.0)
    return deterministic_sk_position(x0, params.get('y0', 0.0), epsilon,
                                     t) - x0
