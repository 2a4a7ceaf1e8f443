"""Built-in test models with known analytic behaviour.

    linear_jump_ou       b = -a x, sigma = s, c = gamma z, marks U[-1,1]\\{0}
    deterministic_relax  b = sigma = c = 0 (both equations are ODEs)
    pure_brownian        b = 0, sigma = 1, c = 0
    pure_jump            b = sigma = 0, c = z, marks U[-1,1]\\{0}

"""
import logging

import numpy as np

from .exceptions import ModelError, UnknownModelError
from .serializers import (LinearJumpOUParamsSerializer, ModelParamsSerializer,
                          PureJumpParamsSerializer)
from .specs import ModelSpec

logger = logging.getLogger(__name__)

# E[z^2] for z ~ U[-1, 1]
UNIFORM_MARK_SECOND_MOMENT = 1.0 / 3.0


def uniform_marks(rng, size=None):
    """Draw marks uniformly from [-1, 1] without the origin.

    Args:
        rng (numpy.random.Generator): source of randomness.
        size (int or tuple): output shape, ``None`` for a single float.

    Returns:
        float or numpy.ndarray: nonzero marks.
    """

    if size is None:
        z = 1.0 - 2.0 * rng.random()
        while z == 0.0:
            z = 1.0 - 2.0 * rng.random()
        return float(z)

    z = 1.0 - 2.0 * rng.random(size)
    zero = z == 0.0
    while zero.any():
        z[zero] = 1.0 - 2.0 * rng.random(int(zero.sum()))
        zero = z == 0.0
    return z


def _ones(*args):
    return np.ones(np.broadcast(*[np.asarray(a, dtype=float)
                                  for a in args]).shape)


def constant(value):
    """(t, x) -> value, broadcast to the shape of x."""
    return lambda t, x: value * _ones(x)


def jump_constant(value):
    """(x, z) -> value, broadcast to the shape of x and z together."""
    return lambda x, z: value * _ones(x, z)


def mean_constant(value):
    """x -> value, broadcast to the shape of x."""
    return lambda x: value * _ones(x)


def _linear_jump_ou(params):
    a = params['a']
    s = params['s']
    gamma = params['gamma']
    lam = params['lam']
    # |z| <= 1 bounds every Monte Carlo estimate of the nu-integrals
    exact_K = max(a ** 2, abs(a), s ** 2 + lam * gamma ** 2, abs(gamma))

    return dict(
        b=lambda t, x: -a * np.asarray(x, dtype=float),
        sigma=constant(s),
        c=lambda x, z: gamma * np.asarray(z, dtype=float) * _ones(x),
        db_dx=constant(-a),
        d2b_dx2=constant(0.0),
        dsigma_dx=constant(0.0),
        d2sigma_dx2=constant(0.0),
        dc_dx=jump_constant(0.0),
        dc_dz=jump_constant(gamma),
        d2c_dx2=jump_constant(0.0),
        c_mean=mean_constant(0.0),
        dc_dx_mean=mean_constant(0.0),
        jump_intensity=lam,
        mark_sampler=uniform_marks,
        exact_K=exact_K,
    )


def _deterministic_relax(params):
    return dict(
        b=constant(0.0),
        sigma=constant(0.0),
        c=jump_constant(0.0),
        db_dx=constant(0.0),
        d2b_dx2=constant(0.0),
        dsigma_dx=constant(0.0),
        d2sigma_dx2=constant(0.0),
        dc_dx=jump_constant(0.0),
        dc_dz=jump_constant(0.0),
        d2c_dx2=jump_constant(0.0),
        c_mean=mean_constant(0.0),
        dc_dx_mean=mean_constant(0.0),
        jump_intensity=0.0,
        mark_sampler=uniform_marks,
        exact_K=1.0,
    )


def _pure_brownian(params):
    spec = _deterministic_relax(params)
    spec['sigma'] = constant(1.0)
    return spec


def _pure_jump(params):
    lam = params['lam']
    spec = _deterministic_relax(params)
    spec.update(
        c=lambda x, z: np.asarray(z, dtype=float) * _ones(x),
        dc_dz=jump_constant(1.0),
        jump_intensity=lam,
        exact_K=max(1.0, lam),
    )
    return spec


BUILTIN_MODELS = {
    'linear_jump_ou': (LinearJumpOUParamsSerializer, _linear_jump_ou),
    'deterministic_relax': (ModelParamsSerializer, _deterministic_relax),
    'pure_brownian': (ModelParamsSerializer, _pure_brownian),
    'pure_jump': (PureJumpParamsSerializer, _pure_jump),
}


def builtin_model(name, params=None):
    """Build a fully populated ModelSpec for a built-in model.

    Args:
        name (str): one of ``BUILTIN_MODELS``.
        params (dict): model parameters; see the serializers in
            ``dynamics.serializers`` for names and defaults.

    Returns:
        ModelSpec

    Raises:
        UnknownModelError: ``name`` is not a built-in model.
        ModelError: parameters are missing or invalid. ``errors`` holds the
            per-parameter messages.
    """

    try:
        serializer_class, builder = BUILTIN_MODELS[name]
    except KeyError:
        raise UnknownModelError(
            'Unknown model {!r}; expected one of {}'.format(
                name, ', '.join(sorted(BUILTIN_MODELS))))

    serializer = serializer_class(data=dict(params or {}))
    if not serializer.is_valid():
        errors = {key: [str(m) for m in messages]
                  for key, messages in serializer.errors.items()}
        raise ModelError(
            'Invalid parameters for model {!r}: {}'.format(name, errors),
            errors=errors)

    values = dict(serializer.validated_data)
    spec = builder(values)
    exact_K = spec.pop('exact_K')
    K = values.get('K', exact_K)
    logger.debug('Built model %s with K=%g', name, K)

    return ModelSpec(
        lipschitz_K=K,
        x0=values['x0'],
        y0=values['y0'],
        name=name,
        params=values,
        **spec
    )


__all__ = ['BUILTIN_MODELS', 'ModelError', 'builtin_model', 'uniform_marks',
           'UNIFORM_MARK_SECOND_MOMENT']
