"""Counter-based random substreams.

Every draw made anywhere in skjump comes from a generator keyed by
``(seed, path_index, purpose)``. Philox is counter based, so distinct keys
give non-overlapping streams and no generator state is ever shared between
paths or workers.
"""
from enum import IntEnum

import numpy as np
from scipy.special import ndtri

from .exceptions import NoiseError

_MANTISSA = 2 ** 53


class Purpose(IntEnum):
    BROWNIAN = 0
    JUMP_COUNT = 1
    JUMP_TIMES = 2
    MARKS = 3
    COMPENSATOR = 4
    MALLIAVIN_MARKS = 5


def substream(seed, path_index, purpose):
    """Return the generator for one (seed, path_index, purpose) key.

    Args:
        seed (int): run seed, 0 <= seed < 2**64.
        path_index (int): path number, >= 0.
        purpose (Purpose): what the draws are for.

    Returns:
        numpy.random.Generator
    """

    if seed < 0 or path_index < 0:
        raise NoiseError('seed and path_index must be >= 0, got {}, {}'.format(
            seed, path_index))
    key = np.random.SeedSequence([int(seed), int(path_index), int(purpose)])
    return np.random.Generator(np.random.Philox(key))


def open_uniforms(gen, n):
    """n uniforms on the open interval (0, 1), 53-bit resolution."""
    k = gen.integers(0, _MANTISSA, n, dtype=np.int64)
    return (k.astype(float) + 0.5) / _MANTISSA


def standard_normals(gen, n):
    """n standard normals by inverse CDF of the open uniforms."""
    return ndtri(open_uniforms(gen, n))
