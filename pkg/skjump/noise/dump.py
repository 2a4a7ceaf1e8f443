"""Binary dump of a NoisePath, for debugging.

Little-endian layout::

    magic     4 bytes   b'SKJN'
    header    <d q d Q q q   T, n_steps, lam, seed, stream_id, n_jumps
    dB        n_steps x <f8
    jumps     n_jumps x (time <f8, mark <f8)

A loaded path rebuilds its node values by cumulative summation of dB.
"""
import struct

import numpy as np

from .exceptions import NoiseError
from .paths import TimeGrid, from_increments

MAGIC = b'SKJN'
HEADER = struct.Struct('<dqdQqq')


def dump_noise(path, stream):
    """Write ``path`` to a binary file object."""
    stream.write(MAGIC)
    stream.write(HEADER.pack(path.grid.t_end, path.grid.n_steps,
                             path.intensity, path.seed, path.stream_id,
                             path.n_jumps))
    stream.write(np.asarray(path.dB, dtype='<f8').tobytes())
    jumps = np.column_stack((path.jump_times, path.jump_marks))
    stream.write(jumps.astype('<f8').tobytes())


def _read(stream, size):
    data = stream.read(size)
    if len(data) != size:
        raise NoiseError('Truncated noise dump')
    return data


def load_noise(stream):
    """Read a NoisePath written by dump_noise."""
    if _read(stream, len(MAGIC)) != MAGIC:
        raise NoiseError('Not a noise dump (bad magic)')
    t_end, n_steps, lam, seed, stream_id, n_jumps = HEADER.unpack(
        _read(stream, HEADER.size))
    dB = np.frombuffer(_read(stream, 8 * n_steps), dtype='<f8')
    jumps = np.frombuffer(_read(stream, 16 * n_jumps), dtype='<f8')
    jumps = jumps.reshape(n_jumps, 2)
    return from_increments(TimeGrid(t_end, n_steps), dB, jumps[:, 0],
                           jumps[:, 1], lam, seed, stream_id)
