"""Counter-based deterministic random numbers for parallel Monte Carlo.

Every variate is a pure function of ``(seed, stream, step)``, built from the
splitmix64 avalanche.  Streams index independent objects (walks, sample
points), steps index draws within a stream.  Because no generator state is
carried, results are independent of execution order, batching, and worker
count: the same coordinates always yield the same number.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


def mix64(x):
    """splitmix64 finalizer, elementwise on uint64 arrays."""
    x = np.asarray(x, dtype=np.uint64).copy()
    with np.errstate(over="ignore"):
        x ^= x >> np.uint64(30)
        x *= _M1
        x ^= x >> np.uint64(27)
        x *= _M2
        x ^= x >> np.uint64(31)
    return x


def uniform01(seed, stream, step):
    """Uniform variate in [0, 1) at integer coordinates (seed, stream, step).

    ``stream`` and ``step`` may be scalars or uint64-compatible arrays; they
    broadcast.  The top 53 bits of the mixed counter feed the mantissa, so
    every value is an exact double in [0, 1).
    """
    s = np.uint64(int(seed) & _MASK)
    with np.errstate(over="ignore"):
        h = mix64(s + _GOLDEN * np.asarray(stream, dtype=np.uint64))
        h = mix64(h + _GOLDEN * np.asarray(step, dtype=np.uint64))
    u = (h >> np.uint64(11)).astype(np.float64) * _INV53
    return u if u.ndim else float(u)


def derive_seed(seed, salt):
    """Child seed for an independent purpose, labelled by an integer salt."""
    with np.errstate(over="ignore"):
        h = mix64(np.uint64(int(seed) & _MASK) + _GOLDEN * np.uint64(int(salt) & _MASK))
    return int(h)


def uniform_angles(seed, n, step=0):
    """n angles uniform on [0, 2*pi), one per stream index 0..n-1."""
    u = uniform01(seed, np.arange(n, dtype=np.uint64), step)
    return 2.0 * np.pi * u
