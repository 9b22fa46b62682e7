"""Counter-based random streams.

Every variate is a pure function of a 64-bit stream key and an integer
site, so any sub-rectangle of a field can be regenerated on demand and
independently of the rest.  Keys are derived from the master seed and a
tuple of labels (strings or integers).

The mixing function is the splitmix64 finalizer.  A uniform is built from
the top 53 bits of the mixed word and shifted by half an ulp so that it
lies strictly inside (0, 1); unit exponentials are ``-log(u)``.
"""
import hashlib

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_C_ROW = 0xC2B2AE3D27D4EB4F
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64_py(z):
    """Reference (pure Python) splitmix64 finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _label_word(label):
    if isinstance(label, (bool, np.bool_)):
        label = int(label)
    if isinstance(label, (int, np.integer)):
        return int(label) & MASK64
    if isinstance(label, float):
        label = repr(label)
    digest = hashlib.blake2b(str(label).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream_key(seed, *labels):
    """Derive a 64-bit stream key from a master seed and labels."""
    key = mix64_py(int(seed) & MASK64)
    for label in labels:
        key = mix64_py(key ^ mix64_py(_label_word(label) + _GOLDEN))
    return key


def derive_seed(seed, *labels):
    """Seed for a derived task (e.g. a replica), as a plain int."""
    return stream_key(seed, "derive", *labels)


def site_uniform_py(key, i, j):
    """Reference implementation of :func:`site_uniform`."""
    h = mix64_py(key ^ ((i & MASK64) * _GOLDEN & MASK64))
    h = mix64_py(h ^ ((j & MASK64) * _C_ROW & MASK64))
    return ((h >> 11) + 0.5) * 2.0 ** -53


# numba versions ------------------------------------------------------------

_U_GOLDEN = np.uint64(_GOLDEN)
_U_ROW = np.uint64(_C_ROW)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0 ** -53


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True)
def site_uniform(key, i, j):
    h = mix64(key ^ (np.uint64(i) * _U_GOLDEN))
    h = mix64(h ^ (np.uint64(j) * _U_ROW))
    return (np.float64(h >> _S11) + 0.5) * _INV53


@njit(cache=True)
def site_exp(key, i, j):
    return -np.log(site_uniform(key, i, j))


@njit(cache=True)
def exp_block(key, i0, j0, n1, n2):
    """Unit exponentials for sites (i0 + r, j0 + c), r < n1, c < n2."""
    out = np.empty((n1, n2))
    for r in range(n1):
        for c in range(n2):
            out[r, c] = site_exp(key, i0 + r, j0 + c)
    return out


@njit(cache=True)
def uniform_line(key, i0, n):
    """Uniforms indexed by a single integer (second coordinate fixed at 0)."""
    out = np.empty(n)
    for r in range(n):
        out[r] = site_uniform(key, i0 + r, 0)
    return out


def as_key(key):
    return np.uint64(int(key) & MASK64)
