"""Seeded counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, trial)`` so that Monte-Carlo
trials can be run in any order, or concurrently, and still reproduce bit for bit.
"""

import numpy as np

_SEED_MASK = (1 << 64) - 1


def stream(seed, trial=0):
    """Return an independent generator for ``trial`` under ``seed``."""
    key = np.array([int(seed) & _SEED_MASK, int(trial) & _SEED_MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng):
    """Accept a Generator, an int seed or None and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return stream(rng)


def open_uniform(rng, size):
    """Uniforms on the open interval (0, 1) built from 64-bit draws.

    The top 53 bits of each word are used and offset by half a unit so neither
    endpoint can occur; this keeps the Laplace inverse CDF finite.
    """
    words = rng.integers(0, 1 << 64, size=size, dtype=np.uint64, endpoint=False)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def laplace(rng, scale, size):
    """Laplace(scale) draws via inverse CDF, P(|X| > t) = exp(-t / scale)."""
    u = open_uniform(rng, size) - 0.5
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
