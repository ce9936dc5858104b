"""Haar system on the grid [n], n = 2**L, and the superregular noise built on it.

Index layout (0-based ``j``):

* ``j = 0``: the constant function ``1/n`` (level 0).
* ``j = 1``: ``+1/n`` on the first half of the grid, ``-1/n`` on the second (level 0).
* ``2**l <= j < 2**(l+1)`` for ``l >= 1``: the ``p = j - 2**l``-th block of length
  ``n / 2**l`` carries ``+2**l/n`` on its first half and ``-2**l/n`` on its second.

These are the scaled finite differences of the dilated Schauder triangles, so a
level-``l`` function has squared norm ``2**l / n`` and the system is orthogonal
but not orthonormal. Coefficients use the matching normalisation
``lambda_j = (n / 2**l) <psi_j, x>``, which makes the coefficient vector of a
point indicator a sign vector.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ArgumentError, ResourceError
from .rng import as_generator, laplace

MAX_L = 24
MAX_DENSE_L = 13


def _check_L(L):
    if int(L) != L or L < 0:
        raise ArgumentError(f"L must be a nonnegative integer, got {L!r}")
    if L > MAX_L:
        raise ResourceError(f"L={L} exceeds the guard L <= {MAX_L}")
    return int(L)


def log2_exact(n):
    """Return L with 2**L == n, or raise ArgumentError."""
    n = int(n)
    if n < 1 or n & (n - 1):
        raise ArgumentError(f"length {n} is not a power of two")
    return n.bit_length() - 1


def haar_levels(L):
    """Level of every index ``j`` for ``n = 2**L`` functions."""
    n = 1 << L
    levels = np.zeros(n, dtype=np.int64)
    if n > 1:
        j = np.arange(1, n)
        levels[1:] = np.floor(np.log2(j)).astype(np.int64)
    return levels


@dataclass(frozen=True)
class HaarSystem:
    L: int

    @property
    def n(self):
        return 1 << self.L

    @cached_property
    def level(self):
        lv = haar_levels(self.L)
        lv.setflags(write=False)
        return lv

    @cached_property
    def norms_squared(self):
        return 2.0 ** self.level / self.n

    def function(self, j):
        """Values of psi_j on the grid."""
        coeffs = np.zeros(self.n)
        coeffs[j] = 1.0
        return synthesize(coeffs)

    @cached_property
    def functions(self):
        """Dense ``n x n`` array, row ``j`` is psi_j. Only for small L."""
        if self.L > MAX_DENSE_L:
            raise ResourceError(
                f"dense Haar matrix requested for L={self.L} (> {MAX_DENSE_L})"
            )
        m = synthesize(np.eye(self.n))
        m.setflags(write=False)
        return m

    def level_counts(self):
        return np.bincount(self.level, minlength=max(self.L, 1))


def build_haar(L):
    """Construct the Haar system for ``n = 2**L`` grid points."""
    return HaarSystem(_check_L(L))


def synthesize(coeffs):
    """Evaluate ``sum_j coeffs[..., j] psi_j`` on the grid, O(n log n).

    Works on the last axis, so a ``(trials, n)`` array yields ``trials`` vectors.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = coeffs.shape[-1]
    L = log2_exact(n)
    values = coeffs[..., 0:1] / n
    for m in range(L):
        d = coeffs[..., (1 << m):(1 << (m + 1))] * ((1 << m) / n)
        values = np.stack((values + d, values - d), axis=-1).reshape(
            coeffs.shape[:-1] + (1 << (m + 1),)
        )
    return values


def analyze(x):
    """Coefficient vector ``lambda(x)`` on the last axis, O(n log n)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    L = log2_exact(n)
    lead = x.shape[:-1]
    out = np.empty_like(x)
    out[..., 0] = x.sum(axis=-1)
    for m in range(L):
        blocks = x.reshape(lead + (1 << m, 2, n >> (m + 1))).sum(axis=-1)
        out[..., (1 << m):(1 << (m + 1))] = blocks[..., 0] - blocks[..., 1]
    return out


def decompose(x, h):
    """Coefficients of ``x`` in the Haar system ``h``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != h.n:
        raise ArgumentError(f"vector length {x.shape[-1]} does not match n={h.n}")
    return analyze(x)


def decompose_dense(x, h):
    """Reference path through the dense matrix: ``(n/2**l) <psi_j, x>``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != h.n:
        raise ArgumentError(f"vector length {x.shape[-1]} does not match n={h.n}")
    return (h.functions @ x) * (h.n / 2.0 ** h.level)


@dataclass(frozen=True)
class SuperregularNoise:
    L: int
    lam: np.ndarray
    z: np.ndarray
    scale: float

    @property
    def n(self):
        return 1 << self.L

    @property
    def u(self):
        """Scaled increments ``U_i = scale * Z_i``."""
        return self.scale * self.z


def sample_noise(L, alpha, rng):
    """Draw ``Lambda_j ~ Lap(L+2)`` i.i.d. and return the increments they induce.

    ``scale`` is ``2/alpha``, the factor that turns the walk into noise for an
    alpha-metrically private perturbation of a measure.
    """
    L = _check_L(L)
    if not alpha > 0:
        raise ArgumentError(f"alpha must be positive, got {alpha!r}")
    rng = as_generator(rng)
    lam = laplace(rng, L + 2.0, 1 << L)
    z = synthesize(lam)
    lam.setflags(write=False)
    z.setflags(write=False)
    return SuperregularNoise(L=L, lam=lam, z=z, scale=2.0 / alpha)


def sample_walks(L, trials, rng):
    """Unscaled increments for ``trials`` independent walks, shape ``(trials, n)``."""
    L = _check_L(L)
    rng = as_generator(rng)
    lam = laplace(rng, L + 2.0, (trials, 1 << L))
    return synthesize(lam)


def partial_sums(noise):
    """``S_k = U_1 + ... + U_k`` for a noise object or a plain increment vector."""
    u = noise.u if isinstance(noise, SuperregularNoise) else np.asarray(noise, float)
    return np.cumsum(u, axis=-1)


def prefix_coefficients(k, h):
    """``a_kj = <psi_j, 1_[k]>`` for ``k`` in 1..n."""
    if not 1 <= k <= h.n:
        raise ArgumentError(f"k must lie in 1..{h.n}")
    ind = np.zeros(h.n)
    ind[:k] = 1.0
    return analyze(ind) * (2.0 ** h.level / h.n)


def potential_gap(x, y, h):
    """Log density ratio ``log f_Z(x) - log f_Z(y)`` of the noise vector.

    Equals ``(|lambda(y)|_1 - |lambda(x)|_1) / (L+2)``; bounded by ``|x-y|_1``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ArgumentError(f"shape mismatch {x.shape} vs {y.shape}")
    lx = decompose(x, h)
    ly = decompose(y, h)
    return (np.abs(ly).sum(axis=-1) - np.abs(lx).sum(axis=-1)) / (h.L + 2)
