"""Randomised checks of the noise density: coefficient sparsity and regularity."""

import numpy as np

from .haar import analyze, build_haar, potential_gap
from .rng import laplace, stream

AUDIT_SLACK = 1e-9
_CHUNK = 1 << 20


def _sample_vectors(rng, count, n):
    """Mix of dense Laplace vectors, sparse vectors and point indicators."""
    x = laplace(rng, 1.0, (count, n)) * rng.exponential(1.0, (count, 1))
    kind = rng.integers(0, 3, count)
    sparse = kind == 1
    x[sparse] *= rng.random((int(sparse.sum()), n)) < 2.0 / n
    ind = np.flatnonzero(kind == 2)
    x[ind] = 0.0
    x[ind, rng.integers(0, n, ind.size)] = rng.choice([-1.0, 1.0], ind.size)
    return x


def sparsity_audit(levels, count, seed, slack=AUDIT_SLACK):
    """Check ``|lambda(x)|_1 <= (L+2)|x|_1`` on random vectors for each ``L``.

    Returns ``{L: (violations, worst |lambda(x)|_1 / |x|_1)}``.
    """
    out = {}
    for L in levels:
        n = 1 << L
        rng = stream(seed, L)
        bad, worst = 0, 0.0
        step = max(1, _CHUNK // n)
        for lo in range(0, count, step):
            x = _sample_vectors(rng, min(step, count - lo), n)
            lhs = np.abs(analyze(x)).sum(axis=1)
            norm = np.abs(x).sum(axis=1)
            bad += int(np.count_nonzero(lhs > (L + 2) * norm + slack))
            nz = norm > 0
            if nz.any():
                worst = max(worst, float((lhs[nz] / norm[nz]).max()))
        out[L] = (bad, worst)
    return out


def regularity_audit(levels, pairs, seed, slack=AUDIT_SLACK, fault_scale=1.0):
    """Check ``log f(x) - log f(y) <= |x - y|_1`` for the noise density on random pairs.

    Pairs are ``y = x`` (a quarter of them), ``y = x + c e_k`` and independent
    vectors. ``fault_scale`` multiplies the computed gap; values above 1 make a
    deliberately broken density for negative controls. Returns a report dict
    with per-level counts and the first violating pair, if any.
    """
    report = {"levels": {}, "violations": 0, "witness": None}
    for L in levels:
        n = 1 << L
        h = build_haar(L)
        rng = stream(seed, (1 << 32) | L)
        stats = {"pairs": pairs, "violations": 0, "max_ratio": 0.0, "identical_pairs": 0}
        step = max(1, _CHUNK // n)
        for lo in range(0, pairs, step):
            size = min(step, pairs - lo)
            x, y, same = _sample_pairs(rng, size, n)
            gap = potential_gap(x, y, h) * fault_scale
            bound = np.abs(x - y).sum(axis=1)
            bad = np.flatnonzero((gap > bound + slack) | (same & (gap != 0)))
            pos = bound > 0
            if pos.any():
                stats["max_ratio"] = max(stats["max_ratio"], float((gap[pos] / bound[pos]).max()))
            stats["identical_pairs"] += int(same.sum())
            stats["violations"] += int(bad.size)
            if bad.size and report["witness"] is None:
                i = bad[0]
                report["witness"] = {
                    "L": L, "x": x[i].tolist(), "y": y[i].tolist(),
                    "gap": float(gap[i]), "bound": float(bound[i]),
                }
        report["levels"][L] = stats
        report["violations"] += stats["violations"]
    report["passed"] = report["violations"] == 0
    return report


def _sample_pairs(rng, count, n):
    x = _sample_vectors(rng, count, n)
    y = x.copy()
    kind = rng.integers(0, 4, count)
    bump = np.flatnonzero(kind == 1)
    y[bump, rng.integers(0, n, bump.size)] += laplace(rng, 1.0, bump.size)
    fresh = np.flatnonzero(kind >= 2)
    y[fresh] = _sample_vectors(rng, fresh.size, n)
    return x, y, kind == 0
