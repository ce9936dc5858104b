"""Synthetic datasets from private measures."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ArgumentError
from .measures import FiniteMetricSpace, WeightedMeasure
from .metric import delta_for_space, private_measure_metric

_FLOOR_SLACK = 1e-9


@dataclass(frozen=True)
class SyntheticDataset:
    """``m`` point indices into ``space`` (repetitions allowed)."""

    space: FiniteMetricSpace
    points: np.ndarray
    provenance: dict

    @property
    def m(self):
        return len(self.points)

    def measure(self):
        return WeightedMeasure.empirical(self.space, self.points)

    def coords(self):
        if self.space.coords is None:
            raise ArgumentError("space has no coordinates")
        return self.space.coords[self.points]


def quantized_counts(weights, m):
    """Integer counts ``floor(m w_i)`` with the shortfall added to the first atom."""
    w = np.asarray(weights, dtype=np.float64)
    counts = np.floor(m * np.clip(w, 0.0, None) + _FLOOR_SLACK).astype(np.int64)
    counts[0] += m - counts.sum()
    if counts[0] < 0:
        raise ArgumentError("weights sum to more than 1")
    return counts


def weights_to_empirical(nu, m):
    """Dataset of size ``m`` whose empirical measure rounds ``nu`` down to multiples of 1/m.

    The atoms are taken in index order and the rounding error lands on the first.
    """
    if int(m) != m or m < 1:
        raise ArgumentError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    nu.require_probability()
    nu = nu.compact()
    counts = quantized_counts(nu.weights, m)
    points = np.repeat(nu.support, counts)
    return SyntheticDataset(nu.space, points, {"m": m, "atoms": len(nu.support)})


def choose_m(r, diam, delta):
    """Smallest ``m >= 1`` with ``r * diam / m <= delta``."""
    if not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta!r}")
    return max(1, math.ceil(r * diam / delta * (1 - 1e-12)))


def empirical_tv(points_x, points_y):
    """Exact TV distance between two empirical measures of the same size, as a Fraction."""
    x = np.asarray(points_x, dtype=np.int64).ravel()
    y = np.asarray(points_y, dtype=np.int64).ravel()
    if len(x) != len(y) or len(x) == 0:
        raise ArgumentError("datasets must be nonempty and of equal size")
    size = int(max(x.max(), y.max())) + 1
    diff = np.bincount(x, minlength=size) - np.bincount(y, minlength=size)
    return Fraction(int(np.abs(diff).sum()), 2 * len(x))


def dp_synthetic_data(space, points, epsilon, delta=None, rng=None):
    """epsilon-differentially private synthetic copy of the dataset ``points``.

    The private measure is run with ``alpha = epsilon * n``; ``delta`` defaults
    to :func:`delta_for_space` at that alpha. The output size is the minimal
    ``m`` that keeps the rounding transport cost below ``delta``.
    """
    points = np.asarray(points, dtype=np.int64).ravel()
    n = len(points)
    if n < 1:
        raise ArgumentError("dataset is empty")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ArgumentError(f"epsilon must be positive and finite, got {epsilon!r}")
    alpha = epsilon * n
    if delta is None:
        delta = delta_for_space(space, alpha)
    mu = WeightedMeasure.empirical(space, points)
    res = private_measure_metric(mu, alpha, delta, rng)
    diam = 1.0 if space.kind == "cube" else space.diam
    m = choose_m(len(res.net), diam, delta)
    synth = weights_to_empirical(res.output, m)
    provenance = {
        "n": n,
        "epsilon": float(epsilon),
        **res.diagnostics,
        "m": m,
    }
    return SyntheticDataset(synth.space, synth.points, provenance)
