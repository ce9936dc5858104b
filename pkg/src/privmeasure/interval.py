"""Private measures on finite subsets of [0, 1] and on the whole interval.

The discrete core perturbs the weights of an ordered point set by superregular
noise and projects the resulting signed measure back onto probability measures
in the W1 sense. The interval mechanism wraps the core with quantization onto a
uniform net of ``floor(alpha)`` points.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ResourceError
from .haar import SuperregularNoise, potential_gap, build_haar, log2_exact, sample_noise
from .measures import Net, WeightedMeasure, build_net, quantize
from .rng import as_generator

MAX_PROJECTION_CELLS = 1 << 26
_TIE_TOL = 1e-12


def noise_length(n):
    """Smallest power of two >= n, as ``(L, 2**L)``."""
    L = max(0, math.ceil(math.log2(n))) if n > 1 else 0
    return L, 1 << L


def perturb_weights(weights, alpha, rng):
    """Add the first ``len(weights)`` increments of a ``2**L``-step superregular walk.

    For ``n`` not a power of two the walk is drawn on the next power of two and
    truncated: a marginal of a regular density is regular with the same constant.
    """
    if not alpha > 0:
        raise ArgumentError(f"alpha must be positive, got {alpha!r}")
    weights = np.asarray(weights, dtype=np.float64)
    L, _ = noise_length(len(weights))
    noise = sample_noise(L, alpha, as_generator(rng))
    return weights + noise.u[: len(weights)], noise


def _ordered_line_support(measure):
    x = measure.space.line_coords()[measure.support]
    if np.any(np.diff(x) < 0):
        raise ArgumentError("support must be sorted by coordinate")
    return x


def perturb_signed(mu, alpha, rng):
    """Signed measure with weights ``mu_i + U_i`` on the (sorted) support of ``mu``."""
    _ordered_line_support(mu)
    signed, _ = perturb_weights(mu.weights, alpha, rng)
    return WeightedMeasure(mu.space, mu.support, signed)


def projection_objective(cum, targets, gaps):
    """``sum_k gap_k |c_k - t_k|`` over the first ``n-1`` cumulative sums."""
    cum = np.asarray(cum, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    return float(np.sum(np.asarray(gaps)[: len(cum) - 1] * np.abs(cum[:-1] - targets[:-1])))


def project_cumulative(targets, gaps):
    """Best monotone cumulative vector for the weighted-l1 CDF objective.

    Minimises ``sum_{k<n} gaps_k |c_k - targets_k|`` subject to
    ``0 <= c_1 <= ... <= c_n = 1`` and returns the lexicographically smallest
    minimiser. A minimiser with values in ``{0, 1} U clip(targets)`` always
    exists, so the search runs over that finite set by dynamic programming on
    suffix costs, then walks forward taking the smallest feasible optimal value.
    """
    targets = np.asarray(targets, dtype=np.float64)
    n = len(targets)
    if n == 0:
        raise ArgumentError("empty support")
    out = np.ones(n)
    if n == 1:
        return out
    w = np.asarray(gaps, dtype=np.float64)[: n - 1]
    if np.any(w < 0):
        raise ArgumentError("gaps must be nonnegative")
    total = w.sum()
    w = w / total if total > 0 else w
    t = targets[: n - 1]
    values = np.unique(np.concatenate([[0.0, 1.0], np.clip(t, 0.0, 1.0)]))
    k = len(values)
    if (n - 1) * k > MAX_PROJECTION_CELLS:
        raise ResourceError(f"projection table {(n - 1)} x {k} too large")
    g = np.empty((n - 1, k))
    h_next = np.zeros(k)
    for i in range(n - 2, -1, -1):
        g[i] = w[i] * np.abs(values - t[i]) + h_next
        h_next = np.minimum.accumulate(g[i][::-1])[::-1]
    lo = 0
    for i in range(n - 1):
        row = g[i, lo:]
        best = row.min()
        lo += int(np.flatnonzero(row <= best + _TIE_TOL)[0])
        out[i] = values[lo]
    return out


def project_to_probability(nu):
    """Probability measure on the support of ``nu`` closest to it in W1."""
    if nu.support.size == 0:
        raise ArgumentError("empty support")
    x = _ordered_line_support(nu)
    gaps = np.diff(np.append(x, max(1.0, x[-1])))
    cum = project_cumulative(np.cumsum(nu.weights), gaps)
    return WeightedMeasure(nu.space, nu.support, np.diff(cum, prepend=0.0))


def private_discrete(weights, positions, alpha, rng):
    """Perturb-and-project on ordered ``positions``. Returns ``(signed, projected, noise)``."""
    positions = np.asarray(positions, dtype=np.float64)
    if np.any(np.diff(positions) < 0):
        raise ArgumentError("positions must be nondecreasing")
    signed, noise = perturb_weights(weights, alpha, rng)
    gaps = np.diff(positions)
    projected = np.diff(project_cumulative(np.cumsum(signed), gaps), prepend=0.0)
    return signed, projected, noise


@dataclass(frozen=True)
class IntervalMechanismResult:
    output: WeightedMeasure
    signed_intermediate: WeightedMeasure
    noise: SuperregularNoise
    net: Net

    @property
    def input_space(self):
        return self.net.space


def uniform_net_points(n):
    """Midpoints ``(k - 1/2)/n``: a ``1/(2n)``-net of [0, 1] with n points."""
    return (np.arange(n) + 0.5) / n


def interval_net(space, alpha):
    """The ``floor(alpha)``-point midpoint net, appended to a copy of a line ``space``."""
    if not alpha >= 2:
        raise ArgumentError(f"alpha must be at least 2, got {alpha!r}")
    n = int(math.floor(alpha))
    extended, centers = space.extended(uniform_net_points(n))
    return build_net(extended, 0.5 / n, centers=centers)


def private_measure_interval(mu, alpha, rng):
    """alpha-metrically private measure for a probability measure on [0, 1].

    Uses ``n = floor(alpha)`` net points. The space of ``mu`` is extended with
    the net, so the output and ``mu.lift(result.net.space)`` can be compared.
    """
    if not alpha >= 2:
        raise ArgumentError(f"alpha must be at least 2, got {alpha!r}")
    mu.require_probability()
    x = mu.space.line_coords()
    if x.size and (x.min() < 0 or x.max() > 1):
        raise ArgumentError("space coordinates must lie in [0, 1]")
    net = interval_net(mu.space, alpha)
    space = net.space
    mu_q = quantize(mu.lift(space), net)
    positions = space.line_coords()[net.centers]
    signed, projected, noise = private_discrete(mu_q.weights, positions, alpha, rng)
    return IntervalMechanismResult(
        output=WeightedMeasure(space, net.centers, projected),
        signed_intermediate=WeightedMeasure(space, net.centers, signed),
        noise=noise,
        net=net,
    )


def log_density_ratio(eta, mu, mu_prime, alpha):
    """``log`` of the density ratio of the perturbed measure at ``eta`` under two inputs.

    All three are weight vectors over the same ``2**L`` ordered atoms. By
    regularity the result is at most ``alpha * TV(mu, mu_prime)``.
    """
    eta, mu, mu_prime = (np.asarray(v, dtype=np.float64) for v in (eta, mu, mu_prime))
    h = build_haar(log2_exact(len(eta)))
    x = 0.5 * alpha * (eta - mu)
    y = 0.5 * alpha * (eta - mu_prime)
    return float(potential_gap(x, y, h))


