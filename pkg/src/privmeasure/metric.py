"""Private measures on finite metric spaces and on the unit cube.

The input is quantized onto a delta-net, the net is folded onto an interval
along a shortcut MST tour, the interval core runs on the folded positions
rescaled to [0, 1], and the result is read back on the net centres through the
inverse of the folding bijection.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .folding import FoldingMap, fold, tsp_integral_bound
from .haar import SuperregularNoise
from .interval import log_density_ratio, private_discrete
from .measures import Net, WeightedMeasure, build_net, cube_grid, quantize, tv_distance

_LOG_FLOOR = math.exp(1.5)
MAX_DELTA_STEPS = 40


@dataclass(frozen=True)
class MetricMechanismResult:
    output: WeightedMeasure
    folding: FoldingMap
    net: Net
    signed_intermediate: WeightedMeasure
    noise: SuperregularNoise
    diagnostics: dict


def default_net(space, delta):
    """Analytic grid for cube spaces (appended to the space), greedy net otherwise."""
    if not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta!r}")
    if space.kind == "cube":
        centers, radius = cube_grid(space.d, delta)
        extended, idx = space.extended(centers)
        return build_net(extended, radius, centers=idx)
    return build_net(space, delta)


def accuracy_bound(alpha, delta, covering, tsp_bound, c=1.0):
    """``2 delta + (c/alpha) log^{3/2}(N(delta)) * TSP bound``."""
    return 2.0 * delta + c / alpha * math.log(max(covering, 1)) ** 1.5 * tsp_bound


def _check_delta(space, delta):
    if not (delta > 0 and math.isfinite(delta)):
        raise ArgumentError(f"delta must be positive and finite, got {delta!r}")
    limit = 1.0 if space.kind == "cube" else space.diam
    if limit > 0 and delta > limit:
        raise ArgumentError(f"delta={delta} exceeds the diameter {limit}")


def private_measure_metric(mu, alpha, delta, rng, net=None):
    """alpha-metrically private measure for a probability measure ``mu``.

    ``net`` overrides the default delta-net; it must live on ``mu.space`` or on
    an extension of it. The output is a probability measure on the net centres.
    """
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ArgumentError(f"alpha must be positive and finite, got {alpha!r}")
    _check_delta(mu.space, delta)
    mu.require_probability()
    if net is None:
        net = default_net(mu.space, delta)
    space = net.space
    mu_q = quantize(mu if mu.space is space else mu.lift(space), net)

    folding = fold(space, net.centers)
    slot = np.searchsorted(net.centers, folding.order)
    weights = mu_q.weights[slot]
    signed, projected, noise = private_discrete(weights, folding.unit_positions(), alpha, rng)

    out = np.empty(len(net))
    out[slot] = projected
    sig = np.empty(len(net))
    sig[slot] = signed
    tsp_bound = tsp_integral_bound(space, delta, net.centers)
    diagnostics = {
        "alpha": float(alpha),
        "delta": float(delta),
        "net_radius": net.radius,
        "net_size": len(net),
        "tour_length": folding.total,
        "tsp_bound": tsp_bound,
        # the final normalisation charges 2*delta for quantization at scale delta
        "accuracy_bound": accuracy_bound(alpha, delta, len(net), tsp_bound),
    }
    return MetricMechanismResult(
        output=WeightedMeasure(space, net.centers, out),
        folding=folding,
        net=net,
        signed_intermediate=WeightedMeasure(space, net.centers, sig),
        noise=noise,
        diagnostics=diagnostics,
    )


def _generic_delta(space, alpha):
    diam = space.diam
    if diam == 0:
        return 1.0
    best, best_val = None, math.inf
    n_distinct = len(np.unique(space.coords, axis=0)) if space.coords is not None else None
    for i in range(MAX_DELTA_STEPS):
        delta = diam * 2.0 ** -i
        net_size = space.covering_number(delta)
        val = accuracy_bound(alpha, delta, net_size, tsp_integral_bound(space, delta))
        if val < best_val * (1 - 1e-12):
            best, best_val = delta, val
        if net_size >= (n_distinct or space.n):
            break
    return best


def choose_delta(kind, alpha, d=None, space=None):
    """Net scale for a space of the given kind.

    ``interval`` and the 1-dimensional cube use ``1/floor(alpha)``. The cube in
    ``d >= 2`` dimensions uses ``(log^{3/2} alpha / alpha)^{1/d}``, with the log
    held at its turning point ``alpha = e^{3/2}`` below it so the scale never
    grows with alpha, capped at 1/2. ``generic`` minimises the accuracy bound
    over ``delta = diam * 2**-i``, preferring the larger delta on ties.
    """
    if not alpha >= 2:
        raise ArgumentError(f"alpha must be at least 2, got {alpha!r}")
    if kind == "interval" or (kind == "cube" and d == 1):
        return 1.0 / math.floor(alpha)
    if kind == "cube":
        if d is None or int(d) != d or d < 1:
            raise ArgumentError(f"cube dimension must be a positive integer, got {d!r}")
        a = max(alpha, _LOG_FLOOR)
        return min(0.5, (math.log(a) ** 1.5 / a) ** (1.0 / d))
    if kind == "generic":
        if space is None:
            raise ArgumentError("generic delta selection needs the space")
        return _generic_delta(space, alpha)
    raise ArgumentError(f"unknown space kind {kind!r}")


def delta_for_space(space, alpha):
    """choose_delta dispatched on the kind and dimension of ``space``."""
    if space.kind == "cube":
        return choose_delta("cube", alpha, d=space.d)
    return choose_delta("generic", alpha, space=space)


def audit_neighbors(mu, mu_prime, alpha, delta, rng, net=None):
    """Privacy check of one run on ``mu`` against the neighbouring input ``mu_prime``.

    The log ratio of the densities of the signed intermediate under the two
    inputs is evaluated at the realised value, on the full power-of-two noise
    vector (inputs padded with zeros). Returns ``(log_ratio, allowed)`` where
    ``allowed = alpha * TV(mu, mu_prime)``.
    """
    res = private_measure_metric(mu, alpha, delta, rng, net=net)
    space = res.net.space
    slot = np.searchsorted(res.net.centers, res.folding.order)
    n_full = res.noise.n

    def padded(m):
        w = quantize(m if m.space is space else m.lift(space), res.net).weights[slot]
        return np.concatenate([w, np.zeros(n_full - len(w))])

    base = padded(mu)
    eta = base + res.noise.u
    ratio = log_density_ratio(eta, base, padded(mu_prime), alpha)
    return ratio, alpha * tv_distance(mu, mu_prime)
