"""Finite metric spaces, weighted measures, distances between them, nets and quantization."""

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ArgumentError, ResourceError

PROB_TOL = 1e-9
MAX_FLOW_SUPPORT = 2000
SSP_AUTO_LIMIT = 64
_CHUNK = 1 << 22


class FiniteMetricSpace:
    """Indexed point set with a distance oracle.

    Either ``coords`` (``(n, d)``, l-infinity metric, which is ``|x-y|`` on the
    line) or an explicit symmetric ``matrix`` is given. ``kind`` is ``"cube"``
    for coordinate spaces inside ``[0,1]^d`` built by :func:`cube_space`, and
    ``"generic"`` otherwise.
    """

    def __init__(self, coords=None, matrix=None, kind=None):
        if (coords is None) == (matrix is None):
            raise ArgumentError("give exactly one of coords or matrix")
        if coords is not None:
            coords = np.array(coords, dtype=np.float64)
            if coords.ndim == 1:
                coords = coords[:, None]
            if coords.ndim != 2:
                raise ArgumentError("coords must be a 2-D array")
            if not np.all(np.isfinite(coords)):
                raise ArgumentError("coords contain non-finite values")
            coords.setflags(write=False)
        else:
            matrix = np.array(matrix, dtype=np.float64)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ArgumentError("distance matrix must be square")
            matrix.setflags(write=False)
        self.coords = coords
        self.matrix = matrix
        self.kind = kind or "generic"

    def __repr__(self):
        return f"FiniteMetricSpace(n={self.n}, d={self.d}, kind={self.kind!r})"

    @property
    def n(self):
        return len(self.coords) if self.coords is not None else len(self.matrix)

    @property
    def d(self):
        return self.coords.shape[1] if self.coords is not None else None

    @property
    def is_line(self):
        return self.coords is not None and self.coords.shape[1] == 1

    def line_coords(self):
        if not self.is_line:
            raise ArgumentError("operation needs a 1-D coordinate space")
        return self.coords[:, 0]

    def dist(self, i, j):
        if self.matrix is not None:
            return float(self.matrix[i, j])
        return float(np.max(np.abs(self.coords[i] - self.coords[j])))

    def pairwise(self, a=None, b=None):
        """Distance block between index arrays ``a`` and ``b`` (all points if None)."""
        a = np.arange(self.n) if a is None else np.asarray(a, dtype=np.int64)
        b = np.arange(self.n) if b is None else np.asarray(b, dtype=np.int64)
        if self.matrix is not None:
            return self.matrix[np.ix_(a, b)]
        ca, cb = self.coords[a], self.coords[b]
        out = np.abs(ca[:, None, 0] - cb[None, :, 0])
        for k in range(1, ca.shape[1]):
            np.maximum(out, np.abs(ca[:, None, k] - cb[None, :, k]), out=out)
        return out

    def distances_from(self, i, b=None):
        return self.pairwise([i], b)[0]

    @cached_property
    def diam(self):
        if self.n == 0:
            return 0.0
        if self.coords is not None:
            return float(np.max(self.coords.max(axis=0) - self.coords.min(axis=0)))
        return float(self.matrix.max())

    def extended(self, extra_coords):
        """New space with ``extra_coords`` appended; old indices are preserved."""
        if self.coords is None:
            raise ArgumentError("only coordinate spaces can be extended")
        extra = np.asarray(extra_coords, dtype=np.float64).reshape(-1, self.coords.shape[1])
        space = FiniteMetricSpace(np.vstack([self.coords, extra]), kind=self.kind)
        return space, np.arange(self.n, self.n + len(extra))

    def covering_number(self, radius):
        """Covering number used by bounds: analytic for the unit cube, greedy otherwise."""
        if self.kind == "cube":
            return cube_covering_number(self.d, radius)
        return covering_number_upper(self, radius)


def cube_space(coords):
    """Coordinate space standing for ``[0,1]^d`` with the l-infinity metric."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.size and (coords.min() < 0 or coords.max() > 1):
        raise ArgumentError("cube coordinates must lie in [0, 1]")
    return FiniteMetricSpace(coords, kind="cube")


def line_space(points):
    return cube_space(np.asarray(points, dtype=np.float64)[:, None])


def cube_grid(d, radius):
    """Centres of a regular l-infinity ``radius``-net of ``[0,1]^d``.

    Spacing ``h = 1/k`` with ``k = ceil(1/(2 radius))`` and centres at ``(i+1/2) h``,
    so the covering radius is ``h/2 <= radius``. Rows are in lexicographic order.
    """
    k = cube_grid_side(radius)
    axis = (np.arange(k) + 0.5) / k
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1), 0.5 / k


def cube_grid_side(radius):
    if not radius > 0:
        raise ArgumentError("radius must be positive")
    return max(1, math.ceil(1.0 / (2.0 * radius) - 1e-12))


def cube_covering_number(d, radius):
    return cube_grid_side(radius) ** d


@dataclass(frozen=True)
class WeightedMeasure:
    """Finitely supported (possibly signed) measure on a :class:`FiniteMetricSpace`."""

    space: FiniteMetricSpace
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64).ravel()
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if support.shape != weights.shape:
            raise ArgumentError("support and weights differ in length")
        if support.size and (support.min() < 0 or support.max() >= self.space.n):
            raise ArgumentError("support index out of range")
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empirical(cls, space, points):
        """Uniform measure on a multiset of point indices."""
        points = np.asarray(points, dtype=np.int64)
        if points.size == 0:
            raise ArgumentError("empirical measure of an empty dataset")
        support, counts = np.unique(points, return_counts=True)
        return cls(space, support, counts / points.size)

    @classmethod
    def point_mass(cls, space, i):
        return cls(space, [i], [1.0])

    @property
    def total(self):
        return float(self.weights.sum())

    def is_probability(self, tol=PROB_TOL):
        return bool(np.all(self.weights >= -tol) and abs(self.total - 1.0) <= tol)

    def require_probability(self):
        if not self.is_probability():
            raise ArgumentError("expected a probability measure (weights >= 0, sum 1)")

    def dense(self):
        out = np.zeros(self.space.n)
        np.add.at(out, self.support, self.weights)
        return out

    def lift(self, space):
        """Same atoms viewed in an extension of the space (indices preserved)."""
        if space.n < self.space.n:
            raise ArgumentError("target space is smaller than the source space")
        return WeightedMeasure(space, self.support, self.weights)

    def compact(self):
        """Merge repeated indices and drop zero atoms; support sorted by index."""
        dense = self.dense()
        idx = np.flatnonzero(dense)
        return WeightedMeasure(self.space, idx, dense[idx])

    def tv_norm(self):
        return 0.5 * float(np.abs(self.compact().weights).sum())


def _same_space(mu, nu):
    if mu.space is not nu.space:
        raise ArgumentError("measures live on different spaces")


def tv_distance(mu, nu):
    """Half the l1 distance between the weight vectors on the union support."""
    _same_space(mu, nu)
    return 0.5 * float(np.abs(mu.dense() - nu.dense()).sum())


def wasserstein1_line(mu, nu):
    """Integral of ``|F_mu - F_nu|`` over the sorted union support.

    Signed measures are accepted. When the totals differ the integral is taken
    over ``[0, 1]``, which is where such measures are given a meaning.
    """
    _same_space(mu, nu)
    x = mu.space.line_coords()
    diff = mu.dense() - nu.dense()
    idx = np.flatnonzero(diff)
    if idx.size == 0:
        return 0.0
    order = np.argsort(x[idx], kind="stable")
    pts = x[idx][order]
    cdf = np.cumsum(diff[idx][order])
    gaps = np.diff(pts)
    value = float(np.sum(gaps * np.abs(cdf[:-1])))
    tail = cdf[-1]
    if abs(tail) > 1e-12:
        if pts[0] < 0 or pts[-1] > 1:
            raise ArgumentError("unequal totals are only supported on [0, 1]")
        value += float((1.0 - pts[-1]) * abs(tail))
    return value


def transport_ssp(a, b, cost, tol=1e-15):
    """Exact balanced transport by successive shortest paths with potentials.

    Returns ``(total_cost, plan)``. Dense Dijkstra over the bipartite residual
    graph plus a super source ``s`` and super sink ``t``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    r, s = cost.shape
    b = b * (a.sum() / b.sum())
    flow = np.zeros((r, s))
    sup = a.copy()
    dem = b.copy()
    p_src = np.zeros(r)
    p_snk = np.zeros(s)
    p_s = 0.0
    p_t = 0.0
    inf = np.inf
    for _ in range(8 * (r + s) * (r + s) + 16):
        if sup.sum() <= 1e-13:
            break
        d_src = np.full(r, inf)
        d_snk = np.full(s, inf)
        pre_src = np.full(r, -1)  # -1: from s, k >= 0: from sink k
        pre_snk = np.full(s, -1)  # source index
        done_src = np.zeros(r, bool)
        done_snk = np.zeros(s, bool)
        live = sup > tol
        d_src[live] = np.maximum(p_s - p_src[live], 0.0)
        d_t = inf
        pre_t = -1
        while True:
            i = np.argmin(np.where(done_src, inf, d_src)) if r else -1
            j = np.argmin(np.where(done_snk, inf, d_snk)) if s else -1
            di = d_src[i] if not done_src[i] else inf
            dj = d_snk[j] if not done_snk[j] else inf
            if min(di, dj, d_t) == inf:
                break
            if d_t <= min(di, dj):
                break
            if di <= dj:
                done_src[i] = True
                nd = di + np.maximum(cost[i] + p_src[i] - p_snk, 0.0)
                better = (nd < d_snk) & ~done_snk
                d_snk[better] = nd[better]
                pre_snk[better] = i
            else:
                done_snk[j] = True
                back = (flow[:, j] > tol) & ~done_src
                if back.any():
                    nd = dj + np.maximum(-cost[:, j] + p_snk[j] - p_src, 0.0)
                    better = back & (nd < d_src)
                    d_src[better] = nd[better]
                    pre_src[better] = j
                if dem[j] > tol:
                    nd = dj + max(p_snk[j] - p_t, 0.0)
                    if nd < d_t:
                        d_t = nd
                        pre_t = j
        if pre_t < 0:
            raise RuntimeError("transport solver found no augmenting path")
        # rebuild the path t <- j <- i <- (j' <- i' ...) <- s
        path = []
        j = pre_t
        while True:
            i = pre_snk[j]
            path.append((i, j))
            k = pre_src[i]
            if k < 0:
                break
            path.append((i, -k - 1))  # backward arc j' -> i encoded with negative sink
            j = k
        start = path[-1][0]
        amount = min(sup[start], dem[pre_t])
        for i, j in path:
            if j < 0:
                amount = min(amount, flow[i, -j - 1])
        for i, j in path:
            if j < 0:
                flow[i, -j - 1] -= amount
            else:
                flow[i, j] += amount
        sup[start] -= amount
        dem[pre_t] -= amount
        cap = d_t
        p_src += np.minimum(d_src, cap)
        p_snk += np.minimum(d_snk, cap)
        p_t += cap
    else:
        raise RuntimeError("transport solver did not converge")
    flow[flow < 0] = 0.0
    return float(np.sum(flow * cost)), flow


def _import_pot():
    for backend in ("TENSORFLOW", "PYTORCH", "JAX", "CUPY"):
        os.environ.setdefault(f"POT_BACKEND_DISABLE_{backend}", "1")
    import ot

    return ot


def wasserstein1_exact(mu, nu, solver="auto"):
    """Exact W1 between probability measures by min-cost flow.

    ``solver`` is ``"ssp"`` (pure numpy successive shortest paths),
    ``"network_simplex"`` (POT's exact solver) or ``"auto"`` which picks SSP for
    small supports.
    """
    _same_space(mu, nu)
    mu.require_probability()
    nu.require_probability()
    a_m, b_m = mu.compact(), nu.compact()
    size = a_m.support.size + b_m.support.size
    if size > MAX_FLOW_SUPPORT:
        raise ResourceError(f"combined support {size} exceeds {MAX_FLOW_SUPPORT}")
    a = np.clip(a_m.weights, 0.0, None)
    b = np.clip(b_m.weights, 0.0, None)
    cost = mu.space.pairwise(a_m.support, b_m.support)
    if solver == "auto":
        solver = "ssp" if size <= SSP_AUTO_LIMIT else "network_simplex"
    if solver == "ssp":
        return transport_ssp(a, b, cost)[0]
    if solver == "network_simplex":
        ot = _import_pot()
        a = a / a.sum()
        b = b / b.sum()
        return float(ot.emd2(a, b, np.ascontiguousarray(cost), numItermax=10_000_000))
    raise ArgumentError(f"unknown solver {solver!r}")


@dataclass(frozen=True)
class Net:
    """Centres of a ``radius``-net with the proximity partition of the space.

    ``cell_of[x]`` is the position in ``centers`` of the centre owning point ``x``.
    """

    space: FiniteMetricSpace
    centers: np.ndarray
    radius: float
    cell_of: np.ndarray

    def __len__(self):
        return len(self.centers)


def _greedy_centers(space, radius, seeds=None):
    """Farthest-point traversal from index 0 (or from ``seeds``) until covered."""
    if space.n == 0:
        raise ArgumentError("empty space")
    if seeds is None or len(seeds) == 0:
        centers = [0]
    else:
        centers = list(seeds)
    mind = np.full(space.n, np.inf)
    for c in centers:
        np.minimum(mind, space.distances_from(c), out=mind)
    while True:
        far = int(np.argmax(mind))
        if mind[far] <= radius:
            break
        centers.append(far)
        np.minimum(mind, space.distances_from(far), out=mind)
    return centers


def _assign_cells(space, centers):
    cell = np.empty(space.n, dtype=np.int64)
    step = max(1, _CHUNK // max(len(centers), 1))
    worst = 0.0
    for lo in range(0, space.n, step):
        block = space.pairwise(np.arange(lo, min(lo + step, space.n)), centers)
        cell[lo:lo + len(block)] = np.argmin(block, axis=1)
        worst = max(worst, float(block.min(axis=1).max()))
    return cell, worst


def build_net(space, radius, centers=None):
    """Greedy farthest-point ``radius``-net, or a caller-provided centre set.

    Centres are sorted by index and the proximity partition breaks ties towards
    the lowest centre index. Greedy centres are pairwise more than ``radius``
    apart.
    """
    if not radius > 0:
        raise ArgumentError(f"radius must be positive, got {radius!r}")
    if space.n == 0:
        raise ArgumentError("empty space")
    if centers is None:
        chosen = np.array(sorted(_greedy_centers(space, radius)), dtype=np.int64)
    else:
        chosen = np.unique(np.asarray(centers, dtype=np.int64))
    cell, worst = _assign_cells(space, chosen)
    if worst > radius * (1 + 1e-12) + 1e-15:
        raise ArgumentError(f"centres do not cover the space at radius {radius}")
    chosen.setflags(write=False)
    cell.setflags(write=False)
    return Net(space, chosen, float(radius), cell)


def quantize(measure, net):
    """Move the mass of each proximity cell to its centre."""
    if measure.space is not net.space:
        raise ArgumentError("measure and net live on different spaces")
    w = np.bincount(net.cell_of[measure.support], weights=measure.weights,
                    minlength=len(net.centers))
    return WeightedMeasure(net.space, net.centers, w)


def covering_number_upper(space, radius):
    """Greedy net size: an upper bound on the covering number."""
    if not radius > 0:
        raise ArgumentError("radius must be positive")
    return len(_greedy_centers(space, radius))


def packing_number_lower(space, radius):
    """Greedy centres are ``radius``-separated: a lower bound on the packing number."""
    return covering_number_upper(space, radius)
