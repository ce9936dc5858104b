"""Folding a finite metric space onto an interval.

A spanning tree of the point set is walked depth first; shortcutting repeated
vertices gives a Hamiltonian path ``z_1, ..., z_n`` and the points are laid out
on the line at ``x_k = sum_{i<k} rho(z_i, z_{i+1})``. Consecutive points are
then exactly as far apart on the line as in the space, so by the triangle
inequality the inverse map from the line back to the space is 1-Lipschitz.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .measures import FiniteMetricSpace

_MAX_CHAIN_LEVELS = 64


def _node_array(space, nodes):
    if nodes is None:
        return np.arange(space.n, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=np.int64).ravel()
    if nodes.size and (nodes.min() < 0 or nodes.max() >= space.n):
        raise ArgumentError("node index out of range")
    return nodes


def _restrict(space, nodes):
    if space.coords is not None:
        return FiniteMetricSpace(space.coords[nodes], kind=space.kind)
    return FiniteMetricSpace(matrix=space.matrix[np.ix_(nodes, nodes)])


@dataclass(frozen=True)
class SpanningTree:
    """Tree over ``nodes`` (indices into ``space``); ``parent`` holds positions in ``nodes``.

    ``parent[root] == -1``. ``level_sizes`` is filled in by the chaining
    construction with the net size at every scale ``2**-j``, keyed by ``j``.
    """

    space: FiniteMetricSpace
    nodes: np.ndarray
    parent: np.ndarray
    root: int
    total_length: float
    level_sizes: dict = field(default=None)

    @property
    def n(self):
        return len(self.nodes)

    def edges(self):
        """``(child, parent)`` position pairs."""
        child = np.flatnonzero(self.parent >= 0)
        return np.stack([child, self.parent[child]], axis=1)

    def is_spanning_tree(self):
        """Connected and acyclic: every node reaches the root through parent links."""
        if self.n == 0 or self.parent[self.root] != -1:
            return False
        if np.count_nonzero(self.parent < 0) != 1:
            return False
        depth = np.full(self.n, -1)
        depth[self.root] = 0
        for start in range(self.n):
            path = []
            v = start
            while depth[v] < 0:
                if len(path) > self.n:
                    return False
                path.append(v)
                v = self.parent[v]
            d = depth[v]
            for u in reversed(path):
                d += 1
                depth[u] = d
        return True


def _tree_length(space, nodes, parent):
    child = np.flatnonzero(parent >= 0)
    if child.size == 0:
        return 0.0
    a, b = nodes[child], nodes[parent[child]]
    if space.coords is not None:
        return float(np.abs(space.coords[a] - space.coords[b]).max(axis=1).sum())
    return float(space.matrix[a, b].sum())


def minimum_spanning_tree(space, nodes=None):
    """Exact MST of the complete distance graph on ``nodes`` by Prim, rooted at position 0.

    Ties go to the lowest position, so the tree is deterministic.
    """
    nodes = _node_array(space, nodes)
    m = len(nodes)
    if m == 0:
        raise ArgumentError("empty node set")
    parent = np.full(m, -1, dtype=np.int64)
    best = space.pairwise([nodes[0]], nodes)[0].copy()
    via = np.zeros(m, dtype=np.int64)
    done = np.zeros(m, dtype=bool)
    done[0] = True
    best[0] = np.inf
    for _ in range(m - 1):
        v = int(np.argmin(best))
        parent[v] = via[v]
        done[v] = True
        best[v] = np.inf
        row = space.pairwise([nodes[v]], nodes)[0]
        better = (row < best) & ~done
        best[better] = row[better]
        via[better] = v
    return SpanningTree(space, nodes, parent, 0, _tree_length(space, nodes, parent))


def _greedy_extend(sub, radius, centers, mind):
    """Add farthest points to ``centers`` until every point is within ``radius``."""
    while True:
        far = int(np.argmax(mind))
        if mind[far] <= radius:
            return
        centers.append(far)
        np.minimum(mind, sub.distances_from(far), out=mind)


def chaining_tree(space, nodes=None):
    """Spanning tree from nested greedy nets at scales ``eps_j = 2**-j``.

    The coarsest level is a single point (``eps_j >= diam``). Each level keeps
    the previous centres and adds greedy ones; every new centre is joined to
    the closest centre of the previous level. Points at distance zero from a
    centre join it at the end.
    """
    nodes = _node_array(space, nodes)
    m = len(nodes)
    if m == 0:
        raise ArgumentError("empty node set")
    parent = np.full(m, -1, dtype=np.int64)
    if m == 1:
        return SpanningTree(space, nodes, parent, 0, 0.0, {0: 1})
    sub = _restrict(space, nodes)
    diam = sub.diam
    j = -math.ceil(math.log2(diam)) if diam > 0 else 0
    centers = [0]
    mind = sub.distances_from(0).copy()
    sizes = {j: 1}
    for _ in range(_MAX_CHAIN_LEVELS):
        if not np.any(mind > 0):
            break
        j += 1
        prev = np.array(centers)
        start = len(centers)
        _greedy_extend(sub, 2.0 ** -j, centers, mind)
        new = np.array(centers[start:], dtype=np.int64)
        if new.size:
            block = sub.pairwise(new, prev)
            parent[new] = prev[np.argmin(block, axis=1)]
        sizes[j] = len(centers)
    rest = np.setdiff1d(np.arange(m), centers)
    if rest.size:
        prev = np.array(centers)
        parent[rest] = prev[np.argmin(sub.pairwise(rest, prev), axis=1)]
        if np.any(mind > 0):
            j += 1
            sizes[j] = m
    return SpanningTree(space, nodes, parent, 0, _tree_length(space, nodes, parent), sizes)


def chaining_envelope(level_sizes):
    """``8 [sum_j (eps_j - eps_{j+1})(|N_j| - 1) + eps_J (|N_J| - 1)]`` for ``eps_j = 2**-j``."""
    js = sorted(level_sizes)
    total = 0.0
    for a, b in zip(js, js[1:]):
        total += (2.0 ** -a - 2.0 ** -b) * (level_sizes[a] - 1)
    total += 2.0 ** -js[-1] * (level_sizes[js[-1]] - 1)
    return 8.0 * total


@dataclass(frozen=True)
class FoldingMap:
    """Hamiltonian ordering ``order`` of space indices with line ``positions``.

    ``positions[k]`` is the length of the path up to ``order[k]``; ``total`` is
    the full path length.
    """

    space: FiniteMetricSpace
    order: np.ndarray
    positions: np.ndarray
    total: float

    def lipschitz_excess(self):
        """``max_{j,k} rho(z_j, z_k) - |x_j - x_k|``; nonpositive for a valid fold."""
        if len(self.order) < 2:
            return 0.0
        rho = self.space.pairwise(self.order, self.order)
        line = np.abs(self.positions[:, None] - self.positions[None, :])
        return float((rho - line).max())

    def unit_positions(self):
        """Positions rescaled to ``[0, 1]``; all zero for a zero-length path."""
        if self.total > 0:
            return self.positions / self.total
        return np.zeros_like(self.positions)


def dfs_preorder(tree):
    """Preorder positions; children visited nearest first, ties by position."""
    m = tree.n
    children = [[] for _ in range(m)]
    for c, p in tree.edges():
        children[p].append(c)
    for p in range(m):
        if len(children[p]) > 1:
            kids = np.array(children[p])
            d = tree.space.pairwise([tree.nodes[p]], tree.nodes[kids])[0]
            children[p] = [int(k) for k in kids[np.lexsort((kids, d))]]
    out = []
    stack = [tree.root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(reversed(children[v]))
    return np.array(out, dtype=np.int64)


def tour_order(tree):
    """Shortcut DFS tour of ``tree`` as a folding map onto ``[0, total]``."""
    order = tree.nodes[dfs_preorder(tree)]
    steps = _consecutive(tree.space, order)
    positions = np.concatenate([[0.0], np.cumsum(steps)])
    order.setflags(write=False)
    positions.setflags(write=False)
    return FoldingMap(tree.space, order, positions, float(positions[-1]))


def _consecutive(space, order):
    a, b = order[:-1], order[1:]
    if space.coords is not None:
        return np.abs(space.coords[a] - space.coords[b]).max(axis=1)
    return space.matrix[a, b]


def fold(space, nodes=None):
    """Folding map of ``nodes`` through the exact MST."""
    return tour_order(minimum_spanning_tree(space, nodes))


def covering_profile(space, delta, nodes=None):
    """Covering numbers ``N(x)`` at ``x = delta/2 * 2**i`` up to ``diam/2``.

    Returns ``(edges, counts)``: ``counts[i]`` is the covering number used on
    ``[edges[i], edges[i+1])`` and the last edge is ``diam/2``. A cube-kind
    space stands for all of ``[0,1]^d``, so its analytic counts (and diameter
    1) are used and the result also bounds any subset. Otherwise the counts are
    greedy net sizes of the point set.
    """
    if space.kind == "cube":
        hi, count = 0.5, lambda x: space.covering_number(x)
    else:
        nodes = _node_array(space, nodes)
        sub = _restrict(space, nodes)
        hi = sub.diam / 2.0

        def count(x):
            centers = [0]
            _greedy_extend(sub, x, centers, sub.distances_from(0).copy())
            return len(centers)

    lo = delta / 2.0
    if hi <= lo:
        return np.array([lo]), np.zeros(0, dtype=np.int64)
    edges = [lo]
    while edges[-1] * 2 < hi:
        edges.append(edges[-1] * 2)
    edges.append(hi)
    edges = np.array(edges)
    counts = np.array([count(x) for x in edges[:-1]], dtype=np.int64)
    return edges, counts


def tsp_integral_bound(space, delta, nodes=None):
    """Upper bound ``64 * int_{delta/2}^{diam/2} N(x) dx`` on the shortest tour.

    ``N`` is non-increasing, so the left Riemann sum on the dyadic grid is an
    upper bound for the integral with greedy counts in place of ``N``.
    """
    if not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta!r}")
    edges, counts = covering_profile(space, delta, nodes)
    if counts.size == 0:
        return 0.0
    return 64.0 * float(np.sum(np.diff(edges) * counts))
