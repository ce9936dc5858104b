import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privmeasure.errors import ArgumentError
from privmeasure.folding import (
    chaining_envelope,
    chaining_tree,
    fold,
    minimum_spanning_tree,
    tour_order,
    tsp_integral_bound,
)
from privmeasure.measures import FiniteMetricSpace, cube_grid, cube_space, line_space

SQUARE = FiniteMetricSpace([[0, 0], [1, 0], [0, 1], [1, 1]])


def brute_force_mst(space):
    n = space.n
    d = space.pairwise()
    edges = list(itertools.combinations(range(n), 2))
    best = np.inf
    for chosen in itertools.combinations(edges, n - 1):
        root = list(range(n))

        def find(v):
            while root[v] != v:
                v = root[v]
            return v

        ok = True
        for a, b in chosen:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            root[ra] = rb
        if ok:
            best = min(best, sum(d[a, b] for a, b in chosen))
    return best


def held_karp(space):
    """Exact shortest Hamiltonian cycle."""
    n = space.n
    if n <= 1:
        return 0.0
    d = space.pairwise()
    full = 1 << (n - 1)
    cost = np.full((full, n - 1), np.inf)
    for k in range(n - 1):
        cost[1 << k, k] = d[n - 1, k]
    for mask in range(1, full):
        for k in range(n - 1):
            if not mask >> k & 1 or not np.isfinite(cost[mask, k]):
                continue
            for j in range(n - 1):
                if mask >> j & 1:
                    continue
                m2 = mask | 1 << j
                cost[m2, j] = min(cost[m2, j], cost[mask, k] + d[k, j])
    return float(min(cost[full - 1, k] + d[k, n - 1] for k in range(n - 1)))


def test_mst_examples():
    assert minimum_spanning_tree(line_space([0, 0.25, 0.5, 0.75])).total_length == 0.75
    assert minimum_spanning_tree(FiniteMetricSpace([0, 1, 2, 3])).total_length == 3
    assert brute_force_mst(SQUARE) == 3
    assert minimum_spanning_tree(SQUARE).total_length == 3
    single = minimum_spanning_tree(FiniteMetricSpace([[0.4, 0.4]]))
    assert single.total_length == 0 and single.is_spanning_tree()


def test_tour_on_a_path():
    f = fold(FiniteMetricSpace([0, 1, 2, 3]))
    assert f.order.tolist() == [0, 1, 2, 3]
    assert f.positions.tolist() == [0, 1, 2, 3]
    assert f.total == 3


def test_square_tour_and_exact_cycle():
    # brute force over the three distinct Hamiltonian cycles of four points
    d = SQUARE.pairwise()
    cycles = [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3)]
    lengths = [sum(d[c[i], c[(i + 1) % 4]] for i in range(4)) for c in cycles]
    assert min(lengths) == 4 == held_karp(SQUARE)
    f = tour_order(minimum_spanning_tree(SQUARE))
    assert f.total <= 6
    assert f.lipschitz_excess() <= 1e-12


def test_chaining_on_three_points():
    sp = line_space([0, 0.5, 1])
    tree = chaining_tree(sp)
    assert tree.is_spanning_tree()
    # nets: {0} at scale 1, {0, 1} at 1/2, all three at 1/4
    assert tree.level_sizes == {0: 1, 1: 2, 2: 3}
    envelope = 8 * ((1 - 0.5) * 0 + (0.5 - 0.25) * 1 + 0.25 * 2)
    assert chaining_envelope(tree.level_sizes) == pytest.approx(envelope)
    assert tree.total_length == pytest.approx(1.5)
    assert tree.total_length <= envelope
    assert tree.total_length >= minimum_spanning_tree(sp).total_length


def test_chaining_single_point():
    tree = chaining_tree(FiniteMetricSpace([[0.5]]))
    assert tree.total_length == 0 and tree.edges().size == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_tsp_sandwich_and_lipschitz(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 10))
    pts = rng.random((n, 2))
    if n > 2 and rng.random() < 0.3:
        pts[-1] = pts[0]
    sp = FiniteMetricSpace(pts)
    mst = minimum_spanning_tree(sp)
    tsp = held_karp(sp)
    tour = tour_order(mst)
    assert mst.is_spanning_tree()
    assert mst.total_length <= tsp + 1e-12
    assert tsp <= 2 * mst.total_length + 1e-12
    assert tour.total <= 2 * mst.total_length + 1e-12
    assert sorted(tour.order.tolist()) == list(range(n))
    assert np.all(np.diff(tour.positions) >= 0)
    assert tour.lipschitz_excess() <= 1e-12
    chain = chaining_tree(sp)
    assert chain.is_spanning_tree()
    assert mst.total_length <= chain.total_length + 1e-12
    assert chain.total_length <= chaining_envelope(chain.level_sizes) + 1e-12


def test_matrix_space_folding():
    rng = np.random.default_rng(0)
    pts = rng.random((12, 3))
    m = np.abs(pts[:, None] - pts[None]).sum(axis=2)
    sp = FiniteMetricSpace(matrix=m)
    f = fold(sp)
    assert f.lipschitz_excess() <= 1e-12
    assert f.total <= 2 * minimum_spanning_tree(sp).total_length + 1e-12


def test_fold_of_subset_keeps_global_indices():
    sp = line_space([0.9, 0.1, 0.5, 0.3])
    f = fold(sp, [1, 2, 3])
    assert f.order.tolist() == [1, 3, 2]
    assert np.allclose(f.positions, [0, 0.2, 0.4])
    assert np.allclose(f.unit_positions(), [0, 0.5, 1])


def test_nearest_child_first():
    # root 0 with children at distance 0.3 (index 1) and 0.1 (index 2)
    sp = line_space([0.5, 0.8, 0.4])
    f = fold(sp)
    assert f.order.tolist() == [0, 2, 1]


def test_duplicates_have_repeated_positions():
    sp = FiniteMetricSpace([[0.2], [0.2], [0.7]])
    f = fold(sp)
    assert sorted(f.order.tolist()) == [0, 1, 2]
    assert f.total == pytest.approx(0.5)
    assert f.lipschitz_excess() <= 1e-12


def test_tsp_bound_examples():
    assert tsp_integral_bound(FiniteMetricSpace([[0.3, 0.3]]), 0.1) == 0.0
    values = [tsp_integral_bound(cube_space(cube_grid(2, d)[0]), d) for d in (1 / 8, 1 / 16, 1 / 32)]
    for a, b in zip(values, values[1:]):
        assert b / a == pytest.approx(2, abs=0.3)
    rng = np.random.default_rng(1)
    sp = FiniteMetricSpace(rng.random((40, 2)))
    bound = tsp_integral_bound(sp, 0.01)
    f = fold(sp)
    assert f.total <= bound
    assert f.total <= 2 * chaining_tree(sp).total_length
    with pytest.raises(ArgumentError):
        tsp_integral_bound(sp, 0)


def test_empty_nodes_rejected():
    with pytest.raises(ArgumentError):
        minimum_spanning_tree(FiniteMetricSpace([[0.0]]), [])
