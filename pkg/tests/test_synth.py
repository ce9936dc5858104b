from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privmeasure.errors import ArgumentError
from privmeasure.measures import (
    FiniteMetricSpace,
    WeightedMeasure,
    cube_space,
    line_space,
    tv_distance,
    wasserstein1_exact,
)
from privmeasure.metric import choose_delta
from privmeasure.rng import stream
from privmeasure.synth import (
    choose_m,
    dp_synthetic_data,
    empirical_tv,
    quantized_counts,
    weights_to_empirical,
)


def test_rounding_examples():
    sp = line_space([0.0, 1.0, 0.5])
    out = weights_to_empirical(WeightedMeasure(sp, [0, 1], [0.26, 0.74]), 10)
    assert np.bincount(out.points, minlength=2).tolist() == [3, 7]
    out = weights_to_empirical(WeightedMeasure.point_mass(sp, 2), 5)
    assert out.points.tolist() == [2] * 5
    out = weights_to_empirical(WeightedMeasure(sp, [0, 1, 2], [1 / 3] * 3), 3)
    assert sorted(out.points.tolist()) == [0, 1, 2]


def test_choose_m_examples():
    assert choose_m(10, 1, 0.1) == 100
    assert choose_m(1, 2.0, 0.3) == 7
    assert choose_m(4, 1.0, 4.0) == 1
    assert choose_m(4, 1.0, 10.0) == 1
    with pytest.raises(ArgumentError):
        choose_m(3, 1.0, 0.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_rounding_identity_and_transport(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 8))
    sp = FiniteMetricSpace(rng.random((r, 2)))
    nu = WeightedMeasure(sp, np.arange(r), rng.dirichlet(np.ones(r)))
    delta = float(rng.uniform(0.05, 1))
    m = choose_m(r, sp.diam, delta)
    assert r * sp.diam / m <= delta * (1 + 1e-12)
    out = weights_to_empirical(nu, m)
    counts = quantized_counts(nu.weights, m)
    assert counts.sum() == m and counts.min() >= 0
    assert np.array_equal(np.bincount(out.points, minlength=r), counts)
    emp = out.measure()
    assert np.allclose(emp.dense(), counts / m)
    kappa = counts[0] / m - nu.weights[0]
    assert wasserstein1_exact(nu, emp) <= kappa * sp.diam + 1e-12
    assert kappa * sp.diam <= delta + 1e-12


def test_pipeline_wiring_and_determinism():
    rng = np.random.default_rng(1)
    sp = cube_space(rng.random((200, 2)))
    data = rng.integers(0, 200, 100)
    a = dp_synthetic_data(sp, data, 1.0, rng=stream(3))
    b = dp_synthetic_data(sp, data, 1.0, rng=stream(3))
    assert np.array_equal(a.points, b.points)
    assert a.provenance["alpha"] == 100.0
    assert a.provenance["delta"] == choose_delta("cube", 100, d=2)
    assert a.m == a.provenance["m"] == choose_m(a.provenance["net_size"], 1.0, a.provenance["delta"])
    c = dp_synthetic_data(sp, data, 0.5, delta=0.25, rng=stream(3))
    assert c.provenance["alpha"] == 50.0 and c.provenance["delta"] == 0.25
    assert c.coords().shape == (c.m, 2)


def test_generic_space_pipeline():
    rng = np.random.default_rng(2)
    pts = rng.random((40, 2))
    sp = FiniteMetricSpace(matrix=np.abs(pts[:, None] - pts[None]).max(axis=2))
    out = dp_synthetic_data(sp, np.arange(40), 2.0, rng=stream(0))
    assert out.space is sp
    assert out.m >= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_neighbour_datasets_are_close_in_tv(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 60))
    sp = line_space(rng.random(30))
    x = rng.integers(0, 30, n)
    y = x.copy()
    y[rng.integers(n)] = rng.integers(30)
    exact = empirical_tv(x, y)
    assert exact <= Fraction(1, n)
    tv = tv_distance(WeightedMeasure.empirical(sp, x), WeightedMeasure.empirical(sp, y))
    assert tv == pytest.approx(float(exact), abs=1e-15)


def test_errors():
    sp = line_space([0.2, 0.4])
    with pytest.raises(ArgumentError):
        weights_to_empirical(WeightedMeasure.point_mass(sp, 0), 0)
    with pytest.raises(ArgumentError):
        dp_synthetic_data(sp, [], 1.0, rng=stream(0))
    with pytest.raises(ArgumentError):
        dp_synthetic_data(sp, [0, 1], 0.0, rng=stream(0))
    with pytest.raises(ArgumentError):
        dp_synthetic_data(sp, [0], 1.0, rng=stream(0))
