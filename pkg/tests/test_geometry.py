from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tolerant_pac.geometry import (BallType, DimensionError, Metric, ball_contains, child_rng, eta_for_tolerance,
                                   inflate, lp_distance, lp_distances, overlap_fraction_exact,
                                   overlap_fraction_gamma_balls, point_key, sample_uniform_ball, tolerance_types)

coords = st.floats(-50, 50, allow_nan=False)
norms = st.sampled_from([1.0, 2.0, 3.0, np.inf])


def test_distance_examples():
    assert lp_distance((0, 0), (3, 4), Metric(2)) == 5.0
    for p in (1, 2, 3.5, np.inf):
        assert lp_distance((1, 1), (1, 1), Metric(p)) == 0.0
    assert lp_distance((0, 0), (1, 1), Metric(1)) == 2.0


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionError):
        lp_distance((0, 0), (1, 1, 1))


def test_distances_vectorised_match_scalar():
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(20, 3))
    m = Metric(3)
    np.testing.assert_allclose(lp_distances(Z[0], Z, m), [lp_distance(Z[0], z, m) for z in Z])


@settings(max_examples=300, deadline=None)
@given(st.lists(coords, min_size=6, max_size=6), norms)
def test_triangle_inequality(v, p):
    x, y, z = np.array(v[:2]), np.array(v[2:4]), np.array(v[4:])
    m = Metric(p)
    assert lp_distance(x, z, m) <= lp_distance(x, y, m) + lp_distance(y, z, m) + 1e-9


def test_ball_contains_examples():
    b = BallType(1.0)
    assert ball_contains(b, (0,), (1,))
    assert not ball_contains(b, (0,), (1.0001,))
    assert ball_contains(BallType(0.0), (0.3, 0.7), (0.3, 0.7))


def test_inflate_examples():
    assert inflate(BallType(1.0), BallType(0.5)).radius == 1.5
    assert inflate(BallType(1.0), BallType(0.0)).radius == 1.0
    assert inflate(BallType(2.0), BallType(2.0)).radius == 4.0


def test_inflate_rejects_mixed_metrics():
    with pytest.raises(ValueError):
        inflate(BallType(1.0, Metric(1)), BallType(1.0, Metric(2)))


@pytest.mark.parametrize("p", [1.0, 2.0, np.inf])
def test_inflation_containment(p):
    rng = np.random.default_rng(7)
    U, W = BallType(2.0, Metric(p)), BallType(2.0, Metric(p))
    V = inflate(U, W)
    for _ in range(1000):
        x = rng.uniform(-5, 5, size=2)
        x1 = sample_uniform_ball(U, x, rng)
        x2 = sample_uniform_ball(W, x1, rng)
        assert ball_contains(V, x, x2)


def test_tolerance_types():
    U, V, W = tolerance_types(1.0, 0.5)
    assert (U.radius, V.radius, W.radius) == (1.0, 1.5, 0.5)


def test_uniform_ball_area_ratio():
    X = sample_uniform_ball(BallType(1.0), (0.0, 0.0), child_rng(1), 100_000)
    assert abs(np.mean(np.linalg.norm(X, axis=1) <= 0.5) - 0.25) < 0.01


def test_uniform_ball_symmetric_1d():
    X = sample_uniform_ball(BallType(1.0), (0.0,), child_rng(2), 100_000)
    assert abs(X.mean()) < 0.01
    assert np.all(np.abs(X) <= 1.0)


def test_uniform_linf_quadrant():
    X = sample_uniform_ball(BallType(1.0, Metric(np.inf)), (0.0, 0.0), child_rng(3), 100_000)
    assert abs(np.mean((X > 0).all(axis=1)) - 0.25) < 0.01


def test_uniform_l1_ball_radial_law():
    # in the l1 ball of the plane the norm has density 2s on [0, 1]
    from scipy import stats
    X = sample_uniform_ball(BallType(1.0, Metric(1)), (0.0, 0.0), child_rng(4), 20_000)
    s = np.abs(X).sum(axis=1)
    assert np.all(s <= 1.0)
    assert stats.kstest(s ** 2, "uniform").pvalue > 1e-3


def test_uniform_ball_chi_square_cells():
    from scipy import stats
    X = sample_uniform_ball(BallType(1.0), (0.0, 0.0), child_rng(5), 40_000)
    # eight equal-area sectors
    sector = ((np.arctan2(X[:, 1], X[:, 0]) + np.pi) / (np.pi / 4)).astype(int) % 8
    counts = np.bincount(sector, minlength=8)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_overlap_examples():
    assert overlap_fraction_gamma_balls(1.0, 1) == 0.5
    assert overlap_fraction_gamma_balls(1.0, 3) == 0.125
    assert overlap_fraction_gamma_balls(0.5, 2) == pytest.approx(1 / 9)
    assert overlap_fraction_exact(Fraction(1, 2), 2) == Fraction(1, 9)


def test_overlap_monte_carlo_lower_bound():
    # W(z) for z on the boundary of U(x) keeps at least (gamma/(1+gamma))^d of V(x)'s volume inside V(x)
    gamma, r = 0.5, 1.0
    rng = child_rng(6)
    z = np.array([r, 0.0])
    pts = sample_uniform_ball(BallType(r * gamma), z, rng, 200_000)
    inside_v = np.linalg.norm(pts, axis=1) <= r * (1 + gamma)
    vol_w_in_v = inside_v.mean() * np.pi * (r * gamma) ** 2
    assert vol_w_in_v / (np.pi * (r * (1 + gamma)) ** 2) >= 1 / 9 - 0.002


@pytest.mark.parametrize("gamma,d", [(0.25, 1), (0.5, 1), (1.0, 2), (0.1, 3), (2.0, 1)])
def test_eta_for_tolerance_exact(gamma, d):
    eta = eta_for_tolerance(gamma, d)
    bound = overlap_fraction_exact(gamma, d)
    assert 3 * Fraction(eta) <= bound
    assert 3 * Fraction(np.nextafter(eta, np.inf)) > bound


def test_child_rng_streams_independent_of_order():
    a = child_rng(9, 1, 2).integers(1 << 30, size=4)
    child_rng(9, 5).integers(10)
    b = child_rng(9, 1, 2).integers(1 << 30, size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, child_rng(9, 2, 1).integers(1 << 30, size=4))


def test_point_key_distinguishes_points():
    assert point_key((0.1, 0.2)) == point_key(np.array([0.1, 0.2]))
    assert point_key((0.1,)) != point_key((0.1 + 1e-16 * 8,))
