import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tolerant_pac.discretization import FinitePerturbation
from tolerant_pac.geometry import BallType
from tolerant_pac.hypotheses import (IDENTITY, CapExceededError, IntervalClass, LabeledSample, RectangleClass,
                                     ThresholdClass, UnionOfIntervalsClass, compute_loss_class_vc, compute_vc,
                                     compute_vc_robust, effective_behaviors, enumerate_effective, erm, make_class,
                                     max_shattered, parse_hypothesis, rerm_ball, rerm_finite, robust_losses,
                                     sauer_bound)

TH, IV = ThresholdClass(), IntervalClass()


def offsets(k, step=0.5):
    return FinitePerturbation(lambda x: x + np.arange(-k, k + 1)[:, None] * step, name=f"offsets{k}")


def ball_loss_threshold(t, x, y, r):
    """Robust 0/1 loss of 1{x >= t} on [x - r, x + r], by direct case analysis."""
    if y == 1:
        return int(not (x - r >= t))
    return int(not (x + r < t))


def ball_loss_interval(a, b, x, y, r):
    if a > b:
        return int(y == 1)
    if y == 1:
        return int(not (a <= x - r and x + r <= b))
    return int(not (x + r < a or x - r > b))


def brute_threshold(S, r):
    cands = {-np.inf, np.inf}
    for x in S.X[:, 0]:
        for e in (x - r, x + r):
            cands |= {e, np.nextafter(e, np.inf), np.nextafter(e, -np.inf)}
    return min(np.mean([ball_loss_threshold(t, x, y, r) for x, y in zip(S.X[:, 0], S.y)]) for t in cands)


def brute_interval(S, r):
    ends = {-np.inf, np.inf}
    for x in S.X[:, 0]:
        for e in (x - r, x + r):
            ends |= {e, np.nextafter(e, np.inf), np.nextafter(e, -np.inf)}
    ends = sorted(ends)
    best = np.mean(S.y == 1)
    for a, b in itertools.combinations_with_replacement(ends, 2):
        best = min(best, np.mean([ball_loss_interval(a, b, x, y, r) for x, y in zip(S.X[:, 0], S.y)]))
    return best


def test_class_conventions():
    assert parse_hypothesis("threshold t=0")(0.5) == 1
    assert parse_hypothesis("threshold t=0")(0.0) == 1
    assert parse_hypothesis("interval a=0 b=1")(2) == 0
    assert parse_hypothesis("interval a=0 b=1")(1) == 1


def test_erm_examples():
    h = erm(TH, LabeledSample.of([(0, 0), (1, 1)]))
    assert h.describe() == "threshold t=1.0"
    S = LabeledSample.of([(0, 1), (1, 1), (2, 0)])
    h = erm(IV, S)
    assert h.describe() == "interval a=0.0 b=1.0"
    assert robust_losses(IV, IV.params_of([h]), S, IDENTITY)[0] == 0
    h = erm(TH, LabeledSample.of([(0, 1), (1, 0)]))
    assert robust_losses(TH, TH.params_of([h]), LabeledSample.of([(0, 1), (1, 0)]), IDENTITY)[0] == 0.5


def test_rerm_finite_examples():
    T = offsets(1)
    S = LabeledSample.of([(0, 0), (2, 1)])
    h = rerm_finite(TH, S, T)
    assert h.describe() == "threshold t=1.5"
    assert robust_losses(TH, TH.params_of([h]), S, T)[0] == 0
    S = LabeledSample.of([(0, 0), (0.4, 1)])
    h = rerm_finite(TH, S, T)
    assert robust_losses(TH, TH.params_of([h]), S, T)[0] == 0.5


def test_rerm_finite_identity_is_erm():
    rng = np.random.default_rng(3)
    for _ in range(50):
        S = LabeledSample(rng.integers(-5, 5, size=(8, 1)).astype(float), rng.integers(0, 2, 8))
        a = robust_losses(IV, IV.params_of([rerm_finite(IV, S, IDENTITY)]), S, IDENTITY)[0]
        b = robust_losses(IV, IV.params_of([erm(IV, S)]), S, IDENTITY)[0]
        assert a == b


def test_rerm_ball_examples():
    V = BallType(1.0)
    S = LabeledSample.of([(0, 0), (3, 1)])
    h = rerm_ball(TH, S, V)
    assert h.describe() == "threshold t=2.0"
    # dense probe of the loss over thresholds agrees that t=2 is optimal
    ts = np.linspace(-2, 5, 7001)
    probe = [np.mean([ball_loss_threshold(t, x, y, 1.0) for x, y in [(0, 0), (3, 1)]]) for t in ts]
    assert min(probe) == 0.0
    assert rerm_ball(TH, LabeledSample.of([(0, 0), (1, 1)]), V) is not None
    S = LabeledSample.of([(0, 0), (1, 1)])
    assert robust_losses(TH, TH.params_of([rerm_ball(TH, S, V)]), S, V)[0] == 0.5


def test_rerm_ball_radius_zero_is_erm():
    rng = np.random.default_rng(4)
    for _ in range(50):
        S = LabeledSample(rng.normal(size=(7, 1)), rng.integers(0, 2, 7))
        a = robust_losses(TH, TH.params_of([rerm_ball(TH, S, BallType(0.0))]), S, IDENTITY)[0]
        b = robust_losses(TH, TH.params_of([erm(TH, S)]), S, IDENTITY)[0]
        assert a == b


@settings(max_examples=500, deadline=None)
@given(st.lists(st.tuples(st.integers(-12, 12), st.integers(0, 1)), min_size=1, max_size=7),
       st.sampled_from([0.0, 0.5, 1.0, 1.75]))
def test_rerm_threshold_matches_bruteforce(pairs, r):
    S = LabeledSample.of([(x / 2, y) for x, y in pairs])
    h = rerm_ball(TH, S, BallType(r))
    got = np.mean([ball_loss_threshold(h.params[0], x, y, r) for x, y in zip(S.X[:, 0], S.y)])
    assert got == pytest.approx(brute_threshold(S, r))


@settings(max_examples=500, deadline=None)
@given(st.lists(st.tuples(st.integers(-8, 8), st.integers(0, 1)), min_size=1, max_size=5),
       st.sampled_from([0.0, 0.5, 1.25]))
def test_rerm_interval_matches_bruteforce(pairs, r):
    S = LabeledSample.of([(x / 2, y) for x, y in pairs])
    h = rerm_ball(IV, S, BallType(r))
    a, b = h.params
    got = np.mean([ball_loss_interval(a, b, x, y, r) for x, y in zip(S.X[:, 0], S.y)])
    assert got == pytest.approx(brute_interval(S, r))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-10, 10), st.integers(0, 1)), min_size=1, max_size=6),
       st.sampled_from(["thresholds", "intervals", "union2"]), st.integers(0, 2))
def test_rerm_beats_every_effective_hypothesis(pairs, kind, k):
    H = make_class(kind)
    S = LabeledSample.of([(x / 2, y) for x, y in pairs])
    T = offsets(k)
    best = robust_losses(H, H.params_of([rerm_finite(H, S, T)]), S, T)[0]
    everyone = robust_losses(H, H.params_of(enumerate_effective(H, S.X, T)), S, T)
    assert best == everyone.min()


def test_effective_behavior_counts():
    X = np.array([[0.0], [1.0], [2.0]])
    _, B = effective_behaviors(TH, X, IDENTITY)
    assert len(B) == 4
    _, B = effective_behaviors(IV, X, IDENTITY)
    assert len(B) == 7
    assert len(enumerate_effective(TH, np.zeros((0, 1)), IDENTITY)) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=8, unique=True),
       st.sampled_from(["thresholds", "intervals", "union2"]))
def test_behaviors_within_sauer(xs, kind):
    H = make_class(kind)
    X = np.array(xs, dtype=float)[:, None]
    _, B = effective_behaviors(H, X, IDENTITY)
    assert len(B) <= sauer_bound(len(xs), H.vc_dim)
    assert len({tuple(b) for b in B}) == len(B)


def test_vc_examples():
    pts = np.array([[0.0], [1.0], [2.0]])
    assert compute_vc(TH, pts) == 1
    assert compute_vc(IV, pts) == 2
    diamond = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]])
    assert compute_vc(RectangleClass(2), diamond) == 4
    assert compute_vc(UnionOfIntervalsClass(), np.arange(6.0)[:, None]) == 4


def test_robust_vc_examples():
    pts = np.array([[0.0], [1.0]])
    assert compute_vc_robust(TH, BallType(0.1), pts) == 1
    assert compute_vc_robust(TH, BallType(1.0), pts) == 1
    for H in (TH, IV):
        P = np.array([[-1.0], [0.0], [2.0], [3.5]])
        assert compute_vc_robust(H, BallType(0.0), P) == compute_vc(H, P)


def test_robust_vc_of_far_points_with_intervals():
    # two points far apart can be robustly shattered by intervals
    assert compute_vc_robust(IV, BallType(1.0), np.array([[0.0], [5.0]])) == 2
    # overlapping balls cannot be split
    assert compute_vc_robust(IV, BallType(1.0), np.array([[0.0], [0.5], [1.0]])) <= 2


def test_max_shattered_by_hand():
    B = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])
    assert max_shattered(B) == 2
    assert max_shattered(np.zeros((1, 3), dtype=int)) == 0


def test_loss_class_vc_identity_equals_vc():
    rng = np.random.default_rng(5)
    for _ in range(10):
        xs = np.unique(rng.integers(-10, 10, size=6)).astype(float)
        cands = [(np.array([x]), 0) for x in xs]
        assert compute_loss_class_vc(TH, IDENTITY, cands) == compute_vc(TH, xs[:, None])


def test_loss_class_vc_two_point_type_thresholds():
    rng = np.random.default_rng(6)
    assert compute_loss_class_vc(TH, IDENTITY, []) == 0
    for _ in range(20):
        xs = rng.integers(-10, 10, size=5).astype(float)
        ys = rng.integers(0, 2, size=5)
        T2 = FinitePerturbation(lambda x: np.stack([x, x + 1.0]), name="pair")
        assert compute_loss_class_vc(TH, T2, list(zip(xs[:, None], ys))) <= 1


def test_caps():
    with pytest.raises(CapExceededError):
        compute_vc(TH, np.arange(40.0)[:, None])


def test_sauer_bound():
    assert sauer_bound(5, 0) == 1
    assert sauer_bound(5, 1) == 6
    assert sauer_bound(4, 2) == 11
    assert sauer_bound(3, 5) == 8


@pytest.mark.parametrize("text", ["threshold t=2.5", "interval a=-1.0 b=3.0", "union2 a1=0.0 b1=1.0 a2=2.0 b2=3.0",
                                  "rectangle lo=(0.0, 1.0) hi=(2.0, 3.0)", "threshold t=inf"])
def test_parse_describe_round_trip(text):
    h = parse_hypothesis(text)
    assert parse_hypothesis(h.describe()).describe() == h.describe()


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_hypothesis("circle r=1")
