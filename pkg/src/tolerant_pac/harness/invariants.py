"""Randomised invariant suites with machine-readable reports.

Each check draws its own cases from a stream keyed by the suite seed and the
check's position, and returns ``(cases, violations)`` along with counters of
non-trivial cases where that is informative.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..discretization import (DiscretizedHypothesis, EtaNetSpec, build_grid_cover, build_verified_eta_net,
                              induced_finite_perturbation, nearest_in_cover_many)
from ..geometry import (BallType, Metric, ball_contains, child_rng, eta_for_tolerance, lp_distance,
                        overlap_fraction_exact, sample_uniform_ball, tolerance_types)
from ..hardness import anchor_robust_loss, anchor_spacing_ok, build_hardness_class, uniqueness_violations
from ..hypotheses import (IntervalClass, LabeledSample, RectangleClass, ThresholdClass, UnionOfIntervalsClass,
                          compute_vc_robust, effective_behaviors, sauer_bound)
from ..intervals import q
from ..learners import (LearnerConfig, agnostic_candidates, check_pairwise_disagreement, check_prune_witnesses,
                        realizable_candidates, ssl_agnostic, ssl_realizable)
from ..losses import PartialLabel, adversarial_loss_ball, adversarial_loss_finite, margin_loss, partial_disagreement_loss, partial_label, smooth

SUITES = ("geometry", "losses", "chains", "sauer", "hardness", "ssl")
DYADIC_R = (0.5, 1.0, 2.0)
DYADIC_GAMMA = (0.25, 0.5, 1.0)
CLASSES_1D = (ThresholdClass(), IntervalClass(), UnionOfIntervalsClass())


@dataclass
class CheckResult:
    name: str
    cases: int
    violations: int
    detail: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# random instances


def _coord(rng: np.random.Generator, lo: float, hi: float) -> float:
    # a quarter of the draws land on a 1/16 lattice so exact ties actually occur
    v = rng.uniform(lo, hi)
    return round(v * 16) / 16 if rng.uniform() < 0.25 else v


def random_hypothesis(H, rng: np.random.Generator, lo: float = -6.0, hi: float = 6.0):
    if H.kind == "thresholds":
        return H.make([_coord(rng, lo, hi)])
    if H.kind == "intervals":
        a, b = sorted(_coord(rng, lo, hi) for _ in range(2))
        return H.make([a, b])
    if H.kind == "union2":
        a1, b1, a2, b2 = sorted(_coord(rng, lo, hi) for _ in range(4))
        if b1 == a2:
            return H.make([a1, b2, math.inf, -math.inf])
        return H.make([a1, b1, a2, b2])
    if H.kind == "rectangles":
        c = np.sort(rng.uniform(lo, hi, size=(2, H.dim)), axis=0)
        return H.make(list(c[0]) + list(c[1]))
    raise ValueError(H.kind)


def random_finite_type(rng: np.random.Generator, k: int, spread: float = 2.0):
    """An arbitrary finite type: ``x -> x + k fixed random offsets`` (offsets drawn once)."""
    offs = np.sort(rng.uniform(-spread, spread, size=k))
    return lambda x: (np.asarray(x, dtype=float)[0] + offs)[:, None]


# ---------------------------------------------------------------------------
# geometry


def check_triangle(rng, budget) -> CheckResult:
    bad = 0
    for _ in range(budget):
        d = int(rng.integers(1, 5))
        m = Metric(float(rng.choice([1.0, 2.0, 3.0, math.inf])))
        x, y, z = rng.normal(size=(3, d)) * rng.uniform(0.1, 10)
        bad += lp_distance(x, z, m) > lp_distance(x, y, m) + lp_distance(y, z, m) + 1e-12 * (1 + abs(lp_distance(x, z, m)))
    return CheckResult("triangle-inequality", budget, int(bad))


def check_inflation(rng, budget) -> CheckResult:
    bad = 0
    for _ in range(budget):
        d = int(rng.integers(1, 4))
        p = float(rng.choice([1.0, 2.0, math.inf]))
        U, V, W = tolerance_types(float(rng.uniform(0.1, 3)), float(rng.uniform(0.05, 2)), p)
        x = rng.normal(size=d)
        z = sample_uniform_ball(U, x, rng)
        w = sample_uniform_ball(W, z, rng)
        bad += not ball_contains(BallType(V.radius * (1 + 1e-12), V.metric), x, w)
    return CheckResult("inflation-containment", budget, int(bad))


def check_nesting(rng, budget) -> CheckResult:
    bad = 0
    for _ in range(budget):
        d = int(rng.integers(1, 4))
        m = Metric(float(rng.choice([1.0, 2.0, math.inf])))
        r1, r2 = sorted(rng.uniform(0, 3, size=2))
        x, z = rng.normal(size=(2, d))
        bad += ball_contains(BallType(r1, m), x, z) and not ball_contains(BallType(r2, m), x, z)
    return CheckResult("monotone-nesting", budget, int(bad))


# ---------------------------------------------------------------------------
# losses


def check_partial_vs_margin(rng, budget) -> CheckResult:
    bad = 0
    for i in range(budget):
        H = CLASSES_1D[i % 3]
        h = random_hypothesis(H, rng)
        T = random_finite_type(rng, int(rng.integers(1, 6)))
        x = _coord(rng, -6, 6)
        bad += (partial_label(h, T, x) is PartialLabel.STAR) != bool(margin_loss(h, T, x))
    return CheckResult("partial-label-iff-margin", budget, int(bad))


def check_partial_bound(rng, budget) -> CheckResult:
    """``|l^C(h1,x,y) - l^C(h2,x,y)| <= l^par(h1,h2,x)`` pointwise."""
    bad = 0
    informative = 0
    cover = build_grid_cover(([-12.0], [12.0]), 1.0, 0.5, 1)
    grid_C = induced_finite_perturbation(cover, BallType(1.5))
    for i in range(budget):
        H = CLASSES_1D[i % 3]
        h1, h2 = random_hypothesis(H, rng), random_hypothesis(H, rng)
        C = grid_C if i % 2 else random_finite_type(rng, int(rng.integers(1, 8)))
        x, y = _coord(rng, -6, 6), int(rng.integers(0, 2))
        gap = abs(adversarial_loss_finite(h1, C, x, y) - adversarial_loss_finite(h2, C, x, y))
        par = partial_disagreement_loss(h1, h2, C, x)
        informative += par == 0
        bad += gap > par
    return CheckResult("partial-disagreement-bound", budget, int(bad), {"agreeing_cases": int(informative)})


def check_loss_monotonicity(rng, budget) -> CheckResult:
    bad = 0
    for i in range(budget):
        H = CLASSES_1D[i % 3]
        h = random_hypothesis(H, rng)
        r1, r2 = sorted(float(v) for v in rng.uniform(0, 3, size=2))
        x, y = _coord(rng, -6, 6), int(rng.integers(0, 2))
        l1 = adversarial_loss_ball(h, BallType(r1), x, y).value
        l2 = adversarial_loss_ball(h, BallType(r2), x, y).value
        bad += l1 > l2
    return CheckResult("loss-monotonicity", budget, int(bad))


# ---------------------------------------------------------------------------
# chains


def check_discretization_chain(rng, budget, per_h: int = 25) -> CheckResult:
    """``l^U(nn_C(h)) <= l^C(h) <= l^V(h)`` with every term exact, one-dimensional classes."""
    bad = 0
    tight = 0
    cases = 0
    while cases < budget:
        r, g = float(rng.choice(DYADIC_R)), float(rng.choice(DYADIC_GAMMA))
        U, V, _ = tolerance_types(r, g)
        cover = build_grid_cover(([-12.0], [12.0]), r, g, 1, offset=float(rng.choice([0.0, 0.3])) * 2 * r * g)
        C = induced_finite_perturbation(cover, V)
        H = CLASSES_1D[int(rng.integers(0, 3))]
        h = random_hypothesis(H, rng)
        nn = DiscretizedHypothesis(h, cover)
        for _ in range(min(per_h, budget - cases)):
            x, y = _coord(rng, -6, 6), int(rng.integers(0, 2))
            lu = adversarial_loss_ball(nn, U, x, y).value
            lc = adversarial_loss_finite(h, C, x, y)
            lv = adversarial_loss_ball(h, V, x, y).value
            bad += not (lu <= lc <= lv)
            tight += lc == 0
            cases += 1
    return CheckResult("discretization-chain-1d", cases, int(bad), {"zero_c_loss_cases": int(tight)})


def check_discretization_chain_2d(rng, budget, grid_n: int = 9) -> CheckResult:
    """Same chain for rectangles in the plane; the outer term is a sound probe."""
    r, g = 1.0, 0.5
    U, V, _ = tolerance_types(r, g)
    cover = build_grid_cover(([-5.0, -5.0], [5.0, 5.0]), r, g, 2)
    C = induced_finite_perturbation(cover, V)
    H = RectangleClass(2)
    bad = 0
    cases = 0
    tight = 0
    while cases < budget:
        h = random_hypothesis(H, rng, -3, 3)
        nn = DiscretizedHypothesis(h, cover, V.metric)
        P = np.array([h.params])
        for _ in range(min(20, budget - cases)):
            x = np.array([_coord(rng, -3, 3), _coord(rng, -3, 3)])
            y = int(rng.integers(0, 2))
            lu = adversarial_loss_ball(nn, U, x, y, mode="probe", grid_n=grid_n).value
            lc = adversarial_loss_finite(h, C, x, y)
            lv = int(H.partial_ball(P, x[None, :], V)[0, 0] != y)
            bad += not (lu <= lc <= lv)
            tight += lc == 0
            cases += 1
    return CheckResult("discretization-chain-2d-probe", cases, int(bad), {"zero_c_loss_cases": int(tight)})


def check_triangle_chain(rng, budget) -> CheckResult:
    """The nearest cover point of any ``z`` in ``U(x)`` lies in ``C(x)``."""
    bad = 0
    for i in range(budget):
        d = 1 + i % 2
        r, g = float(rng.choice(DYADIC_R)), float(rng.choice(DYADIC_GAMMA))
        U, V, _ = tolerance_types(r, g, float(rng.choice([1.0, 2.0, math.inf])))
        box = (np.full(d, -8.0), np.full(d, 8.0))
        cover = _cached_cover(box, r, g, d)
        x = rng.uniform(-4, 4, size=d)
        z = sample_uniform_ball(U, x, rng)
        c = nearest_in_cover_many(cover, z[None, :], V.metric)[0]
        bad += not ball_contains(V, x, c)
    return CheckResult("triangle-chain", budget, int(bad))


_COVERS: dict = {}


def _cached_cover(box, r, g, d):
    key = (tuple(box[0]), tuple(box[1]), r, g, d)
    if key not in _COVERS:
        _COVERS[key] = build_grid_cover(box, r, g, d)
    return _COVERS[key]


def check_cover_property(rng, budget) -> CheckResult:
    bad = 0
    for i in range(budget):
        d = 1 + i % 3
        r, g = float(rng.choice(DYADIC_R)), float(rng.choice(DYADIC_GAMMA))
        cover = _cached_cover((np.full(d, -3.0), np.full(d, 3.0)), r, g, d)
        x = rng.uniform(-3, 3, size=d)
        c = nearest_in_cover_many(cover, x[None, :])[0]
        bad += lp_distance(x, c, Metric(1.0)) > r * g + 1e-12
    return CheckResult("cover-property", budget, int(bad))


def check_smoothing_chain(rng, budget, per_x: int = 50) -> CheckResult:
    """``l^U(sm_W(h)) <= l^C(h)`` with ``C(x)`` a certified eta-net of ``V(x)``, all exact."""
    bad = 0
    tight = 0
    cases = 0
    premise_ok = True
    while cases < budget:
        r, g = float(rng.choice(DYADIC_R)), float(rng.choice(DYADIC_GAMMA))
        U, V, W = tolerance_types(r, g)
        eta = eta_for_tolerance(g, 1)
        premise_ok &= 3 * q(eta) <= overlap_fraction_exact(g, 1)
        H = CLASSES_1D[int(rng.integers(0, 3))]
        spec = EtaNetSpec(eta, H.vc_dim)
        x = _coord(rng, -4, 4)
        net = build_verified_eta_net([x], V, H, spec, rng)
        C = lambda _x, net=net: net
        for _ in range(min(per_x, budget - cases)):
            # hypotheses placed around x so that the net often sees one label only
            h = random_hypothesis(H, rng, x - 2 * V.radius, x + 2 * V.radius)
            y = int(rng.integers(0, 2))
            lc = adversarial_loss_finite(h, C, x, y)
            lu = adversarial_loss_ball(smooth(h, W, mode="exact"), U, x, y).value
            bad += lu > lc
            tight += lc == 0
            cases += 1
    return CheckResult("smoothing-chain-1d", cases, int(bad) + (0 if premise_ok else 1),
                       {"zero_c_loss_cases": int(tight), "premise_holds": bool(premise_ok)})


# ---------------------------------------------------------------------------
# sauer


def check_effective_sauer(rng, budget) -> CheckResult:
    bad = 0
    for i in range(budget):
        H = CLASSES_1D[i % 3]
        n = int(rng.integers(0, 9))
        X = np.array([_coord(rng, -6, 6) for _ in range(n)])[:, None]
        _, B = effective_behaviors(H, X, BallType(0.0))
        bad += B.shape[0] > sauer_bound(n, H.vc_dim)
    return CheckResult("behaviours-within-sauer", budget, int(bad))


def check_hprime_sauer(rng, budget) -> CheckResult:
    """``|H'| <= sum_{i <= VC_V} C(n, i)`` with ``VC_V`` exhaustive on the unlabelled points."""
    bad = 0
    for i in range(budget):
        H = (ThresholdClass(), IntervalClass())[i % 2]
        cfg = LearnerConfig(1.0, 0.5, hclass=H.kind, labeling_loop="batched")
        _, V, _ = cfg.types
        n = int(rng.integers(3, 15))
        X = np.round(rng.uniform(-10, 10, size=n) * 4)[:, None] / 4
        Hp = realizable_candidates(H, X, V, cfg)
        vc_v = compute_vc_robust(H, V, X)
        bad += Hp.shape[0] > sauer_bound(n, vc_v)
    return CheckResult("h-prime-within-sauer", budget, int(bad))


# ---------------------------------------------------------------------------
# hardness


def check_hardness(rng, budget) -> list[CheckResult]:
    res = []
    n_list = [n for n in (2, 4, 6, 8) if n <= max(2, budget)]
    uniq = sum(uniqueness_violations(build_hardness_class(n)) for n in n_list)
    res.append(CheckResult("hardness-uniqueness", len(n_list), uniq))
    spacing = sum(not anchor_spacing_ok(build_hardness_class(n, r, g)) for n in n_list
                  for r, g in ((1.0, 0.5), (0.3, 2.0), (2.5, 0.1)))
    res.append(CheckResult("hardness-anchor-spacing", 3 * len(n_list), int(spacing)))
    bad = 0
    cases = 0
    for _ in range(budget):
        n = int(rng.choice(n_list))
        hc = build_hardness_class(n)
        Z = tuple(sorted(rng.choice(np.arange(1, n + 1), size=int(rng.integers(0, n + 1)), replace=False).tolist()))
        h = hc.hypothesis(Z)
        j = int(rng.integers(1, n + 1))
        for rho in (h.nearest_offset(), hc.r / 2**hc.depth * 2, hc.r):
            if rho >= h.nearest_offset():
                bad += anchor_robust_loss(h, j, rho) != (j in Z)
                cases += 1
        bad += anchor_robust_loss(h, j, h.nearest_offset() / 2) != 0
        cases += 1
    res.append(CheckResult("hardness-loss-trigger", cases, int(bad)))
    return res


# ---------------------------------------------------------------------------
# semi-supervised


def _ssl_instance(rng, H):
    n = int(rng.integers(4, 11))
    X_u = np.round(rng.uniform(-6, 6, size=n) * 2)[:, None] / 2
    m = int(rng.integers(3, 12))
    X_l = np.round(rng.uniform(-6, 6, size=m) * 2) / 2
    return X_u, X_l


def check_ssl_agnostic(rng, budget) -> CheckResult:
    """Every pruned set is pairwise robustly disagreeing and every pruned candidate has a witness."""
    bad = 0
    for i in range(budget):
        H = (ThresholdClass(), IntervalClass())[i % 2]
        cfg = LearnerConfig(1.0, 0.5, hclass=H.kind, labeling_loop="batched")
        _, V, _ = cfg.types
        X_u, X_l = _ssl_instance(rng, H)
        cover = cfg.cover([-6.0], [6.0])
        S_l = LabeledSample(X_l, rng.integers(0, 2, size=X_l.shape[0]))
        out = ssl_agnostic(S_l, X_u, cover, cfg, H)
        B, pr = out.audit["behaviors"], out.audit["prune"]
        ok = check_pairwise_disagreement(B[pr.kept]) and check_prune_witnesses(B, pr) and len(pr.kept) >= 1
        bad += not ok
    return CheckResult("ssl-agnostic-pruning", budget, int(bad))


def check_ssl_loops(rng, budget) -> CheckResult:
    """Literal, batched and sweep labelling loops build the same candidate sets."""
    bad = 0
    for i in range(budget):
        H = (ThresholdClass(), IntervalClass())[i % 2]
        X_u, _ = _ssl_instance(rng, H)
        X_u = X_u[:8]
        base = LearnerConfig(1.0, 0.5, hclass=H.kind)
        _, V, _ = base.types
        cover = base.cover([-6.0], [6.0])
        C = induced_finite_perturbation(cover, V)
        outs = []
        for loop in ("literal", "batched", "sweep"):
            cfg = LearnerConfig(1.0, 0.5, hclass=H.kind, labeling_loop=loop)
            outs.append((realizable_candidates(H, X_u, V, cfg).tobytes(), agnostic_candidates(H, X_u, C, cfg)[0].tobytes()))
        bad += len(set(outs)) != 1
    return CheckResult("labeling-loop-identity", budget, int(bad))


def check_ssl_realizable_zero(rng, budget) -> CheckResult:
    """On robustly realisable data the learner's empirical C-loss on the labelled part is 0 when some H' member's is."""
    bad = 0
    for i in range(budget):
        H = (ThresholdClass(), IntervalClass())[i % 2]
        cfg = LearnerConfig(1.0, 0.5, hclass=H.kind, labeling_loop="batched")
        _, V, _ = cfg.types
        target = random_hypothesis(H, rng, -4, 4)
        X_u, X_l = _ssl_instance(rng, H)
        cover = cfg.cover([-6.0], [6.0])
        S_l = LabeledSample(X_l, target.predict(X_l[:, None]))
        try:
            out = ssl_realizable(S_l, X_u, cover, cfg, H)
        except ValueError:
            continue
        C = out.audit["C"]
        zero = [all(adversarial_loss_finite(h, C, x, y) == 0 for x, y in S_l) for h in out.audit["H_prime"]]
        mine = all(adversarial_loss_finite(out.base, C, x, y) == 0 for x, y in S_l)
        bad += any(zero) and not mine
    return CheckResult("ssl-realizable-exact-on-h-prime", budget, int(bad))


# ---------------------------------------------------------------------------
# driver


def _scaled(budget: int, divisor: int) -> int:
    return max(1, budget // divisor)


SUITE_CHECKS: dict[str, list[tuple[Callable, int]]] = {
    "geometry": [(check_triangle, 1), (check_inflation, 1), (check_nesting, 1), (check_cover_property, 1)],
    "losses": [(check_partial_vs_margin, 1), (check_partial_bound, 1), (check_loss_monotonicity, 1)],
    "chains": [(check_discretization_chain, 1), (check_discretization_chain_2d, 1), (check_triangle_chain, 1),
               (check_smoothing_chain, 1)],
    "sauer": [(check_effective_sauer, 10), (check_hprime_sauer, 100)],
    "hardness": [(check_hardness, 100)],
    "ssl": [(check_ssl_agnostic, 200), (check_ssl_loops, 500), (check_ssl_realizable_zero, 200)],
}


def verify_invariants(suite: str, budget: int = 10000, seed: int = 0) -> dict:
    """Run a suite with ``budget`` base cases; returns a JSON-ready report."""
    if suite not in SUITE_CHECKS:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    results: list[CheckResult] = []
    if budget > 0:
        for idx, (fn, divisor) in enumerate(SUITE_CHECKS[suite]):
            out = fn(child_rng(seed, idx), _scaled(budget, divisor))
            results.extend(out if isinstance(out, list) else [out])
    violations = sum(r.violations for r in results)
    return {
        "suite": suite,
        "budget": budget,
        "seed": seed,
        "checks": [asdict(r) for r in results],
        "violations": violations,
        "passed": violations == 0,
    }
