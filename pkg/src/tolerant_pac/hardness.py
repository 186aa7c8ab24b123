"""A class with VC dimension 1 that no proper learner learns tolerantly.

Anchors ``x_1..x_n`` sit farther apart than two reference radii. Hypothesis
``h_Z`` labels 1 exactly the points ``x_j + r / p^m`` for ``j`` in ``Z`` and
``1 <= m <= M``, where ``p`` is the prime indexed by ``Z``. Every anchor is
labelled 0 by every member, yet ``h_Z`` has robust loss 1 at ``(x_j, 0)``
exactly when ``j`` is in ``Z``. Points are exact rationals throughout.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .discretization import DiscretizedHypothesis, GridCover, build_grid_cover, induced_finite_perturbation
from .geometry import BallType, child_rng
from .hypotheses import FiniteClass, Hypothesis, LabeledSample, max_shattered, rerm_ball, rerm_finite
from .intervals import IntervalSet, q

MAX_N = 16
MIN_DEPTH = 10
# below this offset (relative to r) distinct sequence points can share a double
FLOAT_OFFSET_FLOOR = Fraction(1, 10**9)


def first_primes(count: int) -> list[int]:
    """The first ``count`` primes by a sieve of Eratosthenes."""
    if count <= 0:
        return []
    bound = 15 if count < 6 else int(count * (math.log(count) + math.log(math.log(count)))) + 1
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(bound**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve)[:count].tolist()


def subsets_in_order(n: int) -> list[tuple[int, ...]]:
    """All subsets of ``{1..n}`` ordered by size, then lexicographically."""
    out = []
    for k in range(n + 1):
        out.extend(itertools.combinations(range(1, n + 1), k))
    return out


class SequenceHypothesis(Hypothesis):
    """``h_Z``: 1 on ``x_j + r / p^m`` for ``j`` in ``Z``, ``m = 1..M``; 0 elsewhere."""

    dim = 1

    def __init__(self, Z: Sequence[int], prime: int, anchors: Sequence[Fraction], r: Fraction, depth: int):
        self.Z = tuple(sorted(Z))
        self.prime = prime
        self.anchors = tuple(anchors)
        self.r = r
        self.depth = depth
        offsets = [r / prime**m for m in range(1, depth + 1)]
        floor = FLOAT_OFFSET_FLOOR * r
        pts, floats = [], []
        # anchors increase and are far apart, offsets shrink with m: reversed offsets give sorted points
        for j in self.Z:
            a = self.anchors[j - 1]
            pts.extend(a + o for o in reversed(offsets))
            # float queries match a point's nearest double, for points far enough out to own their double
            floats.extend(float(a + o) for o in offsets if o >= floor)
        self._exact: frozenset | None = None
        self._floats = frozenset(floats)
        self._region = IntervalSet.sorted_points(pts)

    def sequence_points(self) -> list[Fraction]:
        p, r = self.prime, self.r
        return [self.anchors[j - 1] + r / p**m for j in self.Z for m in range(1, self.depth + 1)]

    @property
    def _points(self) -> frozenset:
        if self._exact is None:
            self._exact = frozenset(p.lo for p in self._region.pieces)
        return self._exact

    def contains(self, x) -> bool:
        """Exact membership for rationals, nearest-double membership for floats."""
        if isinstance(x, Fraction):
            return x in self._points
        return float(x) in self._floats

    def float_points(self) -> frozenset:
        return self._floats

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return np.array([v in self._floats for v in X[:, 0].tolist()], dtype=np.int8)

    def region(self) -> IntervalSet:
        return self._region

    def nearest_offset(self) -> Fraction:
        """Distance from an anchor in ``Z`` to its closest sequence point."""
        return self.r / self.prime**self.depth

    def sort_key(self):
        return (len(self.Z), self.Z)

    def describe(self) -> str:
        return "hZ Z={" + ",".join(map(str, self.Z)) + f"}} p={self.prime}"


@dataclass
class HardnessClass:
    n: int
    r: Fraction
    g: Fraction
    depth: int
    anchors: tuple
    primes: list
    index: dict
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def hypothesis(self, Z) -> SequenceHypothesis:
        Z = tuple(sorted(Z))
        h = self._cache.get(Z)
        if h is None:
            h = self._cache[Z] = SequenceHypothesis(Z, self.primes[self.index[Z]], self.anchors, self.r, self.depth)
        return h

    def members(self, size: int | None = None) -> list[SequenceHypothesis]:
        Zs = subsets_in_order(self.n)
        if size is not None:
            Zs = [Z for Z in Zs if len(Z) == size]
        return [self.hypothesis(Z) for Z in Zs]

    def restricted(self) -> FiniteClass:
        """The half-size members as an explicit finite class."""
        return FiniteClass(self.members(self.n // 2), vc_dim=1, kind=f"hardness-class({self.n})")

    def full(self) -> FiniteClass:
        return FiniteClass(self.members(), vc_dim=1, kind=f"hardness-class-full({self.n})")


def build_hardness_class(n: int, r: float = 1.0, g: float = 0.5, depth: int = 30) -> HardnessClass:
    if n < 2 or n % 2 or n > MAX_N:
        raise ValueError(f"n must be even with 2 <= n <= {MAX_N}, got {n}")
    if depth < MIN_DEPTH:
        raise ValueError(f"sequence depth must be >= {MIN_DEPTH}")
    if r <= 0 or g <= 0:
        raise ValueError("r and g must be positive")
    r, g = q(r), q(g)
    # integer spacing keeps anchors exact as floats
    spacing = math.floor(2 * r * (1 + g)) + 1
    anchors = tuple(Fraction(spacing * j) for j in range(n))
    Zs = subsets_in_order(n)
    return HardnessClass(n, r, g, depth, anchors, first_primes(len(Zs)), {Z: i for i, Z in enumerate(Zs)})


def anchor_spacing_ok(hc: HardnessClass) -> bool:
    a = hc.anchors
    return all(abs(a[i] - a[j]) > 2 * hc.r * (1 + hc.g) for i in range(len(a)) for j in range(i + 1, len(a)))


def uniqueness_violations(hc: HardnessClass, members: Sequence[SequenceHypothesis] | None = None,
                          floats: bool = False) -> int:
    """Number of materialised sequence points claimed by two different members.

    With ``floats`` the points are compared as the doubles that float queries match.
    """
    owner: dict = {}
    bad = 0
    for h in members if members is not None else hc.members():
        for pt in (h.float_points() if floats else h.sequence_points()):
            if pt in owner and owner[pt] != h.Z:
                bad += 1
            owner.setdefault(pt, h.Z)
    return bad


def anchor_robust_loss(h: SequenceHypothesis, j: int, rho) -> int:
    """Exact robust loss of ``h`` at ``(x_j, 0)`` under the closed ball of radius ``rho``."""
    x = h.anchors[j - 1]
    rho = q(rho)
    return int(h.region().meets(x - rho, x + rho))


def verify_hardness_vc(n: int, r: float = 1.0, g: float = 0.5, depth: int = 30) -> tuple[int, int]:
    """``(vc, loss_vc)`` of the full class by exhaustive shattering.

    ``vc`` is taken over the anchors and the first sequence points of several
    members; ``loss_vc`` over the anchors labelled 0 under a ball of radius
    ``r``, which exceeds the truncation radius ``r / 2^M``.
    """
    if n > 8:
        raise ValueError("exhaustive robust shattering is capped at n = 8")
    hc = build_hardness_class(n, r, g, depth)
    members = hc.members()
    pts = list(hc.anchors)
    for h in members[: max(0, 20 - n)]:
        if h.Z:
            pts.append(hc.anchors[h.Z[0] - 1] + hc.r / h.prime)
    B = np.array([[h.contains(x) for x in pts] for h in members], dtype=np.int8)
    L = np.array([[anchor_robust_loss(h, j, hc.r) for j in range(1, n + 1)] for h in members], dtype=np.int8)
    return max_shattered(B), max_shattered(L)


# ---------------------------------------------------------------------------
# proper versus improper demo


def occupancy_pmf(draws: int, cells: int) -> dict[int, Fraction]:
    """Distribution of the number of distinct cells hit by uniform draws with replacement."""
    dist = {0: Fraction(1)}
    for _ in range(draws):
        nxt: dict[int, Fraction] = {}
        for k, pr in dist.items():
            if k < cells:
                nxt[k + 1] = nxt.get(k + 1, 0) + pr * Fraction(cells - k, cells)
            if k > 0:
                nxt[k] = nxt.get(k, 0) + pr * Fraction(k, cells)
        dist = nxt
    return dist


def proper_loss_oracle(n: int) -> tuple[float, float]:
    """Mean and standard deviation of the proper learner's per-trial loss.

    Given ``k`` distinct observed anchors, the learner's ``n/2``-set avoids
    them and the rest of the support is a uniform ``(n/2 - k)``-subset of the
    ``n - k`` unobserved anchors, so the overlap is hypergeometric.
    """
    half, draws = n // 2, n // 4
    mean = Fraction(0)
    second = Fraction(0)
    for k, pr in occupancy_pmf(draws, half).items():
        N, K, m = n - k, half - k, half
        mu = Fraction(m * K, N)
        var = Fraction(m * K * (N - K) * (N - m), N * N * (N - 1)) if N > 1 else Fraction(0)
        mean += pr * mu / half
        second += pr * (var + mu * mu) / (half * half)
    return float(mean), math.sqrt(float(second - mean * mean))


@dataclass(frozen=True)
class DemoRow:
    trial: int
    proper_loss: float
    improper_loss: float


@dataclass
class DemoReport:
    n: int
    rows: list
    oracle_mean: float
    oracle_sd: float

    @property
    def proper_mean(self) -> float:
        return float(np.mean([r.proper_loss for r in self.rows]))

    @property
    def improper_mean(self) -> float:
        return float(np.mean([r.improper_loss for r in self.rows]))

    @property
    def proper_z(self) -> float:
        se = self.oracle_sd / math.sqrt(len(self.rows))
        return (self.proper_mean - self.oracle_mean) / se if se > 0 else 0.0


def _support_loss(h: Hypothesis, hc: HardnessClass, support: Sequence[int], U: BallType) -> float:
    reg = h.region()
    rho = q(U.radius)
    hits = sum(reg.meets(hc.anchors[j - 1] - rho, hc.anchors[j - 1] + rho) for j in support)
    return hits / len(support)


def _sequence_prime(hc: HardnessClass, x: Fraction) -> int | None:
    """The prime ``p`` with ``x = x_j + r / p^m`` for some anchor and ``1 <= m <= M``, if any."""
    j = min(range(hc.n), key=lambda i: abs(x - hc.anchors[i]))
    off = x - hc.anchors[j]
    if off <= 0:
        return None
    t = hc.r / off
    if t.denominator != 1:
        return None
    t = t.numerator
    for m in range(1, hc.depth + 1):
        root = round(t ** (1.0 / m))
        for c in (root - 1, root, root + 1):
            if c >= 2 and c**m == t and all(c % d for d in range(2, math.isqrt(c) + 1)):
                return c
        if root < 2:
            break
    return None


def demo_cover(hc: HardnessClass) -> GridCover:
    """Grid over the anchors, shifted so that no grid point is a sequence point."""
    s = 2 * float(hc.r * hc.g)
    pad = 2 * float(hc.r * (1 + hc.g))
    lo, hi = float(hc.anchors[0]) - pad, float(hc.anchors[-1]) + pad
    cover = build_grid_cover(([lo], [hi]), float(hc.r), float(hc.g), 1, offset=0.3 * s)
    members = hc.members(hc.n // 2)
    used = {h.prime for h in members}
    floats = set().union(*(h.float_points() for h in members))
    for v in cover.axes[0]:
        if v in floats or _sequence_prime(hc, Fraction(v)) in used:
            raise RuntimeError("grid meets a sequence point; change the offset")
    return cover


def demo_trial(hc: HardnessClass, H: FiniteClass, cover: GridCover, trial: int, seed: int) -> DemoRow:
    rng = child_rng(seed, trial)
    n = hc.n
    support = sorted(rng.choice(np.arange(1, n + 1), size=n // 2, replace=False).tolist())
    draws = rng.choice(support, size=max(1, n // 4), replace=True)
    S = LabeledSample(np.array([float(hc.anchors[j - 1]) for j in draws]), np.zeros(len(draws)))
    U = BallType(float(hc.r))
    V = BallType(float(hc.r * (1 + hc.g)))
    proper = rerm_ball(H, S, V)
    h_hat = rerm_finite(H, S, induced_finite_perturbation(cover, V))
    improper = DiscretizedHypothesis(h_hat, cover, V.metric)
    return DemoRow(trial, _support_loss(proper, hc, support, U), _support_loss(improper, hc, support, U))


@lru_cache(maxsize=8)
def _demo_setup(n: int, r: float, g: float, depth: int):
    hc = build_hardness_class(n, r, g, depth)
    return hc, hc.restricted(), demo_cover(hc)


def _demo_job(args) -> DemoRow:
    n, r, g, depth, trial, seed = args
    hc, H, cover = _demo_setup(n, r, g, depth)
    return demo_trial(hc, H, cover, trial, seed)


def proper_vs_improper_demo(n: int, trials: int, seed: int = 0, r: float = 1.0, g: float = 0.5,
                            depth: int = 30, workers: int = 1) -> DemoReport:
    """Proper robust ERM over the half-size members against the grid learner, on random anchor supports."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _demo_setup(n, r, g, depth)
    jobs = [(n, r, g, depth, t, seed) for t in range(trials)]
    if workers <= 1:
        rows = [_demo_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_demo_job, jobs))
    mean, sd = proper_loss_oracle(n)
    return DemoReport(n, rows, mean, sd)
