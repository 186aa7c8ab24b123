"""Grid covers, induced finite perturbation types and sampled eta-nets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .geometry import BallType, DimensionError, Metric, as_point, as_points, child_rng, point_key, sample_uniform_ball
from .hypotheses import Hypothesis, HypothesisClass, UnsupportedHypothesisError
from .intervals import IntervalSet, q, voronoi_region

MAX_GRID_POINTS = 10**8
_TIE_TOL = 1e-9


class OutsideCoverError(ValueError):
    pass


# ---------------------------------------------------------------------------
# grid covers


@dataclass(frozen=True)
class GridCover:
    """Product grid with equal spacing on every axis, restricted to a box.

    ``axes[i]`` holds the sorted grid values along axis ``i``; the grid is
    their Cartesian product, enumerated in axis-lexicographic order.
    """

    origin: tuple
    spacing: float
    lo: tuple
    hi: tuple
    axes: tuple

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def size(self) -> int:
        return math.prod(len(a) for a in self.axes)

    def points(self) -> np.ndarray:
        return np.array(list(itertools.product(*self.axes)), dtype=float).reshape(-1, self.dim)

    def contains_box(self, x) -> bool:
        x = as_point(x)
        return bool(np.all(x >= np.array(self.lo)) and np.all(x <= np.array(self.hi)))

    def to_text(self) -> str:
        return dump_points(self.points(), "grid")


def _axis_values(lo: float, hi: float, origin: float, s: float) -> np.ndarray:
    k0 = math.ceil((lo - origin) / s - 1e-12)
    k1 = math.floor((hi - origin) / s + 1e-12)
    ks = np.arange(k0, k1 + 1)
    vals = origin + ks * s
    vals = vals[(vals >= lo - 1e-12 * max(1.0, abs(lo))) & (vals <= hi + 1e-12 * max(1.0, abs(hi)))]
    # keep the cover property at the faces when the grid is shifted
    if vals.size == 0 or vals[0] - lo > s / 2:
        vals = np.concatenate([[(vals[0] if vals.size else origin + k0 * s) - s], vals])
    if vals[-1] < hi and hi - vals[-1] > s / 2:
        vals = np.concatenate([vals, [vals[-1] + s]])
    return vals


def build_grid_cover(box, r: float, gamma: float, d: int, offset=None) -> GridCover:
    """Grid with spacing ``2 r gamma / d`` over ``box = (lo, hi)``.

    Every box point is within ``r gamma`` of a grid point in every lp metric,
    since the per-axis gap is at most half the spacing and the l1 sum of d such
    gaps is ``r gamma``. ``offset`` shifts the origin away from the box's min corner.
    """
    if r <= 0 or gamma <= 0:
        raise ValueError("r and gamma must be positive")
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    hi = np.atleast_1d(np.asarray(box[1], dtype=float))
    if lo.shape != (d,) or hi.shape != (d,):
        raise DimensionError(f"box corners must have dimension {d}")
    if not np.all(hi > lo):
        raise ValueError("box must be non-degenerate")
    s = 2.0 * r * gamma / d
    off = np.zeros(d) if offset is None else np.broadcast_to(np.asarray(offset, dtype=float), (d,))
    origin = lo + off
    counts = [math.floor((h - l) / s) + 3 for l, h in zip(lo, hi)]
    need = math.prod(counts)
    if need > MAX_GRID_POINTS:
        raise ValueError(f"grid cover needs about {need} points, above the limit of {MAX_GRID_POINTS}")
    axes = tuple(tuple(_axis_values(l, h, o, s).tolist()) for l, h, o in zip(lo, hi, origin))
    return GridCover(tuple(origin.tolist()), s, tuple(lo.tolist()), tuple(hi.tolist()), axes)


def _nearest_axis(vals: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Index of the nearest value per query, ties to the lower value (exactly)."""
    j = np.clip(np.searchsorted(vals, x), 1, max(vals.size - 1, 1))
    if vals.size == 1:
        return np.zeros(x.shape, dtype=np.int64)
    dl = x - vals[j - 1]
    dh = vals[j] - x
    pick = np.where(dl <= dh, j - 1, j)
    near = np.abs(dl - dh) <= _TIE_TOL * np.maximum(1.0, np.abs(x))
    for i in np.flatnonzero(near):
        xi = Fraction(float(x[i]))
        a, b = Fraction(float(vals[j[i] - 1])), Fraction(float(vals[j[i]]))
        pick[i] = j[i] - 1 if abs(xi - a) <= abs(b - xi) else j[i]
    return pick


def nearest_in_cover_many(cover: GridCover, X, metric: Metric | None = None) -> np.ndarray:
    """Nearest grid point for each row of ``X``; ties go to the lexicographically smallest point."""
    X = as_points(X)
    if X.shape[1] != cover.dim:
        raise DimensionError(f"cover in R^{cover.dim}, points in R^{X.shape[1]}")
    lo, hi = np.array(cover.lo), np.array(cover.hi)
    bad = ~np.all((X >= lo) & (X <= hi), axis=1)
    if bad.any():
        raise OutsideCoverError(f"point {X[np.flatnonzero(bad)[0]]} lies outside the cover box [{cover.lo}, {cover.hi}]")
    out = np.empty_like(X)
    axes = [np.asarray(a) for a in cover.axes]
    # for p < inf the lp distance is a sum of per-axis terms, so the argmin set is
    # the product of per-axis argmins and the lex-smallest takes the lower one on each axis
    for i, vals in enumerate(axes):
        out[:, i] = vals[_nearest_axis(vals, X[:, i])]
    if metric is not None and math.isinf(metric.p) and cover.dim > 1:
        # under l_inf any point within the max per-axis gap is a minimiser
        D = np.abs(out - X).max(axis=1)
        for i, vals in enumerate(axes):
            j = np.searchsorted(vals, X[:, i] - D - _TIE_TOL * np.maximum(1.0, np.abs(X[:, i])))
            j = np.minimum(j, vals.size - 1)
            cand = vals[j]
            ok = np.abs(cand - X[:, i]) <= D + _TIE_TOL * np.maximum(1.0, D)
            out[:, i] = np.where(ok, np.minimum(cand, out[:, i]), out[:, i])
    return out


def nearest_in_cover(cover: GridCover, x, metric: Metric | None = None) -> np.ndarray:
    return nearest_in_cover_many(cover, as_point(x)[None, :], metric)[0]


# ---------------------------------------------------------------------------
# finite perturbation types


class FinitePerturbation:
    """A memoised map from a point to a finite, sorted, deduplicated point set.

    ``k`` is the largest set size seen so far. The memo is an ``lru_cache``,
    which is safe under concurrent use and returns the same arrays as
    sequential queries.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], name: str = "finite", maxsize: int = 1 << 16):
        self.name = name
        self._fn = fn
        self._k = 0
        self._cached = lru_cache(maxsize=maxsize)(self._compute)

    def _compute(self, key: bytes, d: int) -> np.ndarray:
        x = np.frombuffer(key, dtype="<f8").reshape(d).copy()
        pts = as_points(self._fn(x))
        if pts.shape[0]:
            pts = np.unique(pts, axis=0)
        pts.setflags(write=False)
        self._k = max(self._k, pts.shape[0])
        return pts

    def __call__(self, x) -> np.ndarray:
        x = as_point(x)
        return self._cached(x.astype("<f8").tobytes(), x.shape[0])

    @property
    def k(self) -> int:
        return self._k

    def __repr__(self) -> str:
        return f"FinitePerturbation({self.name}, k={self._k})"


def _within_radius(P: np.ndarray, x: np.ndarray, V: BallType) -> np.ndarray:
    dist = V.metric.norm(P - x[None, :], axis=1)
    inside = dist <= V.radius
    if P.shape[1] == 1:
        # settle near-boundary cases exactly in one dimension
        close = np.abs(dist - V.radius) <= _TIE_TOL * max(1.0, V.radius)
        R, xq = q(V.radius), q(x[0])
        for i in np.flatnonzero(close):
            inside[i] = abs(q(P[i, 0]) - xq) <= R
    return inside


def induced_points(cover: GridCover, V: BallType, x) -> np.ndarray:
    """Grid points of ``cover`` inside the closed ball ``V(x)``."""
    x = as_point(x)
    if x.shape[0] != cover.dim:
        raise DimensionError(f"cover in R^{cover.dim}, point in R^{x.shape[0]}")
    ranges = []
    for i, vals in enumerate(cover.axes):
        vals = np.asarray(vals)
        tol = _TIE_TOL * max(1.0, abs(x[i]), V.radius)
        ranges.append(vals[(vals >= x[i] - V.radius - tol) & (vals <= x[i] + V.radius + tol)])
    if any(r.size == 0 for r in ranges):
        return np.zeros((0, cover.dim))
    P = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, cover.dim)
    return P[_within_radius(P, x, V)]


def induced_finite_perturbation(cover: GridCover, V: BallType) -> FinitePerturbation:
    """The type ``C(x) = V(x) ∩ cover``."""
    return FinitePerturbation(lambda x: induced_points(cover, V, x), name=f"grid∩B({V.radius})")


def k_bound(gamma: float, d: int) -> float:
    """Sanity ceiling on ``|C(x)|``: the textbook count times a ``2^d`` alignment slack."""
    return 2.0**d * ((1.0 + gamma) * d / gamma) ** d


# ---------------------------------------------------------------------------
# eta-nets


@dataclass(frozen=True)
class EtaNetSpec:
    eta: float
    vc: int
    c: float = 3.0

    def __post_init__(self):
        e = Fraction(self.eta) if not isinstance(self.eta, Fraction) else self.eta
        if not (0 < e < Fraction(1, 3)):
            raise ValueError(f"eta must lie in (0, 1/3), got {self.eta}")
        if self.vc < 1:
            raise ValueError("VC dimension must be >= 1")
        if self.c <= 0:
            raise ValueError("net constant must be positive")

    @property
    def target_size(self) -> int:
        # the small slack keeps float(1/3)-style inputs from rounding up a whole point
        return max(1, math.ceil(self.c * self.vc / float(self.eta) - 1e-9))


def build_eta_net(center, V: BallType, H: HypothesisClass, spec: EtaNetSpec, rng: np.random.Generator) -> np.ndarray:
    """``spec.target_size`` i.i.d. uniform points of ``V(center)``, sorted; no certificate."""
    pts = sample_uniform_ball(V, center, rng, spec.target_size)
    return np.unique(pts, axis=0)


def verify_eta_net(net, H: HypothesisClass, center, V: BallType, eta: float, mc_samples: int = 1000,
                   rng: np.random.Generator | None = None, mode: str = "mc") -> bool:
    """Check that ``net`` hits every label pre-image of mass at least ``eta`` in ``V(center)``.

    ``mode="mc"`` estimates pre-image masses from ``mc_samples`` uniform probes
    and reports a violation only when an estimate clears ``eta`` by three
    standard errors while the net misses that pre-image; ``True`` is evidence.
    ``mode="exact"`` (1-D classes) computes the supremum of the missed mass in
    closed form and is a certificate either way.
    """
    center = as_point(center)
    net = as_points(net) if len(net) else np.zeros((0, center.shape[0]))
    if mode == "exact":
        if center.shape[0] != 1:
            raise UnsupportedHypothesisError("exact net verification is one-dimensional")
        lo, hi = q(center[0]) - q(V.radius), q(center[0]) + q(V.radius)
        e = q(eta)
        for sup, attained in H.missed_mass_sup(net[:, 0], lo, hi):
            if sup > e or (sup == e and attained):
                return False
        return True
    if mode != "mc":
        raise ValueError(f"unknown verification mode {mode!r}")
    if mc_samples < 100:
        raise ValueError("net verification needs at least 100 Monte Carlo samples")
    if rng is None:
        raise ValueError("Monte Carlo verification needs an rng")
    probes = sample_uniform_ball(V, center, rng, mc_samples)
    P = H.candidates_finite(np.concatenate([probes, net]) if net.shape[0] else probes)
    ones = H.count_ones(P, probes) / mc_samples
    hits1 = H.count_ones(P, net) if net.shape[0] else np.zeros(P.shape[0], dtype=np.int64)
    hits0 = net.shape[0] - hits1
    for mass, hits in ((1.0 - ones, hits0), (ones, hits1)):
        sigma = np.sqrt(mass * (1.0 - mass) / mc_samples)
        if np.any((mass >= eta + 3.0 * sigma) & (hits == 0)):
            return False
    return True


def build_verified_eta_net(center, V: BallType, H: HypothesisClass, spec: EtaNetSpec, rng: np.random.Generator,
                           max_tries: int = 100) -> np.ndarray:
    """Resample until the exact certificate accepts the net (one-dimensional classes)."""
    for _ in range(max_tries):
        net = build_eta_net(center, V, H, spec, rng)
        if verify_eta_net(net, H, center, V, spec.eta, mode="exact"):
            return net
    raise RuntimeError(f"no certified eta-net after {max_tries} draws; raise the net constant")


class EtaNetPerturbation(FinitePerturbation):
    """Per-point eta-nets drawn from a stream keyed by ``(seed, point)``.

    With ``certify`` set, each net is resampled until the exact 1-D check passes.
    """

    def __init__(self, V: BallType, H: HypothesisClass, spec: EtaNetSpec, seed: int, certify: bool = False):
        self.V, self.H, self.spec, self.seed, self.certify = V, H, spec, seed, certify
        super().__init__(self._net, name=f"eta-net({spec.eta:.4g})")

    def _net(self, x: np.ndarray) -> np.ndarray:
        rng = child_rng(self.seed, *point_key(x))
        if self.certify:
            return build_verified_eta_net(x, self.V, self.H, self.spec, rng)
        return build_eta_net(x, self.V, self.H, self.spec, rng)


# ---------------------------------------------------------------------------
# discretised hypotheses


class DiscretizedHypothesis(Hypothesis):
    """``x -> base(nearest cover point of x)``."""

    provenance = "discretized"

    def __init__(self, base: Hypothesis, cover: GridCover, metric: Metric | None = None):
        self.base = base
        self.cover = cover
        self.metric = metric
        self.dim = cover.dim

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return self.base.predict(nearest_in_cover_many(self.cover, X, self.metric))

    def region(self) -> IntervalSet:
        if self.dim != 1:
            return super().region()
        grid = np.asarray(self.cover.axes[0])
        return voronoi_region(grid, self.base.predict(grid[:, None]).tolist())

    def describe(self) -> str:
        return f"nn[{self.base.describe()}]"


# ---------------------------------------------------------------------------
# text format


def dump_points(points, kind: str = "grid") -> str:
    if kind not in ("grid", "net"):
        raise ValueError(f"unknown point-list kind {kind!r}")
    P = as_points(points) if len(points) else np.zeros((0, 1))
    lines = [f"# {kind} v1"] + [" ".join(format(v, ".17g") for v in row) for row in P]
    return "\n".join(lines) + "\n"


def load_points(text: str) -> tuple[str, np.ndarray]:
    lines = text.splitlines()
    if not lines:
        raise ValueError("line 1: missing header")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "#" or head[1] not in ("grid", "net") or head[2] != "v1":
        raise ValueError(f"line 1: expected '# grid v1' or '# net v1', got {lines[0]!r}")
    rows = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split()])
        except ValueError:
            raise ValueError(f"line {no}: not a point: {line!r}") from None
        if len(rows[-1]) != len(rows[0]):
            raise ValueError(f"line {no}: dimension {len(rows[-1])} differs from {len(rows[0])}")
    return head[1], (np.array(rows, dtype=float) if rows else np.zeros((0, 1)))
