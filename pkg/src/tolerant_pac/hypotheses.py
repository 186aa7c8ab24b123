"""Hypothesis classes, exact (robust) ERM oracles and brute-force VC oracles.

Every built-in parametric class is handled through three vectorised hooks:
``predict_params`` (labels of many parameter rows on many points),
``partial_ball`` (robust partial labels under a closed ball) and the
candidate generators. A candidate generator returns a finite parameter set
that is complete for the question being asked: every achievable value of the
empirical robust loss (``candidates_finite`` / ``candidates_ball``) or every
achievable partial-label behaviour (``candidates_effective_ball``) is attained
by some row. Candidate sets are sorted lexicographically, so the first
minimiser is the canonical one.

Partial labels are encoded as int8: 0, 1, or ``STAR`` (= 2) when the
hypothesis is not constant on the perturbation set.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .geometry import BallType, DimensionError, as_point, as_points
from .intervals import INF, IntervalSet, Piece, q

STAR = 2
MAX_CANDIDATES = 10**7
MAX_ENUM_POINTS = 22
MAX_VC_POINTS = 20
MAX_LOSS_VC_POINTS = 15
_CHUNK = 1 << 14


class UnsupportedHypothesisError(TypeError):
    """Raised when an exact operation is asked of a hypothesis or class that cannot support it."""


class CandidateExplosionError(RuntimeError):
    pass


class CapExceededError(ValueError):
    pass


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class LabeledSample:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = as_points(self.X)
        y = np.asarray(self.y, dtype=np.int8).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} points but {y.shape[0]} labels")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def of(cls, pairs) -> "LabeledSample":
        pairs = list(pairs)
        if not pairs:
            return cls(np.zeros((0, 1)), np.zeros(0))
        return cls(np.array([as_point(x) for x, _ in pairs]), np.array([y for _, y in pairs]))

    def __len__(self) -> int:
        return self.y.shape[0]

    def __iter__(self):
        return zip(self.X, self.y.tolist())

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def with_labels(self, y) -> "LabeledSample":
        return LabeledSample(self.X, y)

    def head(self, m: int) -> "LabeledSample":
        return LabeledSample(self.X[:m], self.y[:m])


# ---------------------------------------------------------------------------
# hypotheses


class Hypothesis:
    """A total map from points to {0, 1}.

    Subclasses implement ``predict``; one-dimensional ones may also expose
    ``region()``, the exact set labelled 1, which the exact loss evaluators use.
    """

    provenance = "in-class"
    dim = 1

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> int:
        x = as_point(x)
        if x.shape[0] != self.dim:
            raise DimensionError(f"hypothesis on R^{self.dim} evaluated at a point of R^{x.shape[0]}")
        return int(self.predict(x[None, :])[0])

    def region(self) -> IntervalSet:
        raise UnsupportedHypothesisError(f"{type(self).__name__} has no exact 1-D region")

    def describe(self) -> str:
        return repr(self)

    def _check(self, X) -> np.ndarray:
        X = as_points(X)
        if X.shape[1] != self.dim:
            raise DimensionError(f"hypothesis on R^{self.dim} evaluated on points of R^{X.shape[1]}")
        return X


@dataclass(frozen=True, eq=True)
class ParamHypothesis(Hypothesis):
    """A member of a parametric class, identified by its parameter tuple."""

    hclass: "HypothesisClass" = field(compare=True, repr=False)
    params: tuple = ()

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.hclass.dim

    @property
    def kind(self) -> str:
        return self.hclass.kind

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return self.hclass.predict_params(np.array([self.params], dtype=float), X)[0].astype(np.int8)

    def region(self) -> IntervalSet:
        return self.hclass.region_of(self.params)

    def describe(self) -> str:
        return self.hclass.describe(self.params)

    def __repr__(self) -> str:
        return f"<{self.describe()}>"


class ConstantHypothesis(Hypothesis):
    def __init__(self, label: int, dim: int = 1):
        self.label = int(label)
        self.dim = dim

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return np.full(X.shape[0], self.label, dtype=np.int8)

    def region(self) -> IntervalSet:
        if self.dim != 1:
            return super().region()
        return IntervalSet.everything() if self.label else IntervalSet()

    def describe(self) -> str:
        return f"constant y={self.label}"


class LookupHypothesis(Hypothesis):
    """Explicit finite table of 1-labelled points; everything else gets ``default``."""

    def __init__(self, ones: Sequence, dim: int = 1, name: str = "lookup"):
        self.dim = dim
        self.name = name
        self._ones = {tuple(as_point(p).tolist()) for p in ones}

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        return np.array([tuple(row.tolist()) in self._ones for row in X], dtype=np.int8)

    def region(self) -> IntervalSet:
        if self.dim != 1:
            return super().region()
        return IntervalSet.points(p[0] for p in self._ones)

    def sort_key(self):
        return (self.name, tuple(sorted(self._ones)))

    def describe(self) -> str:
        pts = " ".join(repr(p[0]) if self.dim == 1 else repr(p) for p in sorted(self._ones))
        return f"{self.name} ones=[{pts}]"


# ---------------------------------------------------------------------------
# classes


class HypothesisClass:
    kind: str = "abstract"
    vc_dim: int = 0
    dim: int = 1
    n_params: int = 0

    # -- evaluation -----------------------------------------------------
    def predict_params(self, P: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def partial_ball(self, P: np.ndarray, X: np.ndarray, ball: BallType) -> np.ndarray:
        raise UnsupportedHypothesisError(f"{self.kind}: no exact ball oracle; use a finite perturbation")

    def count_ones(self, P: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Number of points labelled 1 by each parameter row."""
        out = np.empty(P.shape[0], dtype=np.int64)
        for s in range(0, P.shape[0], _CHUNK):
            out[s : s + _CHUNK] = self.predict_params(P[s : s + _CHUNK], pts).sum(axis=1)
        return out

    # -- candidates -----------------------------------------------------
    def candidates_finite(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def candidates_ball(self, X: np.ndarray, radius: float) -> np.ndarray:
        raise UnsupportedHypothesisError(f"{self.kind}: no ball RERM; use rerm_finite")

    def candidates_effective_ball(self, X: np.ndarray, radius: float) -> np.ndarray:
        raise UnsupportedHypothesisError(f"{self.kind}: no exact behaviour enumeration under balls")

    # -- hypotheses -----------------------------------------------------
    def make(self, params) -> Hypothesis:
        return ParamHypothesis(self, tuple(float(v) for v in params))

    def params_of(self, hyps: Sequence[Hypothesis]) -> np.ndarray:
        return np.array([h.params for h in hyps], dtype=float).reshape(len(hyps), self.n_params)

    def region_of(self, params) -> IntervalSet:
        raise UnsupportedHypothesisError(f"{self.kind} has no exact 1-D region")

    def describe(self, params) -> str:
        return f"{self.kind} " + " ".join(map(repr, params))

    def missed_mass_sup(self, net: np.ndarray, lo, hi):
        """Exact supremum of the V-mass of a label pre-image that misses ``net``.

        ``net`` holds sorted 1-D points inside ``[lo, hi]``. Returns
        ``((sup0, attained0), (sup1, attained1))`` as fractions of ``hi - lo``.
        """
        raise UnsupportedHypothesisError(f"{self.kind}: no exact net certificate")

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, self.dim))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


def _unique_rows(P: np.ndarray) -> np.ndarray:
    if P.shape[0] == 0:
        return P
    return np.unique(P, axis=0)


def _cell_reps(E: np.ndarray, interior: int = 1) -> np.ndarray:
    """Representatives of every cell of the line cut at the sorted points ``E``.

    Cells are the points themselves and the open gaps between them; any
    predicate built from comparisons of a parameter with elements of ``E`` is
    constant on a cell.
    """
    E = np.unique(E[np.isfinite(E)])
    if E.size == 0:
        return np.array([-INF, 0.0, INF])
    reps = [np.array([-INF, E[0] - 2.0, E[0] - 1.0]), E, np.array([E[-1] + 1.0, E[-1] + 2.0, INF])]
    if E.size > 1:
        gaps = np.diff(E)
        for k in range(1, interior + 1):
            reps.append(E[:-1] + gaps * (k / (interior + 1)))
    return np.unique(np.concatenate(reps))


def _check_count(n: int, what: str) -> None:
    if n > MAX_CANDIDATES:
        raise CandidateExplosionError(f"{what}: {n} candidates exceeds the cap of {MAX_CANDIDATES}")


def _interval_pairs(v: np.ndarray) -> np.ndarray:
    v = np.unique(v)
    _check_count(v.size * (v.size + 1) // 2, "interval candidates")
    i, j = np.triu_indices(v.size)
    return np.column_stack([v[i], v[j]])


def _sorted_finite(net, lo, hi):
    pts = sorted(q(v) for v in np.asarray(net, dtype=float).reshape(-1))
    return pts, q(lo), q(hi)


class ThresholdClass(HypothesisClass):
    """``h_t(x) = 1{x >= t}`` on the real line."""

    kind = "thresholds"
    vc_dim = 1
    dim = 1
    n_params = 1

    def predict_params(self, P, X):
        return X[:, 0][None, :] >= P[:, 0][:, None]

    def partial_ball(self, P, X, ball):
        x = X[:, 0][None, :]
        t = P[:, 0][:, None]
        out = np.full((P.shape[0], X.shape[0]), STAR, dtype=np.int8)
        out[t <= x - ball.radius] = 1
        out[t > x + ball.radius] = 0
        return out

    def count_ones(self, P, pts):
        s = np.sort(pts[:, 0])
        return s.size - np.searchsorted(s, P[:, 0], side="left")

    # The empirical robust loss changes only when t crosses a breakpoint and is
    # constant on every (e_j, e_{j+1}]: label-1 points need t <= e, label-0
    # points need t > e. Right endpoints of these pieces plus +inf are complete.
    def candidates_finite(self, pts):
        v = np.unique(np.asarray(pts, dtype=float)[:, 0]) if len(pts) else np.zeros(0)
        return np.concatenate([v, [INF]])[:, None]

    def candidates_ball(self, X, radius):
        x = X[:, 0]
        return self.candidates_finite(np.concatenate([x - radius, x + radius])[:, None])

    def candidates_effective_ball(self, X, radius):
        x = X[:, 0]
        return _cell_reps(np.concatenate([x - radius, x + radius]))[:, None]

    def region_of(self, params):
        (t,) = params
        if t == INF:
            return IntervalSet()
        if t == -INF:
            return IntervalSet.everything()
        return IntervalSet([Piece(q(t), INF, True, False)])

    def describe(self, params):
        return f"threshold t={params[0]!r}"

    def missed_mass_sup(self, net, lo, hi):
        pts, lo, hi = _sorted_finite(net, lo, hi)
        L = hi - lo
        if not pts:
            return (Fraction(1), True), (Fraction(1), True)
        # h_0 = (-inf, t) misses the net iff t <= min(net); t = min(net) attains it
        # h_1 = [t, inf) misses the net iff t > max(net); never attained
        return ((pts[0] - lo) / L, True), ((hi - pts[-1]) / L, hi == pts[-1])


class IntervalClass(HypothesisClass):
    """``h(x) = 1{a <= x <= b}``; the empty interval is ``(inf, -inf)``."""

    kind = "intervals"
    vc_dim = 2
    dim = 1
    n_params = 2
    EMPTY = (INF, -INF)

    def predict_params(self, P, X):
        x = X[:, 0][None, :]
        return (P[:, 0][:, None] <= x) & (x <= P[:, 1][:, None])

    def partial_ball(self, P, X, ball):
        L = (X[:, 0] - ball.radius)[None, :]
        R = (X[:, 0] + ball.radius)[None, :]
        a, b = P[:, 0][:, None], P[:, 1][:, None]
        out = np.full((P.shape[0], X.shape[0]), STAR, dtype=np.int8)
        out[(a <= L) & (b >= R)] = 1
        out[(a > b) | (b < L) | (a > R)] = 0
        return out

    def count_ones(self, P, pts):
        s = np.sort(pts[:, 0])
        c = np.searchsorted(s, P[:, 1], side="right") - np.searchsorted(s, P[:, 0], side="left")
        return np.maximum(c, 0)

    # Shrinking an interval to the hull of what it must contain only helps on
    # label-0 points, so optimal endpoints sit on evaluation points (finite
    # types) or on inflated sample endpoints x +- r (balls).
    def candidates_finite(self, pts):
        v = np.asarray(pts, dtype=float)[:, 0] if len(pts) else np.zeros(0)
        return _unique_rows(np.vstack([_interval_pairs(v), [self.EMPTY]]))

    def candidates_ball(self, X, radius):
        x = X[:, 0]
        return self.candidates_finite(np.concatenate([x - radius, x + radius])[:, None])

    def candidates_effective_ball(self, X, radius):
        x = X[:, 0]
        reps = _cell_reps(np.concatenate([x - radius, x + radius]))
        return _unique_rows(np.vstack([_interval_pairs(reps), [self.EMPTY]]))

    def region_of(self, params):
        a, b = params
        if a > b:
            return IntervalSet()
        return IntervalSet([Piece(q(a), q(b))])

    def describe(self, params):
        return f"interval a={params[0]!r} b={params[1]!r}"

    def missed_mass_sup(self, net, lo, hi):
        pts, lo, hi = _sorted_finite(net, lo, hi)
        L = hi - lo
        if not pts:
            return (Fraction(1), True), (Fraction(1), True)
        gaps = [pts[0] - lo, hi - pts[-1]] + [b - a for a, b in zip(pts, pts[1:])]
        biggest = max(gaps)
        # h_1 must sit inside one gap (never attained unless the gap is empty);
        # h_0 is smallest when [a, b] is the hull of the net
        return ((L - (pts[-1] - pts[0])) / L, True), (biggest / L, biggest == 0)


class UnionOfIntervalsClass(HypothesisClass):
    """Union of two closed intervals ``[a1, b1] ∪ [a2, b2]``.

    Canonical members have ``b1 < a2``; a missing second piece is ``(inf, -inf)``.
    """

    kind = "union2"
    vc_dim = 4
    dim = 1
    n_params = 4
    EMPTY = (INF, -INF)

    def predict_params(self, P, X):
        x = X[:, 0][None, :]
        one = (P[:, 0][:, None] <= x) & (x <= P[:, 1][:, None])
        two = (P[:, 2][:, None] <= x) & (x <= P[:, 3][:, None])
        return one | two

    def partial_ball(self, P, X, ball):
        L = (X[:, 0] - ball.radius)[None, :]
        R = (X[:, 0] + ball.radius)[None, :]
        a1, b1, a2, b2 = (P[:, i][:, None] for i in range(4))
        first = a1 <= a2
        A1, B1 = np.where(first, a1, a2), np.where(first, b1, b2)
        A2, B2 = np.where(first, a2, a1), np.where(first, b2, b1)
        ne1, ne2 = A1 <= B1, A2 <= B2
        inside = ((A1 <= L) & (B1 >= R) & ne1) | ((A2 <= L) & (B2 >= R) & ne2)
        joint = ne1 & ne2 & (A2 <= B1) & (A1 <= L) & (np.maximum(B1, B2) >= R)
        miss1 = ~ne1 | (B1 < L) | (A1 > R)
        miss2 = ~ne2 | (B2 < L) | (A2 > R)
        out = np.full((P.shape[0], X.shape[0]), STAR, dtype=np.int8)
        out[inside | joint] = 1
        out[miss1 & miss2] = 0
        return out

    def count_ones(self, P, pts):
        s = np.sort(pts[:, 0])

        def cnt(a, b):
            return np.maximum(np.searchsorted(s, b, side="right") - np.searchsorted(s, a, side="left"), 0)

        lo, hi = np.maximum(P[:, 0], P[:, 2]), np.minimum(P[:, 1], P[:, 3])
        return cnt(P[:, 0], P[:, 1]) + cnt(P[:, 2], P[:, 3]) - cnt(lo, hi)

    def _from_values(self, v: np.ndarray) -> np.ndarray:
        iv = _interval_pairs(v)
        n = iv.shape[0]
        _check_count(n * n // 2 + n + 1, "union2 candidates")
        mask = iv[None, :, 0] > iv[:, None, 1]
        i, j = np.nonzero(mask)
        pairs = np.column_stack([iv[i], iv[j]])
        singles = np.column_stack([iv, np.tile(self.EMPTY, (n, 1))])
        empty = np.array([self.EMPTY + self.EMPTY])
        return _unique_rows(np.vstack([pairs, singles, empty]))

    # each connected component can shrink to the hull of what it must cover,
    # so both components end on evaluation points / inflated endpoints
    def candidates_finite(self, pts):
        v = np.asarray(pts, dtype=float)[:, 0] if len(pts) else np.zeros(0)
        return self._from_values(v)

    def candidates_ball(self, X, radius):
        x = X[:, 0]
        return self._from_values(np.concatenate([x - radius, x + radius]))

    def candidates_effective_ball(self, X, radius):
        x = X[:, 0]
        # two interior representatives per gap so that a hole inside one gap is expressible
        return self._from_values(_cell_reps(np.concatenate([x - radius, x + radius]), interior=2))

    def region_of(self, params):
        a1, b1, a2, b2 = params
        pieces = [Piece(q(a), q(b)) for a, b in ((a1, b1), (a2, b2)) if a <= b]
        return IntervalSet(pieces)

    def describe(self, params):
        a1, b1, a2, b2 = params
        return f"union2 a1={a1!r} b1={b1!r} a2={a2!r} b2={b2!r}"

    def missed_mass_sup(self, net, lo, hi):
        pts, lo, hi = _sorted_finite(net, lo, hi)
        L = hi - lo
        if not pts:
            return (Fraction(1), True), (Fraction(1), True)
        inner = [b - a for a, b in zip(pts, pts[1:])]
        gaps = sorted([pts[0] - lo, hi - pts[-1]] + inner, reverse=True)
        top2 = sum(gaps[:2])
        cover = (pts[-1] - pts[0]) - (max(inner) if inner else 0)
        return ((L - cover) / L, True), (top2 / L, top2 == 0)


class RectangleClass(HypothesisClass):
    """Closed axis-aligned boxes in ``R^d``; params are ``(lo_1..lo_d, hi_1..hi_d)``."""

    kind = "rectangles"

    def __init__(self, dim: int = 2):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        self.vc_dim = 2 * dim
        self.n_params = 2 * dim

    @property
    def empty(self) -> tuple:
        return (INF,) * self.dim + (-INF,) * self.dim

    def predict_params(self, P, X):
        d = self.dim
        out = np.ones((P.shape[0], X.shape[0]), dtype=bool)
        for i in range(d):
            x = X[:, i][None, :]
            out &= (P[:, i][:, None] <= x) & (x <= P[:, d + i][:, None])
        return out

    def partial_ball(self, P, X, ball):
        d, r = self.dim, ball.radius
        lo, hi = P[:, :d][:, None, :], P[:, d:][:, None, :]
        x = X[None, :, :]
        inside = ((lo <= x - r) & (hi >= x + r)).all(axis=2)
        gap = np.maximum(np.maximum(lo - x, x - hi), 0.0)
        empty = (P[:, :d] > P[:, d:]).any(axis=1)[:, None]
        far = empty | (ball.metric.norm(gap, axis=2) > r)
        out = np.full((P.shape[0], X.shape[0]), STAR, dtype=np.int8)
        out[inside] = 1
        out[far] = 0
        return out

    def _product(self, lo_vals, hi_vals) -> np.ndarray:
        per_axis = []
        for lv, hv in zip(lo_vals, hi_vals):
            lv, hv = np.unique(lv), np.unique(hv)
            a, b = np.meshgrid(lv, hv, indexing="ij")
            ok = a <= b
            per_axis.append(np.column_stack([a[ok], b[ok]]))
        _check_count(math.prod(p.shape[0] for p in per_axis) + 1, "rectangle candidates")
        rows = []
        for combo in itertools.product(*(range(p.shape[0]) for p in per_axis)):
            lo = [per_axis[i][k, 0] for i, k in enumerate(combo)]
            hi = [per_axis[i][k, 1] for i, k in enumerate(combo)]
            rows.append(lo + hi)
        rows.append(list(self.empty))
        return _unique_rows(np.array(rows, dtype=float))

    # a box's trace on a finite set equals the trace of the bounding box of
    # the points it contains, so coordinates from the evaluation points suffice
    def candidates_finite(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        cols = [pts[:, i] for i in range(self.dim)]
        return self._product(cols, cols)

    # a ball sits inside a box iff its bounding cube does, so the minimal box
    # containing the inflated label-1 points has faces at x_i -+ r
    def candidates_ball(self, X, radius):
        return self._product([X[:, i] - radius for i in range(self.dim)], [X[:, i] + radius for i in range(self.dim)])

    def candidates_effective_ball(self, X, radius):
        if self.dim != 1:
            return super().candidates_effective_ball(X, radius)
        return IntervalClass().candidates_effective_ball(X, radius)

    def region_of(self, params):
        if self.dim != 1:
            return super().region_of(params)
        return IntervalClass().region_of(params)

    def describe(self, params):
        d = self.dim
        lo = ",".join(repr(v) for v in params[:d])
        hi = ",".join(repr(v) for v in params[d:])
        return f"rectangle lo=({lo}) hi=({hi})"

    def __hash__(self):
        return hash(("rectangles", self.dim))

    def __repr__(self) -> str:
        return f"RectangleClass(dim={self.dim})"


class FiniteClass(HypothesisClass):
    """An explicit finite class; parameter rows are member indices.

    Members are kept sorted by their ``sort_key`` (or description) so that the
    first minimiser is again the canonical one.
    """

    kind = "finite-explicit"
    n_params = 1

    def __init__(self, members: Sequence[Hypothesis], vc_dim: int, kind: str | None = None):
        members = list(members)
        if not members:
            raise ValueError("a finite class needs at least one member")
        key = lambda h: h.sort_key() if hasattr(h, "sort_key") else h.describe()
        self.members = sorted(members, key=key)
        self.vc_dim = vc_dim
        self.dim = self.members[0].dim
        if kind:
            self.kind = kind
        self._index = {id(h): i for i, h in enumerate(self.members)}

    def __hash__(self):
        return hash((self.kind, len(self.members)))

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"FiniteClass({self.kind}, {len(self.members)} members)"

    def predict_params(self, P, X):
        return np.array([self.members[int(i)].predict(X) for i in P[:, 0]], dtype=bool).reshape(P.shape[0], X.shape[0])

    def partial_ball(self, P, X, ball):
        if self.dim != 1:
            return super().partial_ball(P, X, ball)
        r = q(ball.radius)
        out = np.empty((P.shape[0], X.shape[0]), dtype=np.int8)
        for row, i in enumerate(P[:, 0]):
            reg = self.members[int(i)].region()
            for col, x in enumerate(X[:, 0]):
                out[row, col] = _partial_from_region(reg, q(x) - r, q(x) + r)
        return out

    def _all(self) -> np.ndarray:
        return np.arange(len(self.members), dtype=float)[:, None]

    def candidates_finite(self, pts):
        return self._all()

    def candidates_ball(self, X, radius):
        if self.dim != 1:
            return super().candidates_ball(X, radius)
        return self._all()

    def candidates_effective_ball(self, X, radius):
        return self.candidates_ball(X, radius)

    def make(self, params):
        return self.members[int(params[0])]

    def params_of(self, hyps):
        return np.array([[self._index[id(h)]] for h in hyps], dtype=float).reshape(len(hyps), 1)

    def region_of(self, params):
        return self.members[int(params[0])].region()

    def describe(self, params):
        return self.members[int(params[0])].describe()


def _partial_from_region(reg: IntervalSet, L, R) -> int:
    if reg.covers(L, R):
        return 1
    if not reg.meets(L, R):
        return 0
    return STAR


CLASS_KINDS: dict[str, Callable[..., HypothesisClass]] = {
    "thresholds": ThresholdClass,
    "intervals": IntervalClass,
    "union2": UnionOfIntervalsClass,
    "rectangles": RectangleClass,
}


def make_class(kind: str, dim: int = 1) -> HypothesisClass:
    aliases = {"thresholds-1d": "thresholds", "intervals-1d": "intervals", "union-of-2-intervals-1d": "union2",
               "axis-rectangles": "rectangles", "axis-rectangles-dd": "rectangles"}
    kind = aliases.get(kind.lower(), kind.lower())
    if kind not in CLASS_KINDS:
        raise ValueError(f"unknown hypothesis class kind {kind!r}; expected one of {sorted(CLASS_KINDS)}")
    if kind == "rectangles":
        return RectangleClass(dim)
    if dim != 1:
        raise DimensionError(f"{kind} is a one-dimensional class")
    return CLASS_KINDS[kind]()


_NUM = r"[-+]?(?:inf|nan|[0-9.eE+-]+)"


def parse_hypothesis(text: str) -> ParamHypothesis:
    """Inverse of ``describe`` for the built-in parametric classes."""
    text = text.strip()
    head, _, rest = text.partition(" ")
    if head == "rectangle":
        m = re.fullmatch(r"lo=\((.*)\) hi=\((.*)\)", rest)
        if not m:
            raise ValueError(f"malformed rectangle descriptor: {text!r}")
        lo = [float(v) for v in m.group(1).split(",")]
        hi = [float(v) for v in m.group(2).split(",")]
        return RectangleClass(len(lo)).make(lo + hi)
    names = {"threshold": (ThresholdClass, ["t"]), "interval": (IntervalClass, ["a", "b"]),
             "union2": (UnionOfIntervalsClass, ["a1", "b1", "a2", "b2"])}
    if head not in names:
        raise ValueError(f"unknown hypothesis descriptor: {text!r}")
    cls, keys = names[head]
    values = dict(re.findall(rf"(\w+)=({_NUM})", rest))
    try:
        return cls().make([float(values[k]) for k in keys])
    except KeyError as exc:
        raise ValueError(f"descriptor {text!r} lacks {exc}") from None


# ---------------------------------------------------------------------------
# robust partial labels and losses


def _perturbation_sets(T, X: np.ndarray) -> list[np.ndarray]:
    sets = []
    for x in X:
        s = as_points(T(x))
        if s.shape[0] == 0:
            raise ValueError(f"perturbation set of {x} is empty")
        if s.shape[1] != X.shape[1]:
            raise DimensionError("perturbation points have the wrong dimension")
        sets.append(s)
    return sets


def partial_matrix(H: HypothesisClass, P: np.ndarray, X: np.ndarray, T) -> np.ndarray:
    """Robust partial labels (0, 1, STAR) of each parameter row at each point."""
    X = as_points(X)
    if X.shape[1] != H.dim:
        raise DimensionError(f"class on R^{H.dim} given points in R^{X.shape[1]}")
    if X.shape[0] == 0:
        return np.zeros((P.shape[0], 0), dtype=np.int8)
    if isinstance(T, BallType):
        return H.partial_ball(P, X, T)
    sets = _perturbation_sets(T, X)
    allpts = np.concatenate(sets)
    uniq, inv = np.unique(allpts, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    sizes = np.array([s.shape[0] for s in sets])
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    out = np.empty((P.shape[0], X.shape[0]), dtype=np.int8)
    for s in range(0, P.shape[0], _CHUNK):
        pred = H.predict_params(P[s : s + _CHUNK], uniq)[:, inv].astype(np.int32)
        cnt = np.add.reduceat(pred, starts, axis=1)
        block = np.full(cnt.shape, STAR, dtype=np.int8)
        block[cnt == 0] = 0
        block[cnt == sizes[None, :]] = 1
        out[s : s + _CHUNK] = block
    return out


def loss_matrix(partial: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Robust 0/1 loss from partial labels: wrong unless robustly equal to ``y``."""
    return (partial != np.asarray(y, dtype=np.int8)[None, :]).astype(np.int8)


def robust_losses(H: HypothesisClass, P: np.ndarray, S: LabeledSample, T, weights=None) -> np.ndarray:
    """Empirical robust loss of every parameter row on ``S``."""
    L = loss_matrix(partial_matrix(H, P, S.X, T), S.y)
    if weights is None:
        return L.mean(axis=1) if len(S) else np.zeros(P.shape[0])
    w = np.asarray(weights, dtype=float)
    return L @ (w / w.sum())


def _finite_points(T, X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return np.zeros((0, X.shape[1]))
    return np.unique(np.concatenate(_perturbation_sets(T, X)), axis=0)


class Identity:
    """The degenerate finite perturbation ``x -> {x}``."""

    k = 1

    def __call__(self, x):
        return as_point(x)[None, :]


IDENTITY = Identity()


def _argmin_first(losses: np.ndarray) -> int:
    return int(np.flatnonzero(losses == losses.min())[0])


def rerm_finite(H: HypothesisClass, S: LabeledSample, T, weights=None) -> Hypothesis:
    """Exact minimiser of the empirical T-robust loss for a finite perturbation ``T``."""
    if len(S) == 0:
        raise ValueError("RERM needs a nonempty sample")
    P = H.candidates_finite(_finite_points(T, S.X))
    _check_count(P.shape[0], "rerm_finite")
    return H.make(P[_argmin_first(robust_losses(H, P, S, T, weights))])


def erm(H: HypothesisClass, S: LabeledSample, weights=None) -> Hypothesis:
    return rerm_finite(H, S, IDENTITY, weights)


def rerm_ball(H: HypothesisClass, S: LabeledSample, V: BallType, weights=None) -> Hypothesis:
    """Exact minimiser of the empirical V-robust loss for a closed ball type."""
    if len(S) == 0:
        raise ValueError("RERM needs a nonempty sample")
    P = H.candidates_ball(S.X, V.radius)
    return H.make(P[_argmin_first(robust_losses(H, P, S, V, weights))])


def rerm_candidates(H: HypothesisClass, X: np.ndarray, T) -> np.ndarray:
    """The label-independent candidate set RERM searches for sample points ``X``."""
    X = as_points(X)
    if isinstance(T, BallType):
        return H.candidates_ball(X, T.radius)
    return H.candidates_finite(_finite_points(T, X))


def rerm_over(H: HypothesisClass, P: np.ndarray, S: LabeledSample, T) -> int:
    """Index of the first minimiser among the rows of ``P`` (an explicit finite sub-class)."""
    if P.shape[0] == 0:
        raise ValueError("RERM over an empty class")
    return _argmin_first(robust_losses(H, P, S, T))


def all_labelings(n: int) -> np.ndarray:
    """All of {0,1}^n in ``itertools.product`` order."""
    idx = np.arange(1 << n, dtype=np.int64)[:, None]
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[None, :]
    return ((idx >> shifts) & 1).astype(np.int8)


def rerm_labelings(H: HypothesisClass, X: np.ndarray, labelings: np.ndarray, T, block: int = 1 << 15):
    """RERM for many labelings of the same points at once.

    Returns ``(P, best, best_loss)``: the candidate rows, the index of the
    RERM output for each labeling and its empirical robust loss. Identical to
    calling the single-sample oracle per labeling, because the candidate set
    does not depend on the labels.
    """
    X = as_points(X)
    P = rerm_candidates(H, X, T)
    part = partial_matrix(H, P, X, T)
    n = X.shape[0]
    star = (part == STAR).sum(axis=1).astype(np.int64)
    is0 = (part == 0).astype(np.int64)
    is1 = (part == 1).astype(np.int64)
    Y = np.asarray(labelings, dtype=np.int64)
    best = np.empty(Y.shape[0], dtype=np.int64)
    best_loss = np.empty(Y.shape[0], dtype=float)
    for s in range(0, Y.shape[0], block):
        Yb = Y[s : s + block]
        wrong = star[None, :] + Yb @ is0.T + (1 - Yb) @ is1.T
        b = wrong.argmin(axis=1)  # argmin returns the first minimiser
        best[s : s + block] = b
        best_loss[s : s + block] = wrong[np.arange(Yb.shape[0]), b] / max(n, 1)
    return P, best, best_loss


# ---------------------------------------------------------------------------
# behaviours and VC oracles


def effective_behaviors(H: HypothesisClass, X, T):
    """``(P, B)``: one parameter row per distinct partial-label behaviour on ``X`` and the behaviours."""
    X = as_points(X)
    if X.shape[0] > MAX_ENUM_POINTS:
        raise CapExceededError(f"behaviour enumeration is capped at {MAX_ENUM_POINTS} points")
    if isinstance(T, BallType):
        P = H.candidates_effective_ball(X, T.radius)
    else:
        P = H.candidates_finite(_finite_points(T, X))
    _check_count(P.shape[0], "enumerate_effective")
    B = partial_matrix(H, P, X, T)
    _, first = np.unique(B, axis=0, return_index=True)
    first = np.sort(first)
    return P[first], B[first]


def enumerate_effective(H: HypothesisClass, S_X, T) -> list[Hypothesis]:
    """One representative hypothesis per distinct T-robust behaviour on ``S_X``."""
    P, _ = effective_behaviors(H, S_X, T)
    return [H.make(p) for p in P]


def sauer_bound(n: int, vc: int) -> int:
    return sum(math.comb(n, i) for i in range(0, min(vc, n) + 1))


def max_shattered(B: np.ndarray) -> int:
    """Size of the largest column subset on which the rows show every 0/1 pattern.

    ``STAR`` entries never count as a label. Shattering is hereditary, so the
    search grows subsets level by level from shattered ones only.
    """
    B = np.asarray(B, dtype=np.int8)
    if B.shape[0] == 0:
        return 0
    n = B.shape[1]
    level = [()]
    best = 0
    for k in range(1, n + 1):
        prev = set(level)
        seen = set()
        nxt = []
        for base in level:
            start = base[-1] + 1 if base else 0
            for j in range(start, n):
                K = base + (j,)
                if K in seen:
                    continue
                seen.add(K)
                if any(K[:i] + K[i + 1 :] not in prev for i in range(k)):
                    continue
                if _shatters(B, K):
                    nxt.append(K)
        if not nxt:
            break
        best, level = k, nxt
    return best


def _shatters(B: np.ndarray, K: tuple) -> bool:
    sub = B[:, list(K)]
    ok = (sub != STAR).all(axis=1)
    if ok.sum() < (1 << len(K)):
        return False
    codes = sub[ok].astype(np.int64) @ (1 << np.arange(len(K), dtype=np.int64))
    return np.unique(codes).size == (1 << len(K))


def compute_vc_robust(H: HypothesisClass, U, candidate_points) -> int:
    """Largest U-shattered subset of ``candidate_points`` (exhaustive)."""
    X = as_points(candidate_points) if len(candidate_points) else np.zeros((0, H.dim))
    if X.shape[0] > MAX_VC_POINTS:
        raise CapExceededError(f"VC search is capped at {MAX_VC_POINTS} points")
    if X.shape[0] == 0:
        return 0
    _, B = effective_behaviors(H, X, U)
    return max_shattered(B)


def compute_vc(H: HypothesisClass, candidate_points) -> int:
    return compute_vc_robust(H, IDENTITY, candidate_points)


def compute_loss_class_vc(H: HypothesisClass, T, candidate_labeled_points) -> int:
    """VC dimension of the robust loss class restricted to the given labelled points."""
    S = candidate_labeled_points if isinstance(candidate_labeled_points, LabeledSample) else LabeledSample.of(candidate_labeled_points)
    if len(S) > MAX_LOSS_VC_POINTS:
        raise CapExceededError(f"loss-class VC search is capped at {MAX_LOSS_VC_POINTS} points")
    if len(S) == 0:
        return 0
    _, B = effective_behaviors(H, S.X, T)
    return max_shattered(loss_matrix(B, S.y))
