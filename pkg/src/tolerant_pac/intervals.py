"""Exact unions of intervals on the real line.

Endpoints are ``fractions.Fraction`` (or ``±math.inf``), so membership and
containment questions about one-dimensional hypotheses are answered without
rounding. Every float is an exact rational, so converting inputs loses nothing.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

INF = math.inf


def q(v) -> Fraction | float:
    """Exact rational for a finite number, ``±inf`` passed through."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    v = float(v)
    if math.isinf(v):
        return v
    if math.isnan(v):
        raise ValueError("NaN endpoint")
    return Fraction(v)


@dataclass(frozen=True)
class Piece:
    lo: Fraction | float
    hi: Fraction | float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        # infinite ends are never attained
        if self.lo == -INF and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if self.hi == INF and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, x) -> bool:
        lo_ok = self.lo < x or (self.lo_closed and self.lo == x)
        hi_ok = x < self.hi or (self.hi_closed and self.hi == x)
        return lo_ok and hi_ok

    def length_within(self, L: Fraction, R: Fraction) -> Fraction:
        lo = max(self.lo, L)
        hi = min(self.hi, R)
        if hi <= lo:
            return Fraction(0)
        return hi - lo


class IntervalSet:
    """A finite union of intervals in normal form (sorted, disjoint, maximal)."""

    __slots__ = ("pieces", "_los")

    def __init__(self, pieces: Iterable[Piece] = ()):
        self.pieces: tuple[Piece, ...] = _normalize(pieces)
        self._los = [p.lo for p in self.pieces]

    @classmethod
    def closed(cls, intervals: Iterable[tuple]) -> "IntervalSet":
        return cls(Piece(q(a), q(b)) for a, b in intervals)

    @classmethod
    def points(cls, values: Iterable) -> "IntervalSet":
        return cls(Piece(q(v), q(v)) for v in values)

    @classmethod
    def sorted_points(cls, values: Sequence) -> "IntervalSet":
        """Points given strictly increasing as exact values; skips normalisation."""
        out = cls.__new__(cls)
        out.pieces = tuple(Piece(v, v) for v in values)
        out._los = list(values)
        return out

    @classmethod
    def everything(cls) -> "IntervalSet":
        return cls([Piece(-INF, INF, False, False)])

    def __repr__(self) -> str:
        def fmt(p: Piece) -> str:
            return f"{'[' if p.lo_closed else '('}{float(p.lo)}, {float(p.hi)}{']' if p.hi_closed else ')'}"

        return "IntervalSet(" + " ∪ ".join(fmt(p) for p in self.pieces) + ")"

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash(self.pieces)

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def endpoints(self) -> list:
        out = []
        for p in self.pieces:
            out.extend(e for e in (p.lo, p.hi) if not (isinstance(e, float) and math.isinf(e)))
        return out

    def _component(self, x) -> Piece | None:
        i = bisect_right(self._los, x) - 1
        if i >= 0 and self.pieces[i].contains(x):
            return self.pieces[i]
        return None

    def contains(self, x) -> bool:
        return self._component(q(x)) is not None

    def covers(self, L, R) -> bool:
        """True iff the closed interval ``[L, R]`` lies inside the set."""
        L, R = q(L), q(R)
        if L > R:
            return True
        # components are maximal, so a connected set must sit in one of them
        p = self._component(L)
        return p is not None and p.contains(R)

    def meets(self, L, R) -> bool:
        """True iff the closed interval ``[L, R]`` intersects the set."""
        L, R = q(L), q(R)
        if L > R:
            return False
        # pieces are sorted and disjoint, so only the last two starting at or before R can reach L
        j = bisect_right(self._los, R)
        for p in self.pieces[max(0, j - 2) : j]:
            below = p.hi < L or (p.hi == L and not p.hi_closed)
            above = p.lo > R or (p.lo == R and not p.lo_closed)
            if not below and not above:
                return True
        return False

    def measure_within(self, L, R) -> Fraction:
        L, R = q(L), q(R)
        return sum((p.length_within(L, R) for p in self.pieces), Fraction(0))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.pieces + other.pieces)

    def complement(self) -> "IntervalSet":
        out = []
        lo, lo_closed = -INF, False
        for p in self.pieces:
            out.append(Piece(lo, p.lo, lo_closed, not p.lo_closed))
            lo, lo_closed = p.hi, not p.hi_closed
        out.append(Piece(lo, INF, lo_closed, False))
        return IntervalSet(out)


def _normalize(pieces: Iterable[Piece]) -> tuple[Piece, ...]:
    live = [p for p in pieces if not p.empty]
    live.sort(key=lambda p: (p.lo, not p.lo_closed))
    merged: list[Piece] = []
    for p in live:
        if merged:
            cur = merged[-1]
            touching = p.lo < cur.hi or (p.lo == cur.hi and (cur.hi_closed or p.lo_closed))
            if touching:
                if p.hi > cur.hi:
                    hi, hc = p.hi, p.hi_closed
                elif p.hi == cur.hi:
                    hi, hc = cur.hi, cur.hi_closed or p.hi_closed
                else:
                    hi, hc = cur.hi, cur.hi_closed
                merged[-1] = Piece(cur.lo, hi, cur.lo_closed, hc)
                continue
        merged.append(p)
    return tuple(merged)


def smoothed_region(region: IntervalSet, rho) -> IntervalSet:
    """Exact majority-vote region of a 1-D labelling under a radius-``rho`` window.

    Returns ``{x : |[x-rho, x+rho] ∩ region| >= rho}``, i.e. the points where
    at least half of the window is labelled 1. The window measure is a
    continuous piecewise-linear function of ``x`` whose kinks sit at region
    endpoints shifted by ``±rho``; solving on each linear piece gives the
    result as a union of closed intervals.
    """
    rho = q(rho)
    if rho == 0:
        return region

    def f(x: Fraction) -> Fraction:
        return region.measure_within(x - rho, x + rho)

    ends = region.endpoints()
    if not ends:
        return IntervalSet.everything() if region.pieces else IntervalSet()
    bps = sorted({e + s for e in ends for s in (-rho, rho)})
    vals = [f(b) for b in bps]
    out: list[Piece] = []
    if vals[0] >= rho:
        out.append(Piece(-INF, bps[0], False, True))
    for (a, fa), (b, fb) in zip(zip(bps, vals), zip(bps[1:], vals[1:])):
        if fa >= rho and fb >= rho:
            out.append(Piece(a, b))
        elif fa >= rho:
            out.append(Piece(a, a + (fa - rho) / (fa - fb) * (b - a)))
        elif fb >= rho:
            out.append(Piece(b - (fb - rho) / (fb - fa) * (b - a), b))
    if vals[-1] >= rho:
        out.append(Piece(bps[-1], INF, True, False))
    return IntervalSet(out)


def voronoi_region(grid: Sequence, labels: Sequence[int]) -> IntervalSet:
    """Region labelled 1 by nearest-grid-point lookup on a sorted 1-D grid.

    Midpoints between neighbours go to the lower neighbour, matching the
    lexicographically-smallest tie-break of the cover's nearest-point query.
    """
    g = [q(v) for v in grid]
    if not g:
        return IntervalSet()
    out = []
    for i, lab in enumerate(labels):
        if not lab:
            continue
        lo = -INF if i == 0 else (g[i - 1] + g[i]) / 2
        hi = INF if i == len(g) - 1 else (g[i] + g[i + 1]) / 2
        out.append(Piece(lo, hi, False, i != len(g) - 1))
    return IntervalSet(out)
