from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tolerant_pac.intervals import IntervalSet, Piece, smoothed_region, voronoi_region


def test_closed_piece_membership():
    s = IntervalSet([Piece(0, 1)])
    assert s.contains(0) and s.contains(1) and s.contains(0.5)
    assert not s.contains(1.0001)
    assert s.covers(0, 1) and not s.covers(0, 1.5)


def test_open_endpoint():
    s = IntervalSet([Piece(0, 1, lo_closed=False)])
    assert not s.contains(0)
    assert s.contains(Fraction(1, 10**9))


def test_pieces_merge():
    s = IntervalSet([Piece(0, 1), Piece(1, 2, lo_closed=False), Piece(5, 6)])
    assert len(s.pieces) == 2


def test_smoothed_threshold_tie_goes_to_one():
    half_line = IntervalSet([Piece(0, float("inf"))])
    sm = smoothed_region(half_line, 1)
    assert sm.contains(0)
    assert not sm.contains(-1e-9)


def test_voronoi_ties_to_lower_point():
    reg = voronoi_region([-1, 0, 1], [1, 0, 1])
    assert reg.contains(-0.5)     # tie between -1 and 0 goes to -1
    assert not reg.contains(0.5)  # tie between 0 and 1 goes to 0
    assert reg.contains(0.51)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(0, 6)), min_size=1, max_size=6),
       st.integers(-30, 30))
def test_contains_matches_bruteforce(spans, x):
    pieces = [Piece(a, a + w) for a, w in spans]
    s = IntervalSet(pieces)
    assert s.contains(x) == any(a <= x <= a + w for a, w in spans)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(0, 6)), min_size=1, max_size=6),
       st.integers(-30, 30), st.integers(0, 8))
def test_meets_matches_bruteforce(spans, a, w):
    s = IntervalSet([Piece(lo, lo + k) for lo, k in spans])
    grid = np.arange(a * 4, (a + w) * 4 + 1) / 4
    expected = any(lo <= a + w and a <= lo + k for lo, k in spans)
    assert s.meets(a, a + w) == expected
    if any(s.contains(g) for g in grid):
        assert expected
    # covering means every quarter-step point of [a, a + w] is contained
    assert s.covers(a, a + w) == all(s.contains(g) for g in grid)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(0, 6)), min_size=1, max_size=6),
       st.integers(-30, 30), st.integers(0, 12))
def test_measure_matches_unit_cells(spans, a, w):
    s = IntervalSet([Piece(lo, lo + k) for lo, k in spans])
    # with integer endpoints the measure is the count of covered unit cells
    cells = sum(1 for c in range(a, a + w) if s.contains(Fraction(2 * c + 1, 2)))
    assert s.measure_within(a, a + w) == cells
