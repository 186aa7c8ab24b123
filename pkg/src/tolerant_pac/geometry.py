"""Points, lp metrics and ball perturbation types.

All stochastic helpers take an explicit ``numpy.random.Generator``; nothing
here touches global random state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class DimensionError(ValueError):
    """Raised when two points (or a point and a domain) disagree in dimension."""


class MetricMismatchError(ValueError):
    pass


def as_point(x) -> np.ndarray:
    """Coerce a scalar or sequence into a 1-D float array."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"a point must be a flat vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point has non-finite coordinates: {arr}")
    return arr


def as_points(X) -> np.ndarray:
    """Coerce a sequence of points into an ``(n, d)`` float array.

    A flat sequence of scalars is read as ``n`` points in one dimension.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"expected an (n, d) array of points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Metric:
    """The lp metric; ``p`` may be ``math.inf``."""

    p: float = 2.0

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"lp metrics need p >= 1, got {self.p}")

    def norm(self, v: np.ndarray, axis: int = -1) -> np.ndarray:
        v = np.abs(np.asarray(v, dtype=float))
        if math.isinf(self.p):
            return v.max(axis=axis)
        if self.p == 1:
            return v.sum(axis=axis)
        if self.p == 2:
            return np.sqrt((v * v).sum(axis=axis))
        return (v**self.p).sum(axis=axis) ** (1.0 / self.p)


@dataclass(frozen=True)
class BallType:
    """Closed-ball perturbation type ``x -> {z : d(x, z) <= radius}``."""

    radius: float
    metric: Metric = field(default_factory=Metric)

    def __post_init__(self):
        if not (self.radius >= 0) or math.isinf(self.radius):
            raise ValueError(f"ball radius must be finite and >= 0, got {self.radius}")

    @property
    def p(self) -> float:
        return self.metric.p

    def contained_in(self, other: "BallType") -> bool:
        """``self ≺ other``: every ball of ``self`` sits inside the concentric ball of ``other``."""
        return self.metric == other.metric and self.radius <= other.radius


def lp_distance(x, y, m: Metric | None = None) -> float:
    x, y = as_point(x), as_point(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float((m or Metric()).norm(x - y))


def lp_distances(center, Z, m: Metric | None = None) -> np.ndarray:
    """Vectorised distances from ``center`` to each row of ``Z``."""
    center = as_point(center)
    Z = as_points(Z)
    if Z.shape[1] != center.shape[0]:
        raise DimensionError(f"dimension mismatch: {center.shape[0]} vs {Z.shape[1]}")
    return (m or Metric()).norm(Z - center, axis=1)


def ball_contains(b: BallType, center, z) -> bool:
    return lp_distance(center, z, b.metric) <= b.radius


def inflate(U: BallType, W: BallType) -> BallType:
    """Minkowski inflation of ``U`` by ``W``; for balls the radii add."""
    if U.metric != W.metric:
        raise MetricMismatchError(f"cannot inflate {U.metric} ball by {W.metric} ball")
    return BallType(U.radius + W.radius, U.metric)


def tolerance_types(r: float, gamma: float, p: float = 2.0) -> tuple[BallType, BallType, BallType]:
    """Return the actual, reference and smoothing types ``(U, V, W)`` for radius ``r`` and tolerance ``gamma``."""
    if r <= 0 or gamma <= 0:
        raise ValueError("r and gamma must be positive")
    m = Metric(p)
    U = BallType(r, m)
    W = BallType(r * gamma, m)
    return U, inflate(U, W), W


def acceptance_rate(p: float, d: int) -> float:
    """Fraction of the bounding cube occupied by the unit lp ball in ``d`` dimensions.

    This is the per-draw acceptance probability of the rejection sampler.
    """
    if math.isinf(p):
        return 1.0
    return math.exp(d * math.lgamma(1 + 1 / p) - math.lgamma(1 + d / p))


def sample_uniform_ball(b: BallType, center, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Draw uniform points from the closed ball ``b`` around ``center``.

    Returns a single point when ``n`` is None, else an ``(n, d)`` array.
    """
    center = as_point(center)
    d = center.shape[0]
    size = 1 if n is None else int(n)
    if b.radius == 0:
        out = np.repeat(center[None, :], size, axis=0)
        return out[0] if n is None else out
    p = b.p
    if math.isinf(p):
        unit = rng.uniform(-1.0, 1.0, size=(size, d))
    elif p == 2:
        g = rng.standard_normal(size=(size, d))
        norms = np.sqrt((g * g).sum(axis=1, keepdims=True))
        # a zero Gaussian draw has probability zero; guard anyway
        norms[norms == 0] = 1.0
        unit = g / norms * rng.uniform(size=(size, 1)) ** (1.0 / d)
    else:
        unit = _rejection_unit_ball(p, d, size, rng)
    out = center + b.radius * unit
    return out[0] if n is None else out


def _rejection_unit_ball(p: float, d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    rate = acceptance_rate(p, d)
    if rate < 1e-4:
        raise ValueError(f"rejection sampling for p={p}, d={d} accepts only {rate:.2e} of draws")
    m = Metric(p)
    chunks, have = [], 0
    while have < size:
        batch = max(64, int(1.2 * (size - have) / rate))
        cand = rng.uniform(-1.0, 1.0, size=(batch, d))
        keep = cand[m.norm(cand, axis=1) <= 1.0]
        chunks.append(keep)
        have += keep.shape[0]
    return np.concatenate(chunks)[:size]


def overlap_fraction_gamma_balls(gamma: float, d: int) -> float:
    """Uniform-measure share of a radius ``r*gamma`` ball inside a radius ``r*(1+gamma)`` ball.

    Equals ``(gamma / (1 + gamma)) ** d``, a lower bound on the mass that
    ``W(z)`` carries under the uniform measure of ``V(x)`` whenever ``z`` lies
    in ``U(x)``.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return (gamma / (1.0 + gamma)) ** d


def overlap_fraction_exact(gamma, d: int) -> Fraction:
    """``(gamma / (1 + gamma)) ** d`` as an exact rational in the float value of ``gamma``."""
    overlap_fraction_gamma_balls(gamma, d)
    g = Fraction(gamma)
    return (g / (1 + g)) ** d


def eta_for_tolerance(gamma: float, d: int) -> float:
    """Largest float ``eta`` with ``3 eta`` at most the exact overlap fraction."""
    target = overlap_fraction_exact(gamma, d) / 3
    eta = float(target)
    if Fraction(eta) > target:
        eta = math.nextafter(eta, 0.0)
    return eta


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) stream, stable across runs and worker counts."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)]))


def point_key(x) -> tuple[int, ...]:
    """Canonical integer encoding of a point's float64 bytes, usable as seed material."""
    raw = as_point(x).astype("<f8").tobytes()
    return tuple(np.frombuffer(raw, dtype="<u4").tolist())
