"""Pointwise losses, partial labels, the smoothing operator and loss estimates."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import BallType, DimensionError, as_point, as_points, child_rng, point_key, sample_uniform_ball
from .hypotheses import Hypothesis, UnsupportedHypothesisError
from .intervals import IntervalSet, q, smoothed_region

HALF = 0.5


@dataclass(frozen=True)
class LossEstimate:
    value: float
    kind: str = "exact"
    mc_samples: int = 0
    std_error: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError(f"loss value {self.value} outside [0, 1]")
        if self.kind not in ("exact", "monte-carlo", "probe"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "exact" and (self.std_error != 0 or self.mc_samples != 0):
            raise ValueError("exact estimates carry no sampling error")

    def __float__(self) -> float:
        return float(self.value)


class PartialLabel(enum.IntEnum):
    ZERO = 0
    ONE = 1
    STAR = 2

    def __str__(self) -> str:
        return "*" if self is PartialLabel.STAR else str(int(self))


def binary_loss(h: Hypothesis, x, y: int) -> int:
    return int(h(x) != int(y))


def _finite_set(T, x) -> np.ndarray:
    pts = as_points(T(as_point(x)))
    if pts.shape[0] == 0:
        raise ValueError(f"perturbation set at {x} is empty")
    return pts


def _exact_partial(h: Hypothesis, radius: float, x) -> PartialLabel:
    x = as_point(x)
    if x.shape[0] != 1:
        raise UnsupportedHypothesisError("exact ball evaluation is one-dimensional")
    reg = h.region()
    L, R = q(x[0]) - q(radius), q(x[0]) + q(radius)
    if reg.covers(L, R):
        return PartialLabel.ONE
    if not reg.meets(L, R):
        return PartialLabel.ZERO
    return PartialLabel.STAR


def partial_label(h: Hypothesis, C, x) -> PartialLabel:
    """0 or 1 when ``h`` is constant on the perturbation set of ``x``, STAR otherwise."""
    if isinstance(C, BallType):
        return _exact_partial(h, C.radius, x)
    labels = h.predict(_finite_set(C, x))
    if labels.min() == labels.max():
        return PartialLabel(int(labels[0]))
    return PartialLabel.STAR


def adversarial_loss_finite(h: Hypothesis, T, x, y: int) -> int:
    return int(np.any(h.predict(_finite_set(T, x)) != int(y)))


def margin_loss(h: Hypothesis, T, x) -> int:
    return int(partial_label(h, T, x) is PartialLabel.STAR)


def partial_disagreement_loss(h1: Hypothesis, h2: Hypothesis, C, x) -> int:
    return int(partial_label(h1, C, x) != partial_label(h2, C, x))


def _ball_probes(U: BallType, x: np.ndarray, grid_n: int) -> np.ndarray:
    d, r = x.shape[0], U.radius
    axis = np.linspace(-r, r, grid_n)
    if d == 1:
        return x[None, :] + axis[:, None]
    offs = np.array(list(itertools.product(axis, repeat=d)))
    offs = offs[U.metric.norm(offs, axis=1) <= r]
    # axis extremes lie on the sphere of every lp ball
    ext = np.concatenate([np.eye(d) * r, -np.eye(d) * r])
    return x[None, :] + np.concatenate([offs, ext, np.zeros((1, d))])


def adversarial_loss_ball(h: Hypothesis, U: BallType, x, y: int, mode: str = "exact", grid_n: int = 41,
                          n: int = 1000, rng: np.random.Generator | None = None) -> LossEstimate:
    """Adversarial 0/1 loss of ``h`` at ``(x, y)`` under the closed ball ``U``.

    ``exact``: 1-D hypotheses with an exact region. ``probe``: 1 iff a probe
    point inside the ball is misclassified, a lower bound on the true loss.
    ``mc``: probability that a uniform ball point is misclassified.
    """
    x = as_point(x)
    if x.shape[0] != h.dim:
        raise DimensionError(f"hypothesis on R^{h.dim}, point in R^{x.shape[0]}")
    y = int(y)
    if mode == "exact":
        lab = _exact_partial(h, U.radius, x)
        return LossEstimate(float(lab != y))
    if mode == "probe":
        wrong = h.predict(_ball_probes(U, x, grid_n)) != y
        return LossEstimate(float(wrong.any()), "probe")
    if mode == "mc":
        if rng is None:
            raise ValueError("mc mode needs an rng")
        wrong = (h.predict(sample_uniform_ball(U, x, rng, n)) != y).astype(float)
        return LossEstimate(float(wrong.mean()), "monte-carlo", n, float(math.sqrt(wrong.var() / n)))
    raise ValueError(f"unknown evaluation mode {mode!r}")


# ---------------------------------------------------------------------------
# smoothing


class SmoothedHypothesis(Hypothesis):
    """Majority vote of ``base`` over ``W(x)``; an exact half goes to label 1.

    In exact mode (1-D bases with a region) the label-1 set is computed in
    closed form. In Monte Carlo mode each query point gets its own stream
    derived from ``(seed, bytes of x)``, so the hypothesis is a fixed function.
    """

    provenance = "smoothed"

    def __init__(self, base: Hypothesis, W: BallType, mode: str, mc_samples: int = 0, seed: int = 0):
        self.base, self.W, self.mode, self.mc_samples, self.seed = base, W, mode, mc_samples, seed
        self.dim = base.dim
        self._region: IntervalSet | None = None
        if mode == "exact":
            self._region = smoothed_region(base.region(), W.radius)

    def predict(self, X) -> np.ndarray:
        X = self._check(X)
        if self.W.radius == 0:
            return self.base.predict(X)
        if self._region is not None:
            return np.array([self._region.contains(v) for v in X[:, 0]], dtype=np.int8)
        out = np.empty(X.shape[0], dtype=np.int8)
        for i, x in enumerate(X):
            rng = child_rng(self.seed, *point_key(x))
            frac = self.base.predict(sample_uniform_ball(self.W, x, rng, self.mc_samples)).mean()
            out[i] = 1 if frac >= HALF else 0
        return out

    def region(self) -> IntervalSet:
        if self._region is None:
            if self.W.radius == 0:
                return self.base.region()
            return super().region()
        return self._region

    def describe(self) -> str:
        return f"sm[{self.W.radius!r}][{self.base.describe()}]"


def smooth(h: Hypothesis, W: BallType, mc_samples: int = 0, rng: np.random.Generator | None = None,
           seed: int | None = None, mode: str = "auto") -> SmoothedHypothesis:
    if mode == "auto":
        mode = "exact"
        if h.dim != 1:
            mode = "mc"
        else:
            try:
                h.region()
            except UnsupportedHypothesisError:
                mode = "mc"
    if mode == "mc":
        if mc_samples < 1:
            raise ValueError("Monte Carlo smoothing needs mc_samples >= 1")
        if seed is None:
            if rng is None:
                raise ValueError("Monte Carlo smoothing needs a seed or an rng")
            seed = int(rng.integers(0, 2**63 - 1))
    elif mode != "exact":
        raise ValueError(f"unknown smoothing mode {mode!r}")
    return SmoothedHypothesis(h, W, mode, mc_samples, seed or 0)


# ---------------------------------------------------------------------------
# aggregate losses


@dataclass(frozen=True)
class AdversarialLoss:
    """Pointwise adversarial loss under ``T`` (finite type or ball, exact)."""

    T: object

    def __call__(self, h: Hypothesis, x, y: int) -> int:
        if isinstance(self.T, BallType):
            return int(adversarial_loss_ball(h, self.T, x, y).value)
        return adversarial_loss_finite(h, self.T, x, y)


def empirical_loss(loss: Callable, h: Hypothesis, S) -> float:
    vals = [loss(h, x, y) for x, y in S]
    if not vals:
        raise ValueError("empirical loss of an empty sample")
    return float(np.mean(vals))


def expected_loss_mc(loss: Callable, h: Hypothesis, P, n: int, rng: np.random.Generator) -> LossEstimate:
    if n < 1:
        raise ValueError("n must be >= 1")
    S = P.sample(n, rng)
    vals = np.array([loss(h, x, y) for x, y in S], dtype=float)
    var = vals.var(ddof=1) if n > 1 else 0.0
    return LossEstimate(float(vals.mean()), "monte-carlo", n, float(math.sqrt(var / n)))
