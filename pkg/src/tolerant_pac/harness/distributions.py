"""Synthetic data distributions with exact robust losses on finite supports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..geometry import BallType, as_point, as_points
from ..hypotheses import Hypothesis, HypothesisClass, LabeledSample, effective_behaviors, loss_matrix
from ..losses import LossEstimate, adversarial_loss_ball, adversarial_loss_finite


class DistributionError(ValueError):
    pass


def _robust_losses_at(h: Hypothesis, X: np.ndarray, y: np.ndarray, T) -> np.ndarray:
    if isinstance(T, BallType):
        if X.shape[1] == 1:
            return np.array([adversarial_loss_ball(h, T, x, yy).value for x, yy in zip(X, y)])
        return np.array([adversarial_loss_ball(h, T, x, yy, mode="probe").value for x, yy in zip(X, y)])
    return np.array([adversarial_loss_finite(h, T, x, yy) for x, yy in zip(X, y)], dtype=float)


@dataclass
class SyntheticDistribution:
    """A labelled distribution.

    ``kind`` is ``finite`` (weighted atoms, label noise folded into the atoms),
    ``uniform-box`` (uniform marginal, labels from ``target`` flipped with
    probability ``noise``) or ``mixture`` (weighted ``components``).
    """

    kind: str
    X: np.ndarray | None = None
    y: np.ndarray | None = None
    w: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    target: Hypothesis | None = None
    noise: float = 0.0
    components: list = field(default_factory=list)
    mix: np.ndarray | None = None

    @property
    def dim(self) -> int:
        if self.kind == "finite":
            return self.X.shape[1]
        if self.kind == "uniform-box":
            return self.lo.shape[0]
        return self.components[0].dim

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box of the marginal's support."""
        if self.kind == "finite":
            return self.X.min(axis=0), self.X.max(axis=0)
        if self.kind == "uniform-box":
            return self.lo, self.hi
        los, his = zip(*(c.bounds() for c in self.components))
        return np.min(los, axis=0), np.max(his, axis=0)

    def sample(self, n: int, rng: np.random.Generator) -> LabeledSample:
        if self.kind == "finite":
            idx = rng.choice(self.X.shape[0], size=n, p=self.w)
            return LabeledSample(self.X[idx], self.y[idx])
        if self.kind == "uniform-box":
            X = rng.uniform(self.lo, self.hi, size=(n, self.lo.shape[0]))
            y = self.target.predict(X).astype(np.int8)
            flip = rng.uniform(size=n) < self.noise
            return LabeledSample(X, np.where(flip, 1 - y, y))
        which = rng.choice(len(self.components), size=n, p=self.mix)
        Xs, ys = np.zeros((n, self.dim)), np.zeros(n, dtype=np.int8)
        for c, comp in enumerate(self.components):
            sel = np.flatnonzero(which == c)
            if sel.size:
                part = comp.sample(sel.size, rng)
                Xs[sel], ys[sel] = part.X, part.y
        return LabeledSample(Xs, ys)

    def expected_robust_loss(self, h: Hypothesis, T, n_mc: int = 20000,
                             rng: np.random.Generator | None = None) -> LossEstimate:
        """Expected robust loss; exact for finite supports, Monte Carlo otherwise."""
        if self.kind == "finite":
            vals = _robust_losses_at(h, self.X, self.y, T)
            return LossEstimate(float(np.clip(vals @ self.w, 0.0, 1.0)))
        if rng is None:
            raise DistributionError("a continuous distribution needs an rng for its loss estimate")
        S = self.sample(n_mc, rng)
        vals = _robust_losses_at(h, S.X, S.y, T)
        return LossEstimate(float(vals.mean()), "monte-carlo", n_mc, float(np.sqrt(vals.var(ddof=1) / n_mc)))

    def opt(self, H: HypothesisClass, T) -> float:
        """Best expected robust loss over the class, brute-forced over effective behaviours."""
        if self.kind != "finite":
            raise DistributionError("OPT is brute-forced on finite supports only")
        U, inv = np.unique(self.X, axis=0, return_inverse=True)
        _, B = effective_behaviors(H, U, T)
        L = loss_matrix(B[:, inv.reshape(-1)], self.y)
        return float(max(0.0, (L @ self.w).min()))

    def is_realizable(self, H: HypothesisClass, T) -> bool:
        return self.opt(H, T) == 0.0


def finite_distribution(atoms: Sequence, noise: float = 0.0) -> SyntheticDistribution:
    """Atoms ``(x, y, weight)``; each atom's label is flipped with probability ``noise``."""
    if not (0.0 <= noise < 0.5):
        raise DistributionError("noise rate must lie in [0, 0.5)")
    if not atoms:
        raise DistributionError("a finite distribution needs at least one atom")
    X = np.array([as_point(a[0]) for a in atoms])
    y = np.array([int(a[1]) for a in atoms], dtype=np.int8)
    w = np.array([float(a[2]) for a in atoms])
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-9):
        raise DistributionError(f"weights must be nonnegative and sum to 1, got {w.sum()}")
    if not np.isin(y, (0, 1)).all():
        raise DistributionError("labels must be 0 or 1")
    w = w / w.sum()
    if noise > 0:
        X = np.concatenate([X, X])
        y = np.concatenate([y, 1 - y])
        w = np.concatenate([w * (1 - noise), w * noise])
    return SyntheticDistribution("finite", X=X, y=y, w=w, noise=noise)


def labeled_support(points, target: Hypothesis, weights=None, noise: float = 0.0) -> SyntheticDistribution:
    """Finite support labelled by ``target``; uniform weights unless given."""
    P = as_points(points)
    w = np.full(P.shape[0], 1.0 / P.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    y = target.predict(P)
    return finite_distribution([(P[i], int(y[i]), w[i]) for i in range(P.shape[0])], noise)


def uniform_box(lo, hi, target: Hypothesis, noise: float = 0.0) -> SyntheticDistribution:
    lo, hi = np.atleast_1d(np.asarray(lo, dtype=float)), np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or not np.all(hi > lo):
        raise DistributionError("box corners must match in dimension with hi > lo")
    if not (0.0 <= noise < 0.5):
        raise DistributionError("noise rate must lie in [0, 0.5)")
    if target.dim != lo.shape[0]:
        raise DistributionError("target dimension does not match the box")
    return SyntheticDistribution("uniform-box", lo=lo, hi=hi, target=target, noise=noise)


def mixture(components: Sequence[SyntheticDistribution], weights) -> SyntheticDistribution:
    w = np.asarray(weights, dtype=float)
    if len(components) != w.shape[0] or not components:
        raise DistributionError("one weight per component is required")
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-9):
        raise DistributionError("mixture weights must be nonnegative and sum to 1")
    if len({c.dim for c in components}) != 1:
        raise DistributionError("mixture components differ in dimension")
    return SyntheticDistribution("mixture", components=list(components), mix=w / w.sum())
