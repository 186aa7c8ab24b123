"""The tolerant robust learners as deterministic pipelines over the exact oracles.

Each learner returns a hypothesis whose ``base`` attribute is the in-class
RERM output it transforms and whose ``audit`` dict records the intermediate
candidate sets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import (DiscretizedHypothesis, EtaNetPerturbation, EtaNetSpec, GridCover, build_grid_cover,
                             induced_finite_perturbation)
from .geometry import BallType, as_points, child_rng, eta_for_tolerance, tolerance_types
from .hypotheses import (STAR, CapExceededError, Hypothesis, HypothesisClass, LabeledSample,
                         all_labelings, effective_behaviors, make_class, partial_matrix, rerm_ball, rerm_finite,
                         rerm_labelings, rerm_over, robust_losses)
from .losses import smooth

LABELING_LOOPS = ("literal", "batched", "sweep")


class NotRealizableError(ValueError):
    """No labelling of the unlabelled sample is robustly realisable by the class."""


@dataclass(frozen=True)
class LearnerConfig:
    r: float
    gamma: float
    d: int = 1
    p: float = 2.0
    hclass: str = "thresholds"
    mc_samples: int = 101
    smoothing: str = "auto"
    seed: int = 0
    labeling_cap: int = 1 << 22
    eta: float | None = None
    net_c: float = 3.0
    net_certify: bool = True
    labeling_loop: str = "literal"
    pseudocode_reference_rerm: bool = False
    cover_offset: float | None = None

    def __post_init__(self):
        if not (self.r > 0):
            raise ValueError("r must be positive")
        if not (self.gamma > 0):
            raise ValueError("gamma must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.labeling_cap < 1 or self.mc_samples < 1:
            raise ValueError("caps and sample counts must be positive")
        if self.labeling_loop not in LABELING_LOOPS:
            raise ValueError(f"labeling_loop must be one of {LABELING_LOOPS}")

    @property
    def types(self) -> tuple[BallType, BallType, BallType]:
        return tolerance_types(self.r, self.gamma, self.p)

    def make_class(self) -> HypothesisClass:
        return make_class(self.hclass, self.d)

    def net_spec(self, H: HypothesisClass) -> EtaNetSpec:
        eta = self.eta if self.eta is not None else eta_for_tolerance(self.gamma, self.d)
        return EtaNetSpec(eta, H.vc_dim, self.net_c)

    def cover(self, lo, hi) -> GridCover:
        """Grid cover of the support box ``[lo, hi]`` widened by twice the reference radius."""
        pad = 2.0 * self.r * (1.0 + self.gamma)
        lo = np.atleast_1d(np.asarray(lo, dtype=float)) - pad
        hi = np.atleast_1d(np.asarray(hi, dtype=float)) + pad
        return build_grid_cover((lo, hi), self.r, self.gamma, self.d, self.cover_offset)


def _attach(out: Hypothesis, base: Hypothesis, **audit) -> Hypothesis:
    out.base = base
    out.audit = audit
    return out


# ---------------------------------------------------------------------------
# supervised


def rerm_and_smooth(S: LabeledSample, cfg: LearnerConfig, H: HypothesisClass | None = None) -> Hypothesis:
    """Robust ERM under the reference type, then majority-smooth over the smoothing type."""
    H = H or cfg.make_class()
    _, V, W = cfg.types
    h = rerm_ball(H, S, V)
    out = smooth(h, W, cfg.mc_samples, seed=int(child_rng(cfg.seed, 1).integers(2**62)), mode=cfg.smoothing)
    return _attach(out, h)


def rerm_and_discretize(S: LabeledSample, cover: GridCover, cfg: LearnerConfig,
                        H: HypothesisClass | None = None) -> Hypothesis:
    """Robust ERM under the grid-induced type, then nearest-grid-point lookup."""
    H = H or cfg.make_class()
    _, V, _ = cfg.types
    C = induced_finite_perturbation(cover, V)
    h = rerm_finite(H, S, C)
    return _attach(DiscretizedHypothesis(h, cover, V.metric), h, C=C)


def rerm_and_smooth_discretized(S: LabeledSample, cfg: LearnerConfig, H: HypothesisClass | None = None) -> Hypothesis:
    """Robust ERM under per-point eta-nets of the reference balls, then smoothing.

    With ``pseudocode_reference_rerm`` the first step uses the reference balls
    themselves instead of the nets.
    """
    H = H or cfg.make_class()
    _, V, W = cfg.types
    spec = cfg.net_spec(H)
    certify = cfg.net_certify and cfg.d == 1
    nets = EtaNetPerturbation(V, H, spec, seed=int(child_rng(cfg.seed, 2).integers(2**62)), certify=certify)
    h = rerm_ball(H, S, V) if cfg.pseudocode_reference_rerm else rerm_finite(H, S, nets)
    out = smooth(h, W, cfg.mc_samples, seed=int(child_rng(cfg.seed, 1).integers(2**62)), mode=cfg.smoothing)
    return _attach(out, h, nets=nets, eta=spec.eta)


# ---------------------------------------------------------------------------
# semi-supervised


def _check_cap(n: int, cfg: LearnerConfig) -> None:
    if n == 0:
        raise ValueError("the unlabelled sample is empty")
    if (1 << n) > cfg.labeling_cap:
        raise CapExceededError(f"2^{n} labelings exceed the cap of {cfg.labeling_cap}")


def _labeling_rerm(H: HypothesisClass, X: np.ndarray, T, oracle, loop: str) -> tuple[np.ndarray, np.ndarray]:
    """RERM output and its empirical robust loss for every labelling of ``X``.

    Returns ``(params, losses)`` with one row per labelling in product order.
    """
    n = X.shape[0]
    if loop == "literal":
        rows, losses = [], []
        for y in itertools.product((0, 1), repeat=n):
            S = LabeledSample(X, np.array(y))
            h = oracle(H, S, T)
            P = H.params_of([h])
            rows.append(P[0])
            losses.append(robust_losses(H, P, S, T)[0])
        return np.array(rows).reshape(len(rows), H.n_params), np.array(losses)
    P, best, loss = rerm_labelings(H, X, all_labelings(n), T)
    return P[best], loss


def _canonical(P: np.ndarray) -> np.ndarray:
    return np.unique(P, axis=0) if P.shape[0] else P


def realizable_candidates(H: HypothesisClass, X: np.ndarray, V, cfg: LearnerConfig) -> np.ndarray:
    """Parameter rows of the RERM outputs that robustly fit some labelling of ``X``.

    Deduplicated by robust behaviour on ``X`` (first row in canonical order
    kept) and returned in canonical order.
    """
    n = X.shape[0]
    _check_cap(n, cfg)
    if cfg.labeling_loop == "sweep":
        # only labellings equal to a star-free behaviour can reach zero loss
        _, B = effective_behaviors(H, X, V)
        rows = []
        for y in B[(B != STAR).all(axis=1)]:
            S = LabeledSample(X, y)
            h = rerm_ball(H, S, V) if isinstance(V, BallType) else rerm_finite(H, S, V)
            rows.append(H.params_of([h])[0])
        P = np.array(rows).reshape(len(rows), H.n_params)
    else:
        oracle = rerm_ball if isinstance(V, BallType) else rerm_finite
        P, loss = _labeling_rerm(H, X, V, oracle, cfg.labeling_loop)
        P = P[loss == 0]
    P = _canonical(P)
    if P.shape[0] == 0:
        return P
    _, first = np.unique(partial_matrix(H, P, X, V), axis=0, return_index=True)
    return P[np.sort(first)]


def ssl_realizable(S_l: LabeledSample, S_u, cover: GridCover, cfg: LearnerConfig,
                   H: HypothesisClass | None = None) -> Hypothesis:
    """Self-label the unlabelled points every way, keep robust fits, pick by labelled data."""
    H = H or cfg.make_class()
    _, V, _ = cfg.types
    X = _points(S_u)
    Hp = realizable_candidates(H, X, V, cfg)
    if Hp.shape[0] == 0:
        raise NotRealizableError("no labelling of the unlabelled sample is robustly realisable")
    C = induced_finite_perturbation(cover, V)
    h = H.make(Hp[rerm_over(H, Hp, S_l, C)])
    return _attach(DiscretizedHypothesis(h, cover, V.metric), h, H_prime=[H.make(p) for p in Hp], C=C)


@dataclass
class PruneResult:
    kept: np.ndarray
    margin: np.ndarray
    order: np.ndarray
    witness: dict = field(default_factory=dict)


def robustly_disagree(b1: np.ndarray, b2: np.ndarray) -> bool:
    """Some point is robustly labelled by both behaviours, with different labels."""
    return bool(np.any((b1 != STAR) & (b2 != STAR) & (b1 != b2)))


def prune_by_margin(B: np.ndarray) -> PruneResult:
    """Sweep candidates by increasing margin count; keep one unless a keeper robustly agrees with it.

    ``B`` holds partial labels (rows: candidates in canonical order). A
    candidate is dropped when some already-kept candidate, whose margin count
    is no larger, never robustly disagrees with it; that keeper is recorded
    as the witness.
    """
    margin = (B == STAR).sum(axis=1)
    order = np.argsort(margin, kind="stable")
    kept: list[int] = []
    witness: dict[int, int] = {}
    for i in order:
        for j in kept:
            if not robustly_disagree(B[i], B[j]):
                witness[int(i)] = j
                break
        else:
            kept.append(int(i))
    return PruneResult(np.array(sorted(kept), dtype=np.int64), margin, order, witness)


def agnostic_candidates(H: HypothesisClass, X: np.ndarray, C, cfg: LearnerConfig):
    """``(H', B, prune)``: all labelling RERM outputs, their partial labels on ``X`` and the pruning."""
    _check_cap(X.shape[0], cfg)
    # no labelling is filtered out here, so the sweep has nothing to skip and runs batched
    loop = "literal" if cfg.labeling_loop == "literal" else "batched"
    P, _ = _labeling_rerm(H, X, C, rerm_finite, loop)
    P = _canonical(P)
    B = partial_matrix(H, P, X, C)
    return P, B, prune_by_margin(B)


def ssl_agnostic(S_l: LabeledSample, S_u, cover: GridCover, cfg: LearnerConfig,
                 H: HypothesisClass | None = None) -> Hypothesis:
    """Labelling RERM under the grid type, margin-ordered pruning, then RERM on labelled data."""
    H = H or cfg.make_class()
    _, V, _ = cfg.types
    X = _points(S_u)
    C = induced_finite_perturbation(cover, V)
    P, B, pr = agnostic_candidates(H, X, C, cfg)
    Pk = P[pr.kept]
    h = H.make(Pk[rerm_over(H, Pk, S_l, C)])
    return _attach(DiscretizedHypothesis(h, cover, V.metric), h, H_prime=[H.make(p) for p in P],
                   H_double_prime=[H.make(p) for p in Pk], behaviors=B, prune=pr, C=C)


def check_pairwise_disagreement(B_kept: np.ndarray) -> bool:
    """Every two kept candidates robustly disagree somewhere (exhaustive)."""
    return all(robustly_disagree(B_kept[i], B_kept[j]) for i in range(len(B_kept)) for j in range(i + 1, len(B_kept)))


def check_prune_witnesses(B: np.ndarray, pr: PruneResult) -> bool:
    """Each pruned candidate has a keeper with no larger margin count that never robustly disagrees with it."""
    kept = set(pr.kept.tolist())
    for i in range(B.shape[0]):
        if i in kept:
            continue
        j = pr.witness.get(i)
        if j is None or j not in kept or pr.margin[j] > pr.margin[i] or robustly_disagree(B[i], B[j]):
            return False
    return True


def h_double_prime_soft_bound(n: int, vc_c: int, a: float = 1.0) -> float:
    """``n ** (a * VC_C * log2 n)``, the growth bound on the pruned set."""
    if n <= 1:
        return 1.0
    return float(n) ** (a * max(vc_c, 1) * math.log2(n))


def audit_text(out: Hypothesis) -> str:
    """Plain-text record of a learner output: its base hypothesis and any candidate sets."""
    lines = [f"output {out.describe()}", f"base {out.base.describe()}"]
    audit = getattr(out, "audit", {})
    for key in ("H_prime", "H_double_prime"):
        if key in audit:
            lines.append(f"{key} {len(audit[key])}")
            lines += [f"  {h.describe()}" for h in audit[key]]
    pr = audit.get("prune")
    if pr is not None:
        lines.append("prune_witness " + " ".join(f"{i}->{j}" for i, j in sorted(pr.witness.items())))
    return "\n".join(lines) + "\n"


def _points(S_u) -> np.ndarray:
    if isinstance(S_u, LabeledSample):
        return S_u.X
    return as_points(S_u)


LEARNERS = {
    "rerm-and-smooth": "supervised",
    "rerm-and-discretize": "supervised-cover",
    "rerm-and-smooth-discretized": "supervised",
    "ssl-realizable": "semi-supervised",
    "ssl-agnostic": "semi-supervised",
}
