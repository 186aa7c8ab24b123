"""Seeded sample-complexity sweeps written as CSV."""
from __future__ import annotations

import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from ..geometry import child_rng
from ..discretization import induced_finite_perturbation
from ..learners import (audit_text, rerm_and_discretize, rerm_and_smooth, rerm_and_smooth_discretized, ssl_agnostic,
                        ssl_realizable)
from .config import ExperimentConfig

CSV_COLUMNS = ("learner", "m", "n_unlabeled", "trial", "loss", "loss_kind", "std_error", "opt_v", "excess",
               "wall_ms", "seed")
SUMMARY_COLUMNS = ("m", "n_unlabeled", "trials", "successes", "success_fraction", "wilson_lower")


@dataclass(frozen=True)
class ResultRow:
    learner: str
    m: int
    n_unlabeled: int
    trial: int
    loss: float
    loss_kind: str
    std_error: float
    opt_v: float
    excess: float
    wall_ms: float
    seed: int

    @property
    def failed(self) -> bool:
        return self.loss_kind.startswith("failed")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in rows:
        buf.write(",".join(fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def wilson_lower(successes: int, n: int, delta: float) -> float:
    """Lower end of the two-sided ``1 - delta`` Wilson score interval."""
    if n == 0:
        return 0.0
    z = NormalDist().inv_cdf(1.0 - delta / 2.0)
    p = successes / n
    denom = 1.0 + z * z / n
    centre = p + z * z / (2 * n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, (centre - half) / denom)


def _fit(cfg: ExperimentConfig, S, S_u, cover):
    lc = cfg.learner_cfg
    if cfg.learner == "rerm-and-smooth":
        return rerm_and_smooth(S, lc)
    if cfg.learner == "rerm-and-smooth-discretized":
        return rerm_and_smooth_discretized(S, lc)
    if cfg.learner == "rerm-and-discretize":
        return rerm_and_discretize(S, cover, lc)
    if cfg.learner == "ssl-realizable":
        return ssl_realizable(S, S_u, cover, lc)
    return ssl_agnostic(S, S_u, cover, lc)


class OptOrderError(AssertionError):
    """Brute-forced optima broke the ordering ``OPT_U <= OPT_C <= OPT_V``."""


def run_trial(cfg: ExperimentConfig, trial: int, opt_v: float, audit_dir: str | None = None) -> list[ResultRow]:
    """All sweep points of one trial; samples for smaller ``m`` are prefixes of the largest draw."""
    rng = child_rng(cfg.seed, trial)
    dist, lc = cfg.dist, cfg.learner_cfg
    U, _, _ = lc.types
    m_max = max(m for m, _ in cfg.sweep)
    n_max = max(n for _, n in cfg.sweep)
    S_all = dist.sample(m_max, rng)
    X_u = dist.sample(n_max, rng).X if n_max else None
    lo, hi = dist.bounds()
    cover = lc.cover(lo, hi)
    eval_rng = child_rng(cfg.seed, trial, 1)
    rows = []
    for m, n_u in cfg.sweep:
        t0 = time.perf_counter()
        try:
            out = _fit(cfg, S_all.head(m), None if X_u is None else X_u[:n_u], cover)
            if audit_dir is not None:
                name = os.path.join(audit_dir, f"trial{trial}_m{m}_n{n_u}.txt")
                with open(name, "w", encoding="utf-8") as fh:
                    fh.write(audit_text(out))
            est = dist.expected_robust_loss(out, U, rng=eval_rng)
            loss, kind, se = est.value, est.kind, est.std_error
        except Exception as exc:  # a failed fit is recorded and the sweep goes on
            loss, kind, se = float("nan"), f"failed:{type(exc).__name__}", float("nan")
        wall = (time.perf_counter() - t0) * 1000.0 if cfg.timing else 0.0
        rows.append(ResultRow(cfg.learner, m, n_u, trial, loss, kind, se, opt_v, loss - opt_v, wall, cfg.seed))
    return rows


def _trial_job(args):
    return run_trial(*args)


def compute_opts(cfg: ExperimentConfig) -> tuple[float, float, float]:
    """``(OPT_U, OPT_C, OPT_V)`` brute-forced over the class; NaNs off finite supports."""
    if cfg.dist.kind != "finite":
        return (float("nan"),) * 3
    lc = cfg.learner_cfg
    H = lc.make_class()
    U, V, _ = lc.types
    C = induced_finite_perturbation(lc.cover(*cfg.dist.bounds()), V)
    return cfg.dist.opt(H, U), cfg.dist.opt(H, C), cfg.dist.opt(H, V)


def compute_opt_v(cfg: ExperimentConfig) -> float:
    """OPT_V after checking ``OPT_U <= OPT_C <= OPT_V``."""
    opt_u, opt_c, opt_v = compute_opts(cfg)
    if not math.isnan(opt_v) and not (opt_u <= opt_c + 1e-12 and opt_c <= opt_v + 1e-12):
        raise OptOrderError(f"OPT_U={opt_u!r}, OPT_C={opt_c!r}, OPT_V={opt_v!r}")
    return opt_v


def run_experiment(cfg: ExperimentConfig, workers: int | None = None,
                   audit_dir: str | None = None) -> list[ResultRow]:
    """One row per (sweep point, trial), in trial order whatever the worker count.

    With ``audit_dir`` each fitted output's candidate sets are written there.
    """
    workers = workers or cfg.workers
    opt_v = compute_opt_v(cfg)
    if audit_dir is not None:
        os.makedirs(audit_dir, exist_ok=True)
    jobs = [(cfg, t, opt_v, audit_dir) for t in range(cfg.trials)]
    if workers <= 1:
        per_trial = [_trial_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_trial_job, jobs))
    return [row for rows in per_trial for row in rows]


@dataclass(frozen=True)
class SummaryRow:
    m: int
    n_unlabeled: int
    trials: int
    successes: int
    success_fraction: float
    wilson_lower: float


def summarize(rows, epsilon: float, delta: float) -> list[SummaryRow]:
    """Per sweep point: share of trials with ``loss <= opt_v + epsilon`` (or ``loss <= epsilon`` without OPT)."""
    points = sorted({(r.m, r.n_unlabeled) for r in rows})
    out = []
    for m, n in points:
        sel = [r for r in rows if (r.m, r.n_unlabeled) == (m, n)]
        ok = 0
        for r in sel:
            if r.failed:
                continue
            ref = 0.0 if math.isnan(r.opt_v) else r.opt_v
            ok += r.loss <= ref + epsilon
        out.append(SummaryRow(m, n, len(sel), ok, ok / len(sel), wilson_lower(ok, len(sel), delta)))
    return out


def summary_to_csv(summary) -> str:
    lines = [",".join(SUMMARY_COLUMNS)]
    lines += [",".join(fmt(getattr(s, c)) for c in SUMMARY_COLUMNS) for s in summary]
    return "\n".join(lines) + "\n"
