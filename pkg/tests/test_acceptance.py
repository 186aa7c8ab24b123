"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the summary
section) or ``python3 tests/test_acceptance.py``.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from tolerant_pac.discretization import FinitePerturbation, build_grid_cover, induced_finite_perturbation
from tolerant_pac.geometry import BallType, child_rng, eta_for_tolerance, overlap_fraction_exact
from tolerant_pac.harness.config import read_config
from tolerant_pac.harness.experiment import run_experiment
from tolerant_pac.harness.invariants import (check_discretization_chain, check_discretization_chain_2d,
                                             check_partial_bound, check_smoothing_chain)
from tolerant_pac.hardness import proper_vs_improper_demo
from tolerant_pac.hypotheses import (IntervalClass, LabeledSample, ThresholdClass, compute_loss_class_vc,
                                     compute_vc_robust, sauer_bound)
from tolerant_pac.learners import (LearnerConfig, check_pairwise_disagreement, check_prune_witnesses,
                                   ssl_agnostic, ssl_realizable)

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_criterion_01_discretization_chain(acceptance_record):
    with Timer() as t:
        one_d = check_discretization_chain(child_rng(1001), 10_000)
        two_d = check_discretization_chain_2d(child_rng(1002), 2_000)
    ok = one_d.violations == 0 and two_d.violations == 0 and one_d.cases >= 10_000 and t.seconds < 30
    acceptance_record(1, ok, "loss chain U(nn_C h) <= C(h) <= V(h)",
                      f"1-d exact {one_d.violations}/{one_d.cases} violations, 2-d probe "
                      f"{two_d.violations}/{two_d.cases}, {t.seconds:.1f}s (limit 30s)")
    assert ok


def test_criterion_02_smoothing_chain(acceptance_record):
    for g in (0.25, 0.5, 1.0):
        assert 3 * eta_for_tolerance(g, 1) <= float(overlap_fraction_exact(g, 1))
    with Timer() as t:
        res = check_smoothing_chain(child_rng(2001), 10_000)
    ok = res.violations == 0 and res.detail["premise_holds"] and res.cases >= 10_000 and t.seconds < 60
    acceptance_record(2, ok, "smoothing chain U(sm_W h) <= C(h) on certified eta-nets",
                      f"{res.violations}/{res.cases} violations, premise {res.detail['premise_holds']}, "
                      f"{t.seconds:.1f}s (limit 60s)")
    assert ok


def grid_type(k: int) -> FinitePerturbation:
    """``C(x)``: unit-grid points within ``k/2 - 1/4`` of ``x`` (``k - 1`` or ``k`` points)."""
    cover = build_grid_cover(([-40.0], [40.0]), 1.0, 0.5, 1, offset=0.0)
    return induced_finite_perturbation(cover, BallType(k / 2 - 0.25))


def test_criterion_03_loss_class_vc(acceptance_record):
    rng = child_rng(3001)
    instances, worst, bad = 0, 0.0, 0
    with Timer() as t:
        for k in (2, 4, 8):
            C = grid_type(k)
            for H in (ThresholdClass(), IntervalClass()):
                for _ in range(10):
                    m = int(rng.integers(6, 13))
                    xs = np.round(rng.uniform(-20, 20, size=m) * 4) / 4
                    cands = [(np.array([x]), int(rng.integers(0, 2))) for x in xs]
                    k_obs = max(C(c[0]).shape[0] for c in cands)
                    vc = compute_loss_class_vc(H, C, cands)
                    bound = H.vc_dim * math.log2(k_obs) if k_obs > 1 else 0
                    bad += vc > bound + 1e-12
                    worst = max(worst, vc - bound)
                    instances += 1
    ok = bad == 0 and instances >= 50 and t.seconds < 120
    acceptance_record(3, ok, "loss-class VC <= VC(H) log2 k on grid-induced types",
                      f"{bad} violations over {instances} instances (k in 2,4,8; max VC - bound {worst:+.2f}), "
                      f"{t.seconds:.1f}s (limit 120s)")
    assert ok


def test_criterion_04_sauer_on_h_prime(acceptance_record):
    rng = child_rng(4001)
    bad, largest = 0, 0
    cover = build_grid_cover(([-14.0], [14.0]), 1.0, 0.5, 1)
    with Timer() as t:
        for run in range(100):
            kind = ("thresholds", "intervals")[run % 2]
            cfg = LearnerConfig(1.0, 0.5, hclass=kind, labeling_loop="batched")
            H, (_, V, _) = cfg.make_class(), cfg.types
            n = int(rng.integers(3, 15))
            X = np.round(rng.uniform(-10, 10, size=n) * 4)[:, None] / 4
            S_l = LabeledSample(X[:2], np.zeros(2, dtype=np.int8))
            out = ssl_realizable(S_l, X, cover, cfg)
            size = len(out.audit["H_prime"])
            bound = sauer_bound(n, compute_vc_robust(H, V, X))
            bad += size > bound
            largest = max(largest, n)
    ok = bad == 0
    acceptance_record(4, ok, "|H'| within the Sauer bound of the robust VC dimension",
                      f"{bad} violations over 100 runs (n up to {largest}), {t.seconds:.1f}s")
    assert ok


def test_criterion_05_realizable_end_to_end(acceptance_record):
    cfg = read_config(str(CONFIGS / "realizable_thresholds.cfg"))
    with Timer() as t:
        rows = run_experiment(cfg)
    by_m = {}
    for r in rows:
        by_m.setdefault(r.m, []).append(r)
    frac = {m: np.mean([(not r.failed) and r.loss <= 0.1 for r in rs]) for m, rs in sorted(by_m.items())}
    ms = sorted(frac)
    monotone = all(frac[a] <= frac[b] for a, b in zip(ms, ms[1:]))
    at200 = sum((not r.failed) and r.loss <= 0.1 for r in by_m[200])
    ok = at200 >= 18 and monotone and t.seconds < 120
    acceptance_record(5, ok, "realizable grid learner, U-loss <= 0.1",
                      f"{at200}/20 at m=200, success by m {', '.join(f'{m}:{frac[m]:.2f}' for m in ms)} "
                      f"(non-decreasing {monotone}), {t.seconds:.1f}s (limit 120s)")
    assert ok


def test_criterion_06_agnostic_end_to_end(acceptance_record):
    cfg = read_config(str(CONFIGS / "agnostic_thresholds.cfg"))
    with Timer() as t:
        rows = [r for r in run_experiment(cfg) if r.m == 800]
    wins = sum((not r.failed) and r.loss <= r.opt_v + 0.1 for r in rows)
    ok = wins >= 18 and t.seconds < 180
    acceptance_record(6, ok, "agnostic grid learner, U-loss <= OPT_V + 0.1 at m=800",
                      f"{wins}/{len(rows)} trials (OPT_V {rows[0].opt_v:.4f}), {t.seconds:.1f}s (limit 180s)")
    assert ok


def test_criterion_07_factor_three_ssl(acceptance_record):
    cfg = read_config(str(CONFIGS / "ssl_agnostic.cfg"))
    lc, dist = cfg.learner_cfg, cfg.dist
    H = lc.make_class()
    U, V, _ = lc.types
    cover = lc.cover(*dist.bounds())
    C = induced_finite_perturbation(cover, V)
    opt_c = dist.opt(H, C)
    wins, pairwise_ok, worst = 0, True, 0.0
    with Timer() as t:
        for trial in range(20):
            rng = child_rng(cfg.seed, trial)
            S_l = dist.sample(60, rng)
            X_u = dist.sample(12, rng).X
            out = ssl_agnostic(S_l, X_u, cover, lc)
            a = out.audit
            pairwise_ok &= check_pairwise_disagreement(a["behaviors"][a["prune"].kept])
            pairwise_ok &= check_prune_witnesses(a["behaviors"], a["prune"])
            loss_c = dist.expected_robust_loss(out, C).value
            worst = max(worst, loss_c)
            wins += loss_c <= 3 * opt_c + 0.1
    ok = opt_c > 0 and wins >= 18 and pairwise_ok and t.seconds < 300
    acceptance_record(7, ok, "semi-supervised agnostic learner, C-loss <= 3 OPT_C + 0.1",
                      f"{wins}/20 trials (OPT_C {opt_c:.4f}, worst C-loss {worst:.4f}), pairwise property "
                      f"{'held' if pairwise_ok else 'BROKEN'} in every trial, {t.seconds:.1f}s (limit 300s)")
    assert ok


def test_criterion_08_impossibility_demo(acceptance_record):
    with Timer() as t:
        rep = proper_vs_improper_demo(8, 100, seed=8001)
    ok = abs(rep.proper_z) <= 3 and rep.proper_mean > 0.2 and rep.improper_mean <= 0.05 and t.seconds < 120
    acceptance_record(8, ok, "proper RERM fails where the grid learner succeeds (n=8)",
                      f"proper mean {rep.proper_mean:.4f} vs oracle {rep.oracle_mean:.4f} (z {rep.proper_z:+.2f}), "
                      f"improper mean {rep.improper_mean:.4f}, {t.seconds:.1f}s (limit 120s)")
    assert ok


def test_criterion_09_partial_label_bound(acceptance_record):
    res = check_partial_bound(child_rng(9001), 10_000)
    ok = res.violations == 0 and res.cases >= 10_000
    acceptance_record(9, ok, "|C-loss(h1) - C-loss(h2)| <= partial disagreement",
                      f"{res.violations}/{res.cases} violations ({res.detail['agreeing_cases']} cases with "
                      f"agreeing partial labels)")
    assert ok


def _cli(*args) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "tolerant_pac", *args], capture_output=True, cwd=ROOT)


def test_criterion_10_determinism(acceptance_record, tmp_path):
    ssl = (CONFIGS / "ssl_agnostic.cfg").read_text().replace("experiment.trials = 20", "experiment.trials = 4")
    (tmp_path / "ssl.cfg").write_text(ssl)
    invocations = {
        "realizable": ["run-experiment", "--config", str(CONFIGS / "realizable_thresholds.cfg")],
        "agnostic": ["run-experiment", "--config", str(CONFIGS / "agnostic_thresholds.cfg")],
        "ssl": ["run-experiment", "--config", str(tmp_path / "ssl.cfg")],
        "demo": ["lower-bound-demo", "--n", "8", "--trials", "40", "--seed", "3"],
    }
    mismatches = []
    with Timer() as t:
        for name, args in invocations.items():
            outputs = []
            for workers in (1, 8, 1, 8):
                out = tmp_path / f"{name}_{len(outputs)}.csv"
                res = _cli(*args, "--workers", str(workers), "--out", str(out))
                assert res.returncode == 0, res.stderr.decode()
                outputs.append(out.read_bytes())
            if len(set(outputs)) != 1:
                mismatches.append(name)
        reports = []
        for _ in range(2):
            res = _cli("verify-invariants", "--suite", "chains", "--budget", "500", "--seed", "4")
            reports.append(res.stdout)
        if reports[0] != reports[1]:
            mismatches.append("verify-invariants")
    ok = not mismatches
    acceptance_record(10, ok, "byte-identical CLI output across repeats and 1 vs 8 workers",
                      f"{len(invocations)} CSV invocations x 4 runs + invariant report x 2, "
                      f"mismatches: {mismatches or 'none'}, {t.seconds:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
