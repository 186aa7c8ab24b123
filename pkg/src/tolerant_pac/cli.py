"""Command-line entry point: invariant suites, experiment sweeps and the lower-bound demo."""
from __future__ import annotations

import argparse
import json
import sys

from .harness.config import ConfigError, read_config
from .harness.experiment import fmt, rows_to_csv, run_experiment, summarize, summary_to_csv
from .harness.invariants import SUITES, verify_invariants

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_verify(args) -> int:
    report = verify_invariants(args.suite, args.budget, args.seed)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    _write(args.out, text)
    return EXIT_OK if report["passed"] else EXIT_VIOLATION


def cmd_experiment(args) -> int:
    try:
        cfg = read_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or cfg.out
    rows = run_experiment(cfg, workers=args.workers, audit_dir=args.audit_dir)
    _write(out, rows_to_csv(rows))
    summary = summary_to_csv(summarize(rows, cfg.epsilon, cfg.delta))
    if out not in (None, "-"):
        with open(out + ".summary.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(summary)
        sys.stdout.write(summary)
    else:
        sys.stderr.write(summary)
    return EXIT_OK


def cmd_demo(args) -> int:
    from .hardness import proper_vs_improper_demo

    if args.n not in (8, 12, 16):
        print("lower-bound-demo: --n must be 8, 12 or 16", file=sys.stderr)
        return EXIT_USAGE
    if args.trials < 1:
        print("lower-bound-demo: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    rep = proper_vs_improper_demo(args.n, args.trials, args.seed, workers=args.workers)
    lines = ["trial,proper_loss,improper_loss"]
    lines += [f"{r.trial},{fmt(float(r.proper_loss))},{fmt(float(r.improper_loss))}" for r in rep.rows]
    _write(args.out, "\n".join(lines) + "\n")
    print(f"proper mean {rep.proper_mean:.4f} (oracle {rep.oracle_mean:.4f}, z={rep.proper_z:+.2f}); "
          f"improper mean {rep.improper_mean:.4f}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tolerant-pac", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify-invariants", help="run a randomised invariant suite and print a JSON report")
    v.add_argument("--suite", required=True, choices=SUITES)
    v.add_argument("--budget", type=int, default=10000, help="base number of random cases (0 = empty report)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None, help="report path (default stdout)")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("run-experiment", help="run a sample-complexity sweep from a config file")
    e.add_argument("--config", required=True)
    e.add_argument("--out", default=None, help="CSV path (default from the config, else stdout)")
    e.add_argument("--workers", type=int, default=None, help="worker processes (default from the config)")
    e.add_argument("--audit-dir", default=None, help="write each output's candidate sets to this directory")
    e.set_defaults(func=cmd_experiment)

    d = sub.add_parser("lower-bound-demo", help="proper versus improper learning on the hardness class")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--trials", type=int, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--out", default=None, help="CSV path (default stdout)")
    d.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "budget", 0) is not None and getattr(args, "budget", 0) < 0:
        print("--budget must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
