"""Command-line entry point.

Four subcommands:

* ``solve``      one solver run from a JSON config
* ``sweep``      queries-to-success over an epsilon grid, with a slope fit
* ``lowerbound`` zero-respecting runs against a resisting chain oracle
* ``verify``     executable property suites

Exit codes: 0 success, 1 property failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import BudgetExceeded, ConfigError
from .config import load_config
from .lowerbound import RUN_COLUMNS, run_lowerbound
from .reports import (FIRST_PASSAGE_COLUMNS, RESULT_COLUMNS,
                      TRAJECTORY_COLUMNS, run_manifest, write_csv, write_json)
from .sweep import run_solve, run_sweep
from .verify import DEFAULT_SEED, SUITE_NAMES, run_verify


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sosplab",
        description="Desk-scale experiments for stochastic second-order "
                    "optimization methods and their resisting instances.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True,
                       help="path to a JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config's master seed")
        p.add_argument("--out", default=".",
                       help="output directory (default: current directory)")
        return p

    add_run_command("solve", "run one solver configuration")
    add_run_command("sweep", "sweep an epsilon grid and fit the query slope")
    add_run_command("lowerbound", "replicate zero-respecting runs against a "
                                  "resisting oracle")

    p_verify = sub.add_parser("verify", help="run executable property suites")
    p_verify.add_argument("--suite", default="all",
                          help="suite name or 'all' "
                               f"(suites: {', '.join(SUITE_NAMES)})")
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--out", default=None,
                          help="directory for the JSON report (optional)")
    return parser


def _cmd_solve(args) -> int:
    cfg = load_config(args.config, "solve", seed_override=args.seed)
    result, row = run_solve(cfg)
    out = Path(args.out)
    write_csv(out / "results.csv", RESULT_COLUMNS, [row])
    write_json(out / "manifest.json", run_manifest(cfg.to_dict(), {
        "mode": result.mode,
        "params": {k: v for k, v in result.params.items()},
        "output_index": result.output_index,
        "queries": result.ledger.as_dict(),
    }))
    print(f"solve {result.algorithm}: grad_norm={result.grad_norm_exact:.6g} "
          f"lambda_min={result.lambda_min_exact:.6g} "
          f"queries={result.ledger.total} -> {out / 'results.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config, "sweep", seed_override=args.seed)
    outcome = run_sweep(cfg)
    out = Path(args.out)
    write_csv(out / "results.csv", RESULT_COLUMNS, outcome.rows)
    write_csv(out / "first_passage.csv", FIRST_PASSAGE_COLUMNS,
              outcome.fp_rows)
    write_json(out / "sweep_summary.json",
               run_manifest(cfg.to_dict(), outcome.summary()))
    for warning in outcome.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if outcome.fit is None:
        print(f"sweep: no slope fit ({len(outcome.rows)} rows) "
              f"-> {out / 'results.csv'}")
    else:
        f = outcome.fit
        print(f"sweep: slope={f.slope:.3f} r2={f.r_squared:.4f} over "
              f"{f.n_points} grid points -> {out / 'results.csv'}")
    return 0


def _cmd_lowerbound(args) -> int:
    cfg = load_config(args.config, "lowerbound", seed_override=args.seed)
    outcome = run_lowerbound(cfg)
    out = Path(args.out)
    write_csv(out / "runs.csv", RUN_COLUMNS, outcome.run_rows)
    write_csv(out / "trajectories.csv", TRAJECTORY_COLUMNS,
              outcome.trajectory_rows)
    extra = {"summary": outcome.summary}
    if outcome.audit_rows:
        extra["audits"] = outcome.audit_rows
    write_json(out / "lowerbound_summary.json",
               run_manifest(cfg.to_dict(), extra))
    s = outcome.summary
    print(f"lowerbound: finished_by_deadline="
          f"{s['finished_by_deadline_fraction']:.3f} "
          f"(allowed {s['early_fraction_allowed']:.3f}), "
          f"median rounds {s['median_rounds_completed']} vs deadline "
          f"{s['deadline_rounds']:.1f} -> {out / 'runs.csv'}")
    if not outcome.bound_respected:
        print("lowerbound: progress deadline violated more often than the "
              "failure probability allows", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    report = run_verify([args.suite], seed=args.seed)
    for suite, body in report["suites"].items():
        for check in body["checks"]:
            tag = "PASS" if check["passed"] else "FAIL"
            print(f"[{tag}] {suite}.{check['name']} "
                  f"(margin {check['margin']:.3g}): {check['detail']}")
    if args.out is not None:
        path = Path(args.out) / "verify_report.json"
        write_json(path, report)
        print(f"report -> {path}")
    print(f"verify: {'all checks passed' if report['passed'] else 'FAILURES'}")
    return 0 if report["passed"] else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"solve": _cmd_solve, "sweep": _cmd_sweep,
                "lowerbound": _cmd_lowerbound, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget refused: {exc} (required {exc.required})",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
