"""Command-line front end: solve instances, generate synthetic ones, run the
brute-force oracle, and evaluate predictions against ground truth.

Exit codes: 0 success, 2 bad arguments or unreadable/invalid files, 3 oracle
size limit exceeded, 4 solve hit its iteration/time limit uncertified (the
best-so-far report is still written).  SETPACK_LOG=quiet|info|trace controls
verbosity (default info).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bounds import normalized_gap
from .engine import SolveConfig, solve
from .generator import generate_instance
from .io import (
    InstanceFormatError,
    parse_instance,
    parse_report_cells,
    parse_truth,
    write_instance,
    write_report,
    write_truth,
)
from .metrics import detection_metrics, segmentation_metrics
from .oracle import DEFAULT_ENUM_LIMIT, OracleSizeError, oracle_solve

__all__ = ["main"]


def _log_level() -> str:
    level = os.environ.get("SETPACK_LOG", "info").strip().lower()
    return level if level in ("quiet", "info", "trace") else "info"


def _fail(message: str, code: int) -> int:
    print(f"setpack: error: {message}", file=sys.stderr)
    return code


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setpack")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the column-generation solver on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--cuts-per-iter", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("generate", help="write a synthetic instance with planted truth")
    p.add_argument("--superpixels", type=int, required=True)
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.25)
    p.add_argument("--truth-out", default=None)

    p = sub.add_parser("oracle", help="brute-force optimal value of a small instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--limit", type=int, default=DEFAULT_ENUM_LIMIT)

    p = sub.add_parser("evaluate", help="score a solve report against planted truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--instance", required=True)
    return parser


def _cmd_solve(args, level: str) -> int:
    try:
        instance = parse_instance(_read_text(args.instance))
    except (OSError, InstanceFormatError) as exc:
        return _fail(str(exc), 2)
    try:
        config = SolveConfig(
            max_iterations=args.max_iters,
            time_limit=args.time_limit,
            thread_count=args.threads,
            max_cuts_per_iter=args.cuts_per_iter,
        )
    except ValueError as exc:
        return _fail(str(exc), 2)

    def log_iteration(rec):
        if level != "quiet":
            gap = normalized_gap(rec.best_ub, rec.best_lb)
            print(
                f"iter={rec.iteration} lp={rec.lp_value:.6g} lb={rec.best_lb:.6g} "
                f"ub={rec.best_ub:.6g} gap={gap:.6g} cols={rec.new_columns} "
                f"cuts={rec.cut_count}"
            )

    report = solve(instance, config, on_iteration=log_iteration)
    try:
        Path(args.out).write_text(write_report(report, seed=args.seed), encoding="utf-8")
    except OSError as exc:
        return _fail(str(exc), 2)
    if level == "trace":
        print(
            f"done certified={report.certified} objective={report.objective:.6g} "
            f"pool={report.iterations[-1].pool_size} cuts={report.iterations[-1].cut_count} "
            f"wall={report.wall_seconds:.3f}s threads={report.thread_count}"
        )
    if level != "quiet":
        print(
            f"objective={report.objective:.6g} certified={str(report.certified).lower()} "
            f"gap={report.normalized_gap:.6g}"
        )
    return 0 if report.certified else 4


def _cmd_generate(args, level: str) -> int:
    try:
        instance, truth = generate_instance(
            n_superpixels=args.superpixels,
            n_planted_cells=args.cells,
            cell_radius=args.radius,
            noise=args.noise,
            seed=args.seed,
        )
    except ValueError as exc:
        return _fail(str(exc), 2)
    out = Path(args.out)
    truth_out = (
        Path(args.truth_out)
        if args.truth_out
        else (out.with_suffix(".truth.json") if out.suffix == ".json" else Path(str(out) + ".truth.json"))
    )
    try:
        out.write_text(write_instance(instance), encoding="utf-8")
        truth_out.write_text(write_truth(truth.cells, truth.background), encoding="utf-8")
    except OSError as exc:
        return _fail(str(exc), 2)
    if level != "quiet":
        print(f"wrote {out} and {truth_out}")
    return 0


def _cmd_oracle(args, level: str) -> int:
    try:
        instance = parse_instance(_read_text(args.instance))
    except (OSError, InstanceFormatError) as exc:
        return _fail(str(exc), 2)
    try:
        cells, value = oracle_solve(instance, limit=args.limit)
    except OracleSizeError as exc:
        return _fail(str(exc), 3)
    print(f"optimal value: {value:.12g}")
    if level == "trace":
        for cell in cells:
            print(f"cell {list(cell.members)} cost {cell.cost:.12g}")
    return 0


def _cmd_evaluate(args, level: str) -> int:
    try:
        instance = parse_instance(_read_text(args.instance))
        pred = parse_report_cells(_read_text(args.pred))
        truth_cells, _ = parse_truth(_read_text(args.truth))
    except (OSError, InstanceFormatError, ValueError) as exc:
        return _fail(str(exc), 2)
    det = detection_metrics(pred, truth_cells, instance)
    pairs = [(pred[i], truth_cells[j]) for i, j in det.matches]
    seg = segmentation_metrics(pairs, instance)
    print(f"precision={det.precision:.6g} recall={det.recall:.6g} f_score={det.f_score:.6g}")
    dice = "n/a" if seg.dice is None else f"{seg.dice:.6g}"
    jaccard = "n/a" if seg.jaccard is None else f"{seg.jaccard:.6g}"
    print(f"dice={dice} jaccard={jaccard}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = _log_level()
    if args.command == "solve":
        return _cmd_solve(args, level)
    if args.command == "generate":
        return _cmd_generate(args, level)
    if args.command == "oracle":
        return _cmd_oracle(args, level)
    return _cmd_evaluate(args, level)


if __name__ == "__main__":
    sys.exit(main())
