"""``place`` command line: run, compare, validate, render."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from qplace.errors import PlacementError, ValidationError
from qplace.harness import (
    ALGOS,
    emit_csv,
    emit_summary_csv,
    emit_svg,
    load_spec,
    read_placement,
    run_compare,
    run_one,
    write_placement,
)

LOG_LEVELS = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging() -> None:
    level = os.environ.get("PLACE_LOG", "off").lower()
    if level not in LOG_LEVELS:
        print(f"warning: PLACE_LOG={level!r} not in off/info/debug; using off", file=sys.stderr)
        level = "off"
    logger = logging.getLogger("qplace")
    logger.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVELS[level])
    logger.propagate = False


def parse_seeds(text: str) -> list[int]:
    """``1..5``, ``1-5`` or ``1,3,7`` (ranges inclusive)."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        for sep in ("..", "-"):
            if sep in part[1:]:
                lo, hi = part.split(sep, 1)
                seeds.extend(range(int(lo), int(hi) + 1))
                break
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError(f"no seeds in {text!r}")
    return seeds


def parse_algos(text: str) -> list[str]:
    algos = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in algos if a not in ALGOS]
    if bad or not algos:
        raise argparse.ArgumentTypeError(f"unknown algo(s) {bad}; choose from {', '.join(ALGOS)}")
    return algos


def write_run_outputs(report, bench, out: Path) -> None:
    stem = f"{report.algo}_s{report.seed}"
    write_placement(report.placement, bench.circuit, out / f"{stem}.placement.json")
    emit_svg(report.placement, bench.circuit, out / f"{stem}.svg")


def cmd_run(args) -> int:
    bench = load_spec(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_one(bench, args.algo, args.seed)
    emit_csv([report], out / "results.csv")
    write_run_outputs(report, bench, out)
    print(f"{report.algo} seed={report.seed} best_cost={report.best_cost:.9g} "
          f"offset={report.report.offset:.9g} evals={report.evals_used}")
    return 0


def cmd_compare(args) -> int:
    bench = load_spec(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_compare(bench, args.algos, args.seeds)
    emit_csv(result.reports, out / "results.csv")
    emit_summary_csv(result.summaries, out / "summary.csv")
    for r in result.reports:
        write_run_outputs(r, bench, out)
    for s in result.summaries:
        ett = "DNF" if s.median_evals_to_target is None else f"{s.median_evals_to_target:g}"
        print(f"{s.algo:13s} runs={s.runs} median_best_cost={s.median_best_cost:.6g} "
              f"median_offset={s.median_offset:.6g} median_evals_to_target={ett}")
    return 0


def cmd_validate(args) -> int:
    bench = load_spec(args.spec)
    c = bench.circuit
    def n(k, word):
        return f"{k} {word}" + ("" if k == 1 else "s")

    print(f"{bench.name}: ok ({n(len(c.groups), 'group')}, {n(c.total_units, 'unit')}, "
          f"{n(len(c.match_pairs), 'pair')}, {c.grid.width}x{c.grid.height} grid)")
    return 0


def cmd_render(args) -> int:
    bench = load_spec(args.spec)
    placement = read_placement(args.placement, bench.circuit)
    emit_svg(placement, bench.circuit, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="place", description="Grid placement optimisation for analog layouts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one algorithm with one seed")
    p.add_argument("--spec", required=True)
    p.add_argument("--algo", required=True, choices=ALGOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several algorithms over several seeds")
    p.add_argument("--spec", required=True)
    p.add_argument("--algos", type=parse_algos, default=parse_algos("qlearn,sa,symmetric-y,symmetric-xy"))
    p.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..5"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a spec file")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="draw a placement file as SVG")
    p.add_argument("--spec", required=True)
    p.add_argument("--placement", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2
    except (PlacementError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
