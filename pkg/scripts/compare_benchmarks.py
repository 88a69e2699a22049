"""Run every algorithm on the bundled benchmarks and print a comparison table.

    python3 scripts/compare_benchmarks.py --seeds 1..5 --out runs/

Writes results.csv, summary.csv and one SVG per run under <out>/<spec>/.
"""

import argparse
from pathlib import Path

from qplace.cli import write_run_outputs, parse_seeds
from qplace.harness import bundled_spec, emit_csv, emit_summary_csv, load_spec, run_compare

BENCHMARKS = ("cm_like", "comp_like", "ota_like")
ALGOS = ("qlearn", "sa", "symmetric-y", "symmetric-xy")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..5"))
    ap.add_argument("--specs", nargs="+", default=list(BENCHMARKS))
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()

    print(f"{'spec':10s} {'algo':13s} {'runs':>4s} {'best_cost':>10s} {'offset':>10s} {'evals->target':>13s}")
    for name in args.specs:
        bench = load_spec(bundled_spec(name))
        out = Path(args.out) / name
        out.mkdir(parents=True, exist_ok=True)
        res = run_compare(bench, ALGOS, args.seeds)
        emit_csv(res.reports, out / "results.csv")
        emit_summary_csv(res.summaries, out / "summary.csv")
        for r in res.reports:
            write_run_outputs(r, bench, out)
        for s in res.summaries:
            ett = "DNF" if s.median_evals_to_target is None else f"{s.median_evals_to_target:g}"
            print(f"{name:10s} {s.algo:13s} {s.runs:4d} {s.median_best_cost:10.4g} "
                  f"{s.median_offset:10.3g} {ett:>13s}")
        print(f"{'':10s} target_cost={bench.target_cost:g} budget={bench.budget_limit}")


if __name__ == "__main__":
    main()
