"""Best-so-far cost against evaluations for Q-learning and SA on one spec.

    python3 scripts/convergence.py ota_like --seeds 1..5 --out ota_curve.csv

The CSV has one row per (algo, seed, evaluation) improvement, plus a final
row at the last evaluation so curves can be drawn as step functions.
The target stop is disabled so both methods use the whole budget.
"""

import argparse
import csv
from dataclasses import replace

from qplace.anneal import run_sa
from qplace.cli import parse_seeds
from qplace.harness import bundled_spec, load_spec
from qplace.lde import EvalBudget
from qplace.qlearn import optimize


def curves(bench, seeds):
    for seed in seeds:
        q = optimize(bench.circuit, bench.field, bench.fom,
                     replace(bench.qlearn, seed=seed, target_cost=float("-inf")), EvalBudget(bench.budget_limit))
        s = run_sa(bench.circuit, bench.field, bench.fom, replace(bench.sa, seed=seed), EvalBudget(bench.budget_limit))
        for algo, res in (("qlearn", q), ("sa", s)):
            for i, c in res.cost_history:
                yield algo, seed, i, c
            yield algo, seed, res.evals_used, res.best_cost


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec", help="bundled spec name or path to a .spec file")
    ap.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..5"))
    ap.add_argument("--out", default="convergence.csv")
    args = ap.parse_args()
    path = bundled_spec(args.spec) if "/" not in args.spec and not args.spec.endswith(".spec") else args.spec
    bench = load_spec(path)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algo", "seed", "eval", "best_cost"])
        for row in curves(bench, args.seeds):
            w.writerow([row[0], row[1], row[2], f"{row[3]:.9g}"])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
