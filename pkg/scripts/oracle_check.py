"""How often each optimizer hits the exact optimum of the tiny instance.

    python3 scripts/oracle_check.py --seeds 0..9 [--sa-budget-factor 10]
"""

import argparse
from dataclasses import replace

from qplace.anneal import run_sa
from qplace.baselines import exhaustive_oracle
from qplace.cli import parse_seeds
from qplace.harness import bundled_spec, load_spec
from qplace.lde import EvalBudget
from qplace.qlearn import optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=parse_seeds, default=parse_seeds("0..9"))
    ap.add_argument("--sa-budget-factor", type=int, default=1)
    args = ap.parse_args()
    bench = load_spec(bundled_spec("tiny"))
    oracle = exhaustive_oracle(bench.circuit, bench.field, bench.fom)
    print(f"oracle optimum {oracle.best_cost:.9g} over {oracle.states} placements")
    for seed in args.seeds:
        q = optimize(bench.circuit, bench.field, bench.fom, replace(bench.qlearn, seed=seed),
                     EvalBudget(bench.budget_limit))
        s = run_sa(bench.circuit, bench.field, bench.fom, replace(bench.sa, seed=seed),
                   EvalBudget(args.sa_budget_factor * bench.budget_limit))
        print(f"seed {seed}: qlearn {q.best_cost:.9g} ({q.evals_used} evals)  sa {s.best_cost:.9g} ({s.evals_used} evals)")


if __name__ == "__main__":
    main()
