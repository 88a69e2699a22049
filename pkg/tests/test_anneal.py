import math
import random
from collections import Counter
from dataclasses import replace

import pytest

from qplace.anneal import SAConfig, accept, propose, run_sa
from qplace.baselines import exhaustive_oracle
from qplace.core import CircuitSpec, GridSpec, GroupSpec, PairSpec, Placement, initial_placement
from qplace.errors import Stuck
from qplace.harness import bundled_spec, load_spec
from qplace.lde import EvalBudget, Evaluator, FomSpec, GradientField

SPEC = CircuitSpec(
    (GroupSpec("a", (("A", 2), ("B", 2))), GroupSpec("b", (("C", 1), ("D", 1)))),
    (PairSpec("A", "B"), PairSpec("C", "D")),
    GridSpec(7, 6),
)
FIELD = GradientField.from_coeffs(c10=0.02, c20=0.03, c11=0.01)
FOM = FomSpec({"offset": 1.0, "area": 0.1}, {"offset": 0.01, "area": 4.0})
CFG = SAConfig(cooling=0.9, moves_per_temp=20, seed=5)


def test_propose_lone_unit_uniform():
    p = Placement(GridSpec(9, 9), {(0, 0, 0): (4, 4)})
    rng = random.Random(2)
    n = 10_000
    counts = Counter((m.level, m.direction) for m in (propose(p, rng) for _ in range(n)))
    # top and bottom agents each have 8 moves; either pick is 1/16
    assert len(counts) == 16
    mean, sd = n / 16, math.sqrt(n * (1 / 16) * (15 / 16))
    assert all(abs(c - mean) <= 3 * sd for c in counts.values())


def test_propose_stuck_when_frozen():
    # one group filling a 1x2 grid, no free cell anywhere
    p = Placement(GridSpec(2, 1), {(0, 0, 0): (0, 0), (0, 0, 1): (1, 0)})
    with pytest.raises(Stuck):
        propose(p, random.Random(0))


def test_propose_needs_groups():
    with pytest.raises(ValueError):
        propose(Placement(GridSpec(3, 3), {}), random.Random(0))


def test_propose_falls_back_to_movable_agent():
    # group 0 is boxed in; only the top agent (moving group 1) and group 1 can move
    p = Placement(GridSpec(4, 1), {(0, 0, 0): (0, 0), (0, 0, 1): (1, 0), (1, 0, 0): (2, 0)})
    rng = random.Random(0)
    for _ in range(200):
        m = propose(p, rng, max_retries=0)
        assert m.mover != (0, 0, 0) and m.mover != (0, 0, 1)


def test_accept_examples():
    rng = random.Random(0)
    assert accept(-0.5, 1e-9, rng) and accept(-0.5, 100.0, rng)
    assert accept(0.0, 0.1, rng)
    with pytest.raises(ValueError):
        accept(1.0, 0.0, rng)


def test_accept_metropolis_rate():
    rng = random.Random(123)
    n = 100_000
    rate = sum(accept(1.0, 1.0, rng) for _ in range(n)) / n
    assert abs(rate - math.exp(-1)) <= 0.01


def test_config_problems():
    assert SAConfig().problems() == []
    assert SAConfig(t_init=1e-5, t_min=1e-4).problems()
    assert SAConfig(cooling=1.0).problems()
    assert SAConfig(moves_per_temp=0).problems()
    assert SAConfig(t_init=-1.0).problems()


def run(cfg=CFG, limit=3000, **kw):
    budget = EvalBudget(limit)
    ev = Evaluator(FIELD, FOM, SPEC, budget)
    return run_sa(SPEC, FIELD, FOM, cfg, budget, evaluator=ev, **kw), budget, ev


def test_budget_one_returns_initial():
    r, budget, _ = run(limit=1)
    assert r.evals_used == 1 == budget.used
    assert r.best_placement == initial_placement(SPEC)
    with pytest.raises(ValueError):
        run(limit=0)


def test_budget_caps_and_matches_evaluator():
    for limit in (2, 21, 500):
        r, budget, ev = run(limit=limit)
        assert r.evals_used == ev.calls == budget.used <= limit


def test_deterministic():
    a, *_ = run()
    b, *_ = run()
    assert a == b
    c, *_ = run(replace(CFG, seed=6))
    assert c.cost_history != a.cost_history


def test_stops_at_t_min():
    r, budget, _ = run(SAConfig(t_init=1.0, cooling=0.5, moves_per_temp=3, t_min=0.1), limit=10_000)
    # T = 1, .5, .25, .125 then below t_min
    assert r.episodes_run == 4
    assert r.evals_used == 1 + 4 * 3


def test_auto_temperature_samples_twenty():
    r, *_ = run(SAConfig(cooling=0.5, moves_per_temp=1, t_min=1e9), limit=10_000)
    # auto T is far below t_min, so only the initial and the 20 samples are spent
    assert r.evals_used == 21 and r.episodes_run == 0


def test_history_monotone_and_improves():
    r, *_ = run()
    costs = [c for _, c in r.cost_history]
    assert costs == sorted(costs, reverse=True)
    assert r.best_cost < costs[0]
    assert r.best_placement.is_valid()


def test_target_stops_run():
    r0, *_ = run()
    target = r0.cost_history[0][1] * 0.95
    r, *_ = run(replace(CFG), target_cost=target)
    assert r.reached_target and r.evals_used == r.evals_to_target


@pytest.fixture(scope="module")
def tiny():
    bench = load_spec(bundled_spec("tiny"))
    return bench, exhaustive_oracle(bench.circuit, bench.field, bench.fom).best_cost


@pytest.mark.slow
def test_reaches_oracle_on_tiny_with_ten_times_budget(tiny):
    bench, opt = tiny
    hits = 0
    for seed in range(10):
        r = run_sa(bench.circuit, bench.field, bench.fom, replace(bench.sa, seed=seed),
                   EvalBudget(10 * bench.budget_limit))
        hits += abs(r.best_cost - opt) <= 1e-9
    assert hits >= 8


@pytest.mark.slow
def test_slow_cooling_converges_on_tiny(tiny):
    bench, opt = tiny
    r = run_sa(bench.circuit, bench.field, bench.fom, replace(bench.sa, cooling=0.999, seed=0),
               EvalBudget(200_000))
    assert r.best_cost == pytest.approx(opt, abs=1e-9)
