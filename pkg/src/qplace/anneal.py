"""Simulated-annealing baseline on the same move set and evaluator."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

from qplace.core import (
    TOP_AGENT,
    CircuitSpec,
    Level,
    MoveAction,
    Placement,
    apply_move,
    initial_placement,
    legal_moves,
)
from qplace.errors import BudgetExhausted, Stuck
from qplace.lde import EvalBudget, Evaluator, FomSpec, GradientField
from qplace.tracking import OptimizeResult, Tracker

AUTO = None
AUTO_SAMPLES = 20


@dataclass(frozen=True)
class SAConfig:
    t_init: Optional[float] = AUTO
    cooling: float = 0.95
    moves_per_temp: int = 50
    t_min: float = 1e-4
    seed: int = 0

    def problems(self, where: str = "sa") -> list[str]:
        out = []
        if self.t_init is not None:
            if not self.t_init > 0:
                out.append(f"{where}.t_init: must be > 0 or \"auto\", got {self.t_init!r}")
            elif not self.t_min < self.t_init:
                out.append(f"{where}.t_min: must be below t_init")
        if not 0 < self.cooling < 1:
            out.append(f"{where}.cooling: must be in (0, 1), got {self.cooling!r}")
        if not isinstance(self.moves_per_temp, int) or self.moves_per_temp < 1:
            out.append(f"{where}.moves_per_temp: must be an integer >= 1, got {self.moves_per_temp!r}")
        if not self.t_min > 0:
            out.append(f"{where}.t_min: must be > 0, got {self.t_min!r}")
        return out


def _agent_moves(p: Placement, agent: int) -> list[MoveAction]:
    level = Level.TOP if agent == TOP_AGENT else Level.BOTTOM
    return legal_moves(p, level, agent)


def propose(p: Placement, rng: random.Random, max_retries: int | None = None) -> MoveAction:
    """Uniform agent among [top, groups...], then a uniform legal move of it.

    After a bounded number of misses, falls back to a uniform choice among
    the agents that do have a move.
    """
    n_groups = len(p.group_indices)
    if n_groups == 0:
        raise ValueError("placement has no groups")
    agents = [TOP_AGENT, *p.group_indices]
    if max_retries is None:
        max_retries = 2 * len(agents)
    for _ in range(max_retries):
        moves = _agent_moves(p, agents[rng.randrange(len(agents))])
        if moves:
            return moves[rng.randrange(len(moves))]
    movable = [ms for ms in (_agent_moves(p, a) for a in agents) if ms]
    if not movable:
        raise Stuck("no agent has a legal move")
    moves = movable[rng.randrange(len(movable))]
    return moves[rng.randrange(len(moves))]


def accept(delta_cost: float, T: float, rng: random.Random) -> bool:
    """Metropolis criterion."""
    if T <= 0:
        raise ValueError(f"temperature must be > 0, got {T}")
    if delta_cost <= 0:
        return True
    return rng.random() < math.exp(-delta_cost / T)


def run_sa(
    spec: CircuitSpec,
    field: GradientField,
    fom: FomSpec,
    cfg: SAConfig,
    budget: EvalBudget,
    target_cost: float | None = None,
    evaluator: Evaluator | None = None,
) -> OptimizeResult:
    """Anneal from the initial placement until budget, ``t_min`` or target."""
    if budget.limit < 1:
        raise ValueError("budget limit must be >= 1 (the initial placement is always evaluated)")
    evaluator = evaluator or Evaluator(field, fom, spec, budget)
    track = Tracker(evaluator, target_cost)
    rng = random.Random(cfg.seed)
    cur = initial_placement(spec)
    cur_cost = track(cur).fom
    temps = 0
    T = None
    try:
        if cfg.t_init is None:
            deltas = []
            for _ in range(AUTO_SAMPLES):
                if track.reached:
                    break
                cand = apply_move(cur, propose(cur, rng), check=False)
                deltas.append(abs(track(cand).fom - cur_cost))
            T = math.fsum(deltas) / len(deltas) if deltas else 0.0
            if not T > 0:
                T = max(abs(cur_cost), 1.0) * 1e-3
        else:
            T = cfg.t_init
        while T >= cfg.t_min and not track.reached:
            temps += 1
            for _ in range(cfg.moves_per_temp):
                cand = apply_move(cur, propose(cur, rng), check=False)
                cost = track(cand).fom
                if accept(cost - cur_cost, T, rng):
                    cur, cur_cost = cand, cost
                if track.reached:
                    break
            T *= cfg.cooling
    except (BudgetExhausted, Stuck):
        pass
    return track.result(temps, final_temperature=T)
