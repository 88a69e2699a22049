"""Two-level, multi-agent tabular Q-learning over grid placements.

One top-level agent moves whole groups; one bottom-level agent per group
moves that group's units. Agents act one at a time in a fixed rotation
``[top, group 0, group 1, ...]`` and only the acting agent's table is
updated, so moves never conflict.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

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
from qplace.errors import BudgetExhausted, NoLegalAction
from qplace.lde import EvalBudget, Evaluator, FomSpec, GradientField
from qplace.tracking import OptimizeResult, Tracker

ActionKey = Hashable


@dataclass(frozen=True)
class QLearnConfig:
    alpha: float = 0.5
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.98
    episodes: int = 500
    steps_per_episode: int = 60
    target_cost: float = 0.0
    seed: int = 0

    def problems(self, where: str = "qlearn") -> list[str]:
        out = []
        if not 0 < self.alpha <= 1:
            out.append(f"{where}.alpha: must be in (0, 1], got {self.alpha!r}")
        if not 0 <= self.gamma < 1:
            out.append(f"{where}.gamma: must be in [0, 1), got {self.gamma!r}")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                out.append(f"{where}.{name}: must be in [0, 1], got {v!r}")
        if self.epsilon_end > self.epsilon_start:
            out.append(f"{where}.epsilon_end: must not exceed epsilon_start")
        if not 0 < self.epsilon_decay <= 1:
            out.append(f"{where}.epsilon_decay: must be in (0, 1], got {self.epsilon_decay!r}")
        for name in ("episodes", "steps_per_episode"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                out.append(f"{where}.{name}: must be an integer >= 1, got {v!r}")
        return out

    def epsilon(self, episode: int) -> float:
        return max(self.epsilon_end, self.epsilon_start * self.epsilon_decay ** episode)


def _digest(tag: int, ints: Sequence[int]) -> int:
    # fixed-width little-endian packing keeps keys identical across platforms
    data = struct.pack(f"<B{len(ints)}q", tag, *ints)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def _group_origin(p: Placement, g: int) -> tuple[int, int]:
    cells = p.group_cells(g)
    return min(c[0] for c in cells), min(c[1] for c in cells)


def encode_state_top(p: Placement) -> int:
    """Hash of the ordered group anchors (bounding-box min corners)."""
    flat = []
    for g in p.group_indices:
        flat.extend(_group_origin(p, g))
    return _digest(1, flat)


def encode_state_group(p: Placement, g: int) -> int:
    """Translation-invariant hash of the group's device-labelled cell pattern."""
    ox, oy = _group_origin(p, g)
    pattern = sorted((u[1], p[u][0] - ox, p[u][1] - oy) for u in p.group_units(g))
    return _digest(2, [v for item in pattern for v in item])


def encode_state(p: Placement, agent: int) -> int:
    return encode_state_top(p) if agent == TOP_AGENT else encode_state_group(p, agent)


def action_key(p: Placement, m: MoveAction) -> ActionKey:
    """Top: (group, direction). Bottom: (device, relative cell, direction).

    Bottom keys use the same relative frame as the group state, so swapping
    two interchangeable units does not change what an action means.
    """
    return action_keys(p, [m])[0]


def action_keys(p: Placement, moves: Sequence[MoveAction]) -> list[ActionKey]:
    if not moves:
        return []
    if moves[0].level is Level.TOP:
        return [(m.mover, m.direction.index) for m in moves]
    ox, oy = _group_origin(p, moves[0].agent)
    out = []
    for m in moves:
        x, y = p[m.mover]
        out.append((m.mover[1], x - ox, y - oy, m.direction.index))
    return out


class QTable:
    """Sparse state -> {action-key: q} map; unseen entries read as 0."""

    def __init__(self):
        self.entries: dict[int, dict[ActionKey, float]] = {}

    def get(self, s: int, a: ActionKey) -> float:
        row = self.entries.get(s)
        return 0.0 if row is None else row.get(a, 0.0)

    def set(self, s: int, a: ActionKey, q: float) -> None:
        self.entries.setdefault(s, {})[a] = q

    @property
    def n_states(self) -> int:
        return len(self.entries)

    @property
    def n_entries(self) -> int:
        return sum(len(r) for r in self.entries.values())

    def snapshot(self) -> dict:
        return {s: dict(r) for s, r in self.entries.items()}


@dataclass
class AgentSet:
    top: QTable
    bottom: list[QTable]

    @classmethod
    def for_groups(cls, n_groups: int) -> "AgentSet":
        return cls(QTable(), [QTable() for _ in range(n_groups)])

    def table(self, agent: int) -> QTable:
        return self.top if agent == TOP_AGENT else self.bottom[agent]

    def tables(self) -> list[QTable]:
        return [self.top, *self.bottom]


@dataclass(frozen=True)
class StepRecord:
    s: int
    a: ActionKey
    reward: float
    s_next: int


def state_value(table: QTable, s: int, legal: Sequence[ActionKey]) -> float:
    """max over the currently legal actions; unseen actions count as 0."""
    if not legal:
        return 0.0
    row = table.entries.get(s)
    if row is None:
        return 0.0
    return max(row.get(a, 0.0) for a in legal)


def q_update(
    table: QTable,
    rec: StepRecord,
    cfg: QLearnConfig,
    next_legal: Sequence[ActionKey] = (),
    terminal: bool = False,
) -> float:
    v_next = 0.0 if terminal else state_value(table, rec.s_next, next_legal)
    old = table.get(rec.s, rec.a)
    new = (1.0 - cfg.alpha) * old + cfg.alpha * (rec.reward + cfg.gamma * v_next)
    table.set(rec.s, rec.a, new)
    return new


def _select_index(table: QTable, s: int, keys: Sequence[ActionKey], epsilon: float, rng: random.Random) -> int:
    if not keys:
        raise NoLegalAction("agent has no legal action")
    if rng.random() < epsilon:
        return rng.randrange(len(keys))
    row = table.entries.get(s)
    if row is None:
        return 0
    best_i, best_q = 0, row.get(keys[0], 0.0)
    for i in range(1, len(keys)):
        q = row.get(keys[i], 0.0)
        if q > best_q:
            best_i, best_q = i, q
    return best_i


def select_action(
    table: QTable,
    s: int,
    legal: Sequence[MoveAction],
    epsilon: float,
    rng: random.Random,
    keys: Sequence[ActionKey] | None = None,
) -> MoveAction:
    """epsilon-greedy; greedy ties go to the lowest index in ``legal``."""
    if not legal:
        raise NoLegalAction("agent has no legal action")
    if keys is None:
        keys = legal
    return legal[_select_index(table, s, keys, epsilon, rng)]


class PlacementEnv:
    """Initial placement, its cost, and the agent rotation for one instance."""

    def __init__(self, spec: CircuitSpec, track: Tracker, start: Placement | None = None):
        self.spec = spec
        self.track = track
        self.initial = start if start is not None else initial_placement(spec)
        self.initial_report = track(self.initial)
        self.initial_cost = self.initial_report.fom
        self.order = [TOP_AGENT, *range(len(spec.groups))]


def reward_for(cost_prev: float, cost_new: float, cost_initial: float, target_cost: float) -> float:
    scale = cost_initial if cost_initial > 0 else 1.0
    bonus = 1.0 if cost_new <= target_cost else 0.0
    return (cost_prev - cost_new) / scale + bonus


StepObserver = Callable[[int, StepRecord, Placement], None]


def run_episode(
    env: PlacementEnv,
    agents: AgentSet,
    cfg: QLearnConfig,
    epsilon: float,
    rng: random.Random,
    observer: Optional[StepObserver] = None,
) -> tuple[float, Placement, int]:
    """One trajectory from the initial placement.

    Returns (best cost, best placement, steps taken) within the episode.
    BudgetExhausted propagates; the tracker keeps the global best.
    """
    p, cost = env.initial, env.initial_cost
    best = (cost, p)
    steps = 0
    for t in range(cfg.steps_per_episode):
        agent = env.order[t % len(env.order)]
        level = Level.TOP if agent == TOP_AGENT else Level.BOTTOM
        steps += 1
        legal = legal_moves(p, level, agent)
        if not legal:
            continue
        table = agents.table(agent)
        s = encode_state(p, agent)
        keys = action_keys(p, legal)
        i = _select_index(table, s, keys, epsilon, rng)
        p_next = apply_move(p, legal[i], check=False)
        report = env.track(p_next)
        reached = report.fom <= cfg.target_cost
        reward = reward_for(cost, report.fom, env.initial_cost, cfg.target_cost)
        rec = StepRecord(s, keys[i], reward, encode_state(p_next, agent))
        next_keys = () if reached else action_keys(p_next, legal_moves(p_next, level, agent))
        q_update(table, rec, cfg, next_keys, terminal=reached)
        if observer is not None:
            observer(agent, rec, p_next)
        p, cost = p_next, report.fom
        if cost < best[0]:
            best = (cost, p)
        if reached:
            break
    return best[0], best[1], steps


def optimize(
    spec: CircuitSpec,
    field: GradientField,
    fom: FomSpec,
    cfg: QLearnConfig,
    budget: EvalBudget,
    observer: Optional[StepObserver] = None,
    evaluator: Evaluator | None = None,
) -> OptimizeResult:
    """Episodes from the initial placement with per-episode epsilon decay.

    Stops on episode count, budget exhaustion or reaching ``cfg.target_cost``.
    The initial evaluation consumes one budget unit, so ``budget.limit >= 1``.
    """
    if budget.limit < 1:
        raise ValueError("budget limit must be >= 1 (the initial placement is always evaluated)")
    evaluator = evaluator or Evaluator(field, fom, spec, budget)
    track = Tracker(evaluator, cfg.target_cost)
    env = PlacementEnv(spec, track)
    agents = AgentSet.for_groups(len(spec.groups))
    rng = random.Random(cfg.seed)
    episodes = steps = 0
    if not track.reached:
        for k in range(cfg.episodes):
            episodes += 1
            try:
                _, _, n = run_episode(env, agents, cfg, cfg.epsilon(k), rng, observer)
                steps += n
            except BudgetExhausted:
                break
            if track.reached or budget.exhausted:
                break
    return track.result(episodes, agents=agents, steps=steps)
