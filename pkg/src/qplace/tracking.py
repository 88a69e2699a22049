"""Best-so-far bookkeeping shared by the optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from qplace.core import Placement
from qplace.errors import BudgetExhausted
from qplace.lde import EvalReport, Evaluator


@dataclass
class OptimizeResult:
    best_placement: Placement
    best_cost: float
    evals_used: int
    episodes_run: int
    cost_history: list[tuple[int, float]]
    best_report: EvalReport
    evals_to_target: Optional[int] = None
    # learner internals, excluded from equality so determinism checks compare outcomes
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def reached_target(self) -> bool:
        return self.evals_to_target is not None


class Tracker:
    """Wraps an evaluator and records the best placement across every call."""

    def __init__(self, evaluator: Evaluator, target_cost: float | None = None):
        self.evaluator = evaluator
        self.target_cost = target_cost
        self.best_cost = float("inf")
        self.best_placement: Placement | None = None
        self.best_report: EvalReport | None = None
        self.history: list[tuple[int, float]] = []
        self.evals_to_target: int | None = None

    def __call__(self, p: Placement) -> EvalReport:
        # stop before touching the evaluator, so refused calls never reach it
        if self.evaluator.budget.exhausted:
            raise BudgetExhausted(f"evaluation budget of {self.evaluator.budget.limit} used up")
        report = self.evaluator(p)
        if report.fom < self.best_cost:
            self.best_cost = report.fom
            self.best_placement = p
            self.best_report = report
            self.history.append((report.eval_index, report.fom))
        if (
            self.evals_to_target is None
            and self.target_cost is not None
            and report.fom <= self.target_cost
        ):
            self.evals_to_target = report.eval_index
        return report

    @property
    def reached(self) -> bool:
        return self.evals_to_target is not None

    def result(self, episodes_run: int, **extras) -> OptimizeResult:
        return OptimizeResult(
            best_placement=self.best_placement,
            best_cost=self.best_cost,
            evals_used=self.evaluator.budget.used,
            episodes_run=episodes_run,
            cost_history=list(self.history),
            best_report=self.best_report,
            evals_to_target=self.evals_to_target,
            extras=extras,
        )
