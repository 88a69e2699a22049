"""Synthetic layout-dependent-effect model and placement evaluator.

The spatial variation is a quadratic polynomial plus Gaussian bumps. A
device's parameter deviation is the mean field value over its unit-cell
centres; mismatch is the absolute difference between the two devices of a
matched pair. Linear gradients cancel for common-centroid pairs, curvature
and bumps in general do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Mapping

from qplace.core import CircuitSpec, PairSpec, Placement, bounding_area, wirelength
from qplace.errors import BudgetExhausted

METRICS = ("mismatch", "offset", "area", "wirelength")


@dataclass(frozen=True)
class Bump:
    x0: float
    y0: float
    amp: float
    sigma: float


@dataclass(frozen=True)
class GradientField:
    # c00, c10, c01, c20, c02, c11
    poly: tuple[float, float, float, float, float, float] = (0.0,) * 6
    bumps: tuple[Bump, ...] = ()

    def __post_init__(self):
        if len(self.poly) != 6:
            raise ValueError(f"poly needs 6 coefficients, got {len(self.poly)}")

    @classmethod
    def from_coeffs(cls, c00=0.0, c10=0.0, c01=0.0, c20=0.0, c02=0.0, c11=0.0, bumps=()):
        return cls((c00, c10, c01, c20, c02, c11), tuple(bumps))

    def problems(self) -> list[str]:
        out = []
        for i, b in enumerate(self.bumps):
            if not b.sigma > 0:
                out.append(f"field.bumps[{i}]: sigma must be > 0, got {b.sigma!r}")
        for i, c in enumerate(self.poly):
            if not math.isfinite(c):
                out.append(f"field.poly[{i}]: coefficient is not finite")
        return out

    @property
    def is_linear(self) -> bool:
        return not self.bumps and self.poly[3] == self.poly[4] == self.poly[5] == 0.0


def field_value(f: GradientField, x: float, y: float) -> float:
    c00, c10, c01, c20, c02, c11 = f.poly
    v = c00 + c10 * x + c01 * y + c20 * x * x + c02 * y * y + c11 * x * y
    for b in f.bumps:
        r2 = (x - b.x0) ** 2 + (y - b.y0) ** 2
        v += b.amp * math.exp(-r2 / (2.0 * b.sigma * b.sigma))
    return v


def _mean_over(values) -> float:
    return math.fsum(values) / len(values)


def device_param(f: GradientField, p: Placement, device: tuple[int, int]) -> float:
    """Mean field value over the unit centres of ``device`` = (group, device)."""
    cells = p.device_cells(*device)
    if not cells:
        raise KeyError(f"device {device} has no units in placement")
    return _mean_over([field_value(f, x + 0.5, y + 0.5) for x, y in cells])


def pair_mismatch(f: GradientField, p: Placement, pair: PairSpec, spec: CircuitSpec) -> float:
    idx = spec.device_index
    return abs(device_param(f, p, idx[pair.device_a]) - device_param(f, p, idx[pair.device_b]))


@dataclass(frozen=True)
class FomSpec:
    weights: Mapping[str, float]
    references: Mapping[str, float]

    def problems(self) -> list[str]:
        out = []
        for k, w in self.weights.items():
            if k not in METRICS:
                out.append(f"fom.weights: unknown metric {k!r}")
            elif not w >= 0:
                out.append(f"fom.weights.{k}: must be >= 0, got {w!r}")
        if not any(w > 0 for w in self.weights.values()):
            out.append("fom.weights: at least one weight must be > 0")
        for k, w in self.weights.items():
            if w > 0:
                ref = self.references.get(k)
                if ref is None or not ref > 0:
                    out.append(f"fom.references.{k}: must be a positive normalizer, got {ref!r}")
        return out

    def combine(self, metrics: Mapping[str, float]) -> float:
        return math.fsum(
            w * metrics[k] / self.references[k] for k, w in self.weights.items() if w > 0
        )


@dataclass
class EvalBudget:
    limit: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.limit - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit


@dataclass(frozen=True)
class EvalReport:
    pair_mismatch: tuple[float, ...]
    offset: float
    area: int
    wirelength: float
    fom: float
    eval_index: int

    @property
    def mismatch(self) -> float:
        return max(self.pair_mismatch, default=0.0)


def _metrics(f: GradientField, spec: CircuitSpec, p: Placement, cell_value) -> tuple:
    idx = spec.device_index
    sums: dict[tuple[int, int], list[float]] = {}
    for (g, d, _), cell in p.items():
        sums.setdefault((g, d), []).append(cell_value(cell))
    params = {k: _mean_over(v) for k, v in sums.items()}
    mism = tuple(abs(params[idx[pr.device_a]] - params[idx[pr.device_b]]) for pr in spec.match_pairs)
    offset = math.fsum(pr.sensitivity * m for pr, m in zip(spec.match_pairs, mism))
    return mism, offset, bounding_area(p), wirelength(p, spec)


def _report(fom: FomSpec, metrics, index: int) -> EvalReport:
    mism, offset, area, wl = metrics
    fom_value = fom.combine(
        {"mismatch": max(mism, default=0.0), "offset": offset, "area": area, "wirelength": wl}
    )
    return EvalReport(mism, offset, area, wl, fom_value, index)


def evaluate(f: GradientField, fom: FomSpec, spec: CircuitSpec, p: Placement, budget: EvalBudget) -> EvalReport:
    """One simulated evaluation; consumes exactly one budget unit."""
    if budget.used >= budget.limit:
        raise BudgetExhausted(f"evaluation budget of {budget.limit} exhausted")
    metrics = _metrics(f, spec, p, lambda c: field_value(f, c[0] + 0.5, c[1] + 0.5))
    budget.used += 1
    return _report(fom, metrics, budget.used)


@dataclass
class Evaluator:
    """Evaluator bound to one instance and one budget.

    Field values are cached per cell; results are identical to ``evaluate``.
    ``calls`` is an independent counter used to cross-check budget accounting.
    """

    field: GradientField
    fom: FomSpec
    spec: CircuitSpec
    budget: EvalBudget
    calls: int = 0
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def _cell_value(self, cell) -> float:
        v = self._cache.get(cell)
        if v is None:
            v = self._cache[cell] = field_value(self.field, cell[0] + 0.5, cell[1] + 0.5)
        return v

    def __call__(self, p: Placement) -> EvalReport:
        if self.budget.used >= self.budget.limit:
            raise BudgetExhausted(f"evaluation budget of {self.budget.limit} exhausted")
        metrics = _metrics(self.field, self.spec, p, self._cell_value)
        self.budget.used += 1
        self.calls += 1
        return _report(self.fom, metrics, self.budget.used)
