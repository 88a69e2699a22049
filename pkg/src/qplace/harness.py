"""Benchmark spec files, experiment orchestration and CSV/SVG reporting."""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from qplace.anneal import SAConfig, run_sa
from qplace.baselines import SymmetryStyle, exhaustive_oracle, place_symmetric
from qplace.core import CircuitSpec, GridSpec, GroupSpec, PairSpec, Placement
from qplace.errors import ParseError, ValidationError
from qplace.lde import Bump, EvalBudget, EvalReport, Evaluator, FomSpec, GradientField
from qplace.qlearn import QLearnConfig, optimize

log = logging.getLogger("qplace")

ALGOS = ("qlearn", "sa", "symmetric-y", "symmetric-xy", "oracle")
DETERMINISTIC = ("symmetric-y", "symmetric-xy", "oracle")
POLY_NAMES = ("c00", "c10", "c01", "c20", "c02", "c11")
CSV_HEADER = (
    "algo", "seed", "best_cost", "offset", "max_pair_mismatch",
    "area", "wirelength", "fom", "evals", "wall_ms",
)
SPEC_DIR = Path(__file__).parent / "specs"


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    circuit: CircuitSpec
    field: GradientField
    fom: FomSpec
    target_cost: float
    budget_limit: int
    qlearn: QLearnConfig
    sa: SAConfig
    oracle_max_states: int = 10**6


def bundled_spec(name: str) -> Path:
    path = SPEC_DIR / (name if name.endswith(".spec") else f"{name}.spec")
    if not path.exists():
        raise FileNotFoundError(path)
    return path


# ---------------------------------------------------------------- loading


class _Checker:
    def __init__(self):
        self.problems: list[str] = []

    def get(self, obj: Any, key: str, where: str, kind, default=..., check=None):
        if not isinstance(obj, dict) or key not in obj:
            if default is ...:
                self.problems.append(f"{where}.{key}: missing")
                return None
            return default
        value = obj[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            self.problems.append(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {value!r}")
            return None
        if check is not None:
            msg = check(value)
            if msg:
                self.problems.append(f"{where}.{key}: {msg}")
        return value


def _parse_spec(data: Any) -> BenchmarkSpec:
    ck = _Checker()
    if not isinstance(data, dict):
        raise ValidationError(["top level: expected a JSON object"])
    known = {"name", "grid", "groups", "match_pairs", "field", "fom", "target_cost",
             "budget", "qlearn", "sa", "oracle_max_states"}
    for key in data:
        if key not in known:
            ck.problems.append(f"{key}: unknown top-level key")
    name = ck.get(data, "name", "spec", str, default="unnamed")

    grid_d = ck.get(data, "grid", "spec", dict) or {}
    width = ck.get(grid_d, "width", "grid", int, check=lambda v: None if v >= 1 else "must be >= 1")
    height = ck.get(grid_d, "height", "grid", int, check=lambda v: None if v >= 1 else "must be >= 1")

    groups = []
    for gi, g in enumerate(ck.get(data, "groups", "spec", list) or []):
        where = f"groups[{gi}]"
        gname = ck.get(g, "name", where, str, default=f"g{gi}")
        devices = []
        for di, d in enumerate(ck.get(g, "devices", where, list) or []):
            dwhere = f"{where}.devices[{di}]"
            dname = ck.get(d, "name", dwhere, str)
            units = ck.get(d, "unit_count", dwhere, int)
            if dname is not None and units is not None:
                devices.append((dname, units))
        groups.append(GroupSpec(gname, tuple(devices)))

    pairs = []
    for pi, pr in enumerate(ck.get(data, "match_pairs", "spec", list, default=[]) or []):
        where = f"match_pairs[{pi}]"
        a = ck.get(pr, "device_a", where, str)
        b = ck.get(pr, "device_b", where, str)
        sens = ck.get(pr, "sensitivity", where, float, default=1.0)
        if a is not None and b is not None and sens is not None:
            pairs.append(PairSpec(a, b, sens))

    field_d = ck.get(data, "field", "spec", dict, default={}) or {}
    poly_d = ck.get(field_d, "poly", "field", dict, default={}) or {}
    for key in poly_d:
        if key not in POLY_NAMES:
            ck.problems.append(f"field.poly.{key}: unknown coefficient (use {', '.join(POLY_NAMES)})")
    poly = tuple(ck.get(poly_d, c, "field.poly", float, default=0.0) or 0.0 for c in POLY_NAMES)
    bumps = []
    for bi, b in enumerate(ck.get(field_d, "bumps", "field", list, default=[]) or []):
        where = f"field.bumps[{bi}]"
        vals = [ck.get(b, k, where, float) for k in ("x0", "y0", "amp", "sigma")]
        if all(v is not None for v in vals):
            bumps.append(Bump(*vals))
    field = GradientField(poly, tuple(bumps))

    fom_d = ck.get(data, "fom", "spec", dict) or {}
    weights = ck.get(fom_d, "weights", "fom", dict, default={}) or {}
    refs = ck.get(fom_d, "references", "fom", dict, default={}) or {}
    fom = FomSpec(
        {k: float(v) for k, v in weights.items() if isinstance(v, (int, float))},
        {k: float(v) for k, v in refs.items() if isinstance(v, (int, float))},
    )

    target = ck.get(data, "target_cost", "spec", float)
    budget = ck.get(data, "budget", "spec", int, check=lambda v: None if v >= 1 else "must be >= 1")
    max_states = ck.get(data, "oracle_max_states", "spec", int, default=10**6)

    ql_d = ck.get(data, "qlearn", "spec", dict, default={}) or {}
    ql_fields = set(QLearnConfig.__dataclass_fields__) - {"target_cost", "seed"}
    for key in ql_d:
        if key not in ql_fields:
            ck.problems.append(f"qlearn.{key}: unknown parameter")
    qlearn = QLearnConfig(**{k: v for k, v in ql_d.items() if k in ql_fields})
    qlearn = replace(qlearn, target_cost=target if target is not None else 0.0)

    sa_d = dict(ck.get(data, "sa", "spec", dict, default={}) or {})
    sa_fields = set(SAConfig.__dataclass_fields__) - {"seed"}
    for key in sa_d:
        if key not in sa_fields:
            ck.problems.append(f"sa.{key}: unknown parameter")
    if sa_d.get("t_init") == "auto":
        sa_d["t_init"] = None
    sa = SAConfig(**{k: v for k, v in sa_d.items() if k in sa_fields})

    problems = list(ck.problems)
    circuit = CircuitSpec(tuple(groups), tuple(pairs), GridSpec(width or 0, height or 0))
    if width is not None and height is not None:
        problems += circuit.problems()
        if circuit.total_units > width * height:
            problems.append(f"grid: {circuit.total_units} units do not fit on {width}x{height}")
    problems += field.problems()
    problems += fom.problems()
    problems += qlearn.problems()
    problems += sa.problems()
    if problems:
        raise ValidationError(problems)
    return BenchmarkSpec(name, circuit, field, fom, target, budget, qlearn, sa, max_states)


def load_spec(path) -> BenchmarkSpec:
    """Parse and fully validate a benchmark spec file (JSON syntax)."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return _parse_spec(data)
    except ValidationError as exc:
        raise ValidationError([f"{path.name}: {p}" for p in exc.problems]) from None


# ---------------------------------------------------------------- running


@dataclass
class RunReport:
    algo: str
    seed: int
    report: EvalReport
    best_cost: float
    evals_used: int
    wall_ms: float
    placement: Placement
    evals_to_target: Optional[int] = None
    evaluator_calls: int = 0


@dataclass(frozen=True)
class Summary:
    algo: str
    runs: int
    median_best_cost: float
    median_offset: float
    median_evals_to_target: Optional[float]  # None means DNF


@dataclass
class CompareResult:
    reports: list[RunReport]
    summaries: list[Summary]


def run_one(bench: BenchmarkSpec, algo: str, seed: int) -> RunReport:
    if algo not in ALGOS:
        raise ValueError(f"unknown algo {algo!r}; choose from {', '.join(ALGOS)}")
    spec, field, fom = bench.circuit, bench.field, bench.fom
    budget = EvalBudget(bench.budget_limit)
    evaluator = Evaluator(field, fom, spec, budget)
    t0 = time.perf_counter()
    evals_to_target = None
    if algo == "qlearn":
        res = optimize(spec, field, fom, replace(bench.qlearn, seed=seed), budget, evaluator=evaluator)
        placement, report, evals, evals_to_target = res.best_placement, res.best_report, res.evals_used, res.evals_to_target
    elif algo == "sa":
        res = run_sa(spec, field, fom, replace(bench.sa, seed=seed), budget, bench.target_cost, evaluator=evaluator)
        placement, report, evals, evals_to_target = res.best_placement, res.best_report, res.evals_used, res.evals_to_target
    elif algo == "oracle":
        res = exhaustive_oracle(spec, field, fom, bench.oracle_max_states)
        placement, report, evals = res.best_placement, res.best_report, res.states
        if report.fom <= bench.target_cost:
            evals_to_target = report.eval_index
    else:
        style = SymmetryStyle.Y_AXIS if algo == "symmetric-y" else SymmetryStyle.XY_COMMON_CENTROID
        placement = place_symmetric(spec, style)
        report = evaluator(placement)
        evals = budget.used
        if report.fom <= bench.target_cost:
            evals_to_target = 1
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if algo != "oracle" and evaluator.calls != budget.used:
        raise AssertionError(f"{algo}: budget says {budget.used} evaluations, evaluator counted {evaluator.calls}")
    log.info("%s seed=%d best=%.6g evals=%d (%.0f ms)", algo, seed, report.fom, evals, wall_ms)
    calls = evals if algo == "oracle" else evaluator.calls
    return RunReport(algo, seed, report, report.fom, evals, wall_ms, placement, evals_to_target, calls)


def _median_or_dnf(values: Sequence[Optional[int]]) -> Optional[float]:
    m = statistics.median([math.inf if v is None else v for v in values])
    return None if math.isinf(m) else float(m)


def summarize(reports: Sequence[RunReport]) -> list[Summary]:
    out = []
    for algo in sorted({r.algo for r in reports}):
        rs = [r for r in reports if r.algo == algo]
        out.append(Summary(
            algo,
            len(rs),
            statistics.median(r.best_cost for r in rs),
            statistics.median(r.report.offset for r in rs),
            _median_or_dnf([r.evals_to_target for r in rs]),
        ))
    return out


def run_compare(bench: BenchmarkSpec, algos: Sequence[str], seeds: Sequence[int]) -> CompareResult:
    """Every (algo, seed) cell with its own budget; deterministic algos run once."""
    reports = []
    for algo in algos:
        cell_seeds = seeds[:1] if algo in DETERMINISTIC else seeds
        for seed in cell_seeds:
            reports.append(run_one(bench, algo, seed))
    reports.sort(key=lambda r: (r.algo, r.seed))
    return CompareResult(reports, summarize(reports))


# ---------------------------------------------------------------- output


def _g9(v: float) -> str:
    return f"{v:.9g}"


def csv_row(r: RunReport) -> list[str]:
    return [
        r.algo, str(r.seed), _g9(r.best_cost), _g9(r.report.offset), _g9(r.report.mismatch),
        str(r.report.area), _g9(r.report.wirelength), _g9(r.report.fom), str(r.evals_used),
        f"{r.wall_ms:.3f}",
    ]


def emit_csv(reports: Sequence[RunReport], path) -> None:
    rows = sorted(reports, key=lambda r: (r.algo, r.seed))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(csv_row(r))


def emit_summary_csv(summaries: Sequence[Summary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("algo", "runs", "median_best_cost", "median_offset", "median_evals_to_target"))
        for s in summaries:
            ett = "DNF" if s.median_evals_to_target is None else _g9(s.median_evals_to_target)
            w.writerow((s.algo, s.runs, _g9(s.median_best_cost), _g9(s.median_offset), ett))


PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)
CELL_PX = 24


def emit_svg(placement: Placement, spec: CircuitSpec, path) -> None:
    """Standalone SVG; y grows upwards as in the layout frame."""
    W, H = placement.grid.width, placement.grid.height
    px = CELL_PX
    color_of = {}
    for k, (g, d) in enumerate(sorted(set(spec.device_index.values()))):
        color_of[(g, d)] = PALETTE[k % len(PALETTE)]
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W * px}" height="{H * px}" '
        f'viewBox="0 0 {W * px} {H * px}">',
        '<g stroke="#cccccc" stroke-width="1">',
    ]
    for i in range(W + 1):
        lines.append(f'<line x1="{i * px}" y1="0" x2="{i * px}" y2="{H * px}"/>')
    for j in range(H + 1):
        lines.append(f'<line x1="0" y1="{j * px}" x2="{W * px}" y2="{j * px}"/>')
    lines.append("</g>")
    for (g, d, u), (x, y) in placement.items():
        lines.append(
            f'<rect class="unit" x="{x * px}" y="{(H - 1 - y) * px}" width="{px}" height="{px}" '
            f'fill="{color_of[(g, d)]}" stroke="#333333"><title>{spec.device_name(g, d)}[{u}]</title></rect>'
        )
    for g in placement.group_indices:
        cells = placement.group_cells(g)
        cx = sum(c[0] + 0.5 for c in cells) / len(cells) * px
        cy = (H - sum(c[1] + 0.5 for c in cells) / len(cells)) * px
        names = "/".join(name for name, _ in spec.groups[g].devices)
        lines.append(
            f'<text x="{cx:.2f}" y="{cy:.2f}" font-family="monospace" font-size="10" '
            f'text-anchor="middle" dominant-baseline="middle">{names}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


def placement_to_records(placement: Placement, spec: CircuitSpec) -> list[dict]:
    return [
        {"group": spec.groups[g].name, "device": spec.device_name(g, d), "unit": u, "x": x, "y": y}
        for (g, d, u), (x, y) in placement.items()
    ]


def write_placement(placement: Placement, spec: CircuitSpec, path) -> None:
    Path(path).write_text(json.dumps(placement_to_records(placement, spec), indent=1) + "\n")


def read_placement(path, spec: CircuitSpec) -> Placement:
    try:
        records = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    problems = []
    pos = {}
    idx = spec.device_index
    if not isinstance(records, list):
        raise ValidationError([f"{path}: expected a JSON list of unit records"])
    for i, rec in enumerate(records):
        try:
            g, d = idx[rec["device"]]
            uid = (g, d, int(rec["unit"]))
            pos[uid] = (int(rec["x"]), int(rec["y"]))
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"record {i}: {exc!r}")
    missing = set(spec.unit_ids) - set(pos)
    if missing:
        problems.append(f"missing units: {sorted(missing)}")
    p = Placement(spec.grid, pos)
    problems += p.violations()
    if problems:
        raise ValidationError(problems)
    return p
