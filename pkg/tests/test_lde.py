import math

import pytest
from hypothesis import given, settings, strategies as st

from qplace.core import CircuitSpec, GridSpec, GroupSpec, PairSpec, Placement
from qplace.errors import BudgetExhausted
from qplace.lde import (
    Bump,
    EvalBudget,
    Evaluator,
    FomSpec,
    GradientField,
    device_param,
    evaluate,
    field_value,
    pair_mismatch,
)

GRID = GridSpec(12, 12)
coef = st.floats(-1.0, 1.0, allow_nan=False)


def pair_spec(n=2, grid=GRID):
    return CircuitSpec((GroupSpec("g", (("A", n), ("B", n))),), (PairSpec("A", "B"),), grid)


def pair_placement(a_cells, b_cells, grid=GRID):
    pos = {(0, 0, i): c for i, c in enumerate(a_cells)}
    pos.update({(0, 1, i): c for i, c in enumerate(b_cells)})
    return Placement(grid, pos)


def test_field_value_examples():
    assert field_value(GradientField(), 3.0, 7.0) == 0.0
    f = GradientField.from_coeffs(c10=0.1, c01=0.1)
    assert field_value(f, 2, 2) == pytest.approx(0.4, abs=1e-15)
    bump = GradientField(bumps=(Bump(0.0, 0.0, 1.0, 1.0),))
    assert field_value(bump, 0.0, 0.0) == 1.0


def test_field_value_bump_falloff():
    f = GradientField(bumps=(Bump(1.0, 2.0, 0.5, 2.0),))
    assert field_value(f, 3.0, 2.0) == pytest.approx(0.5 * math.exp(-4 / 8), rel=1e-15)


def test_device_param_mean_over_unit_centres():
    f = GradientField.from_coeffs(c10=0.1, c01=0.1)
    p = Placement(GRID, {(0, 0, 0): (0, 0), (0, 0, 1): (2, 2)})
    assert device_param(f, p, (0, 0)) == pytest.approx(0.3, abs=1e-15)
    assert device_param(GradientField(), p, (0, 0)) == 0.0
    single = Placement(GRID, {(0, 0, 0): (4, 1)})
    assert device_param(f, single, (0, 0)) == field_value(f, 4.5, 1.5)


CC_A = [(0, 0), (3, 3)]
CC_B = [(0, 3), (3, 0)]


def test_common_centroid_linear_field_cancels():
    p = pair_placement(CC_A, CC_B)
    f = GradientField.from_coeffs(c10=0.37, c01=-0.81)
    assert pair_mismatch(f, p, PairSpec("A", "B"), pair_spec()) <= 1e-12


def test_common_centroid_cross_term_does_not_cancel():
    p = pair_placement(CC_A, CC_B)
    f = GradientField.from_coeffs(c11=1.0)
    assert pair_mismatch(f, p, PairSpec("A", "B"), pair_spec()) == pytest.approx(4.5, abs=1e-12)


def test_colocated_sets_zero_mismatch():
    # two devices reading the same cells (not a valid placement, only a symmetry check)
    spec = CircuitSpec(
        (GroupSpec("a", (("A", 2),)), GroupSpec("b", (("B", 2),))), (PairSpec("A", "B"),), GRID
    )
    cells = [(1, 2), (5, 7)]
    p = Placement(GRID, {(0, 0, 0): cells[0], (0, 0, 1): cells[1], (1, 0, 0): cells[0], (1, 0, 1): cells[1]})
    f = GradientField.from_coeffs(c20=0.3, c11=-0.2, bumps=[Bump(4, 4, 1, 2)])
    assert pair_mismatch(f, p, spec.match_pairs[0], spec) == 0.0


@st.composite
def point_symmetric_pair(draw):
    """Two disjoint devices, each point-symmetric about the same centre."""
    k = draw(st.integers(1, 3))
    half = draw(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 9)),
                         min_size=2 * k, max_size=2 * k, unique=True))
    ox = draw(st.integers(0, 2))
    oy = draw(st.integers(0, 2))
    # (x, y) and (9 - x, 9 - y) share the centre (5, 5); x <= 4 keeps the halves disjoint
    couples = [((x + ox, y + oy), (9 - x + ox, 9 - y + oy)) for x, y in half]
    a = [c for cp in couples[:k] for c in cp]
    b = [c for cp in couples[k:] for c in cp]
    return a, b


@settings(max_examples=200, deadline=None)
@given(point_symmetric_pair(), coef, coef, coef)
def test_linear_cancellation_property(geom, c00, c10, c01):
    a, b = geom
    f = GradientField.from_coeffs(c00=c00, c10=c10, c01=c01)
    spec = pair_spec(len(a))
    assert pair_mismatch(f, pair_placement(a, b), spec.match_pairs[0], spec) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 5), st.integers(0, 11)), min_size=1, max_size=6, unique=True),
    coef, coef, coef,
)
def test_vertical_mirror_cancels_y_only_field(a_cells, c00, c01, c02):
    # B is A mirrored across x = width/2, so both devices share every y
    b_cells = [(11 - x, y) for x, y in a_cells]
    f = GradientField.from_coeffs(c00=c00, c01=c01, c02=c02)
    spec = pair_spec(len(a_cells))
    assert pair_mismatch(f, pair_placement(a_cells, b_cells), spec.match_pairs[0], spec) <= 1e-12


def test_vertical_mirror_does_not_cancel_x_gradient():
    a, b = [(1, 0)], [(10, 0)]
    f = GradientField.from_coeffs(c10=0.01)
    spec = pair_spec(1)
    assert pair_mismatch(f, pair_placement(a, b), spec.match_pairs[0], spec) == pytest.approx(0.09)


# ---------------------------------------------------------------- evaluate


def test_evaluate_fom_and_eval_index():
    spec = pair_spec(1)
    p = pair_placement([(0, 0)], [(3, 0)])
    f = GradientField.from_coeffs(c10=0.1)
    fom = FomSpec({"mismatch": 1.0}, {"mismatch": 1.0})
    budget = EvalBudget(5)
    r1 = evaluate(f, fom, spec, p, budget)
    r2 = evaluate(f, fom, spec, p, budget)
    assert r1.fom == pytest.approx(0.3, abs=1e-12)
    assert (r1.eval_index, r2.eval_index) == (1, 2)
    assert budget.used == 2


def test_evaluate_offset_weighted_sum():
    spec = CircuitSpec(
        (GroupSpec("g", (("A", 1), ("B", 1), ("C", 1), ("D", 1))),),
        (PairSpec("A", "B", 10.0), PairSpec("C", "D", 5.0)),
        GRID,
    )
    p = Placement(GRID, {(0, 0, 0): (0, 0), (0, 1, 0): (0, 1), (0, 2, 0): (2, 0), (0, 3, 0): (3, 0)})
    f = GradientField.from_coeffs(c10=0.002, c01=0.01)
    r = evaluate(f, FomSpec({"offset": 1.0}, {"offset": 1.0}), spec, p, EvalBudget(1))
    assert r.pair_mismatch == pytest.approx((0.01, 0.002), abs=1e-15)
    assert r.offset == pytest.approx(0.11, abs=1e-14)


def test_evaluate_zero_field_only_geometry():
    spec = pair_spec(2)
    p = pair_placement([(0, 0), (1, 0)], [(0, 1), (1, 1)])
    fom = FomSpec(
        {"mismatch": 1.0, "offset": 1.0, "area": 0.5, "wirelength": 0.25},
        {"mismatch": 1.0, "offset": 1.0, "area": 2.0, "wirelength": 4.0},
    )
    r = evaluate(GradientField(), fom, spec, p, EvalBudget(1))
    assert r.offset == 0.0 and r.mismatch == 0.0
    # area 4, wirelength: pair hpwl 1 + group hpwl 1
    assert (r.area, r.wirelength) == (4, 2.0)
    assert r.fom == pytest.approx(0.5 * 4 / 2 + 0.25 * 2 / 4)


def test_evaluate_budget_exhausted():
    spec = pair_spec(1)
    p = pair_placement([(0, 0)], [(1, 0)])
    budget = EvalBudget(1)
    fom = FomSpec({"mismatch": 1.0}, {"mismatch": 1.0})
    evaluate(GradientField(), fom, spec, p, budget)
    with pytest.raises(BudgetExhausted):
        evaluate(GradientField(), fom, spec, p, budget)
    assert budget.used == 1


FOM_ALL = FomSpec(
    {"mismatch": 1.0, "offset": 2.0, "area": 0.1, "wirelength": 0.3},
    {"mismatch": 0.01, "offset": 0.02, "area": 4.0, "wirelength": 2.0},
)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), min_size=4, max_size=4, unique=True),
       coef, coef, coef, coef)
def test_evaluator_matches_evaluate_and_is_deterministic(cells, c10, c20, c11, amp):
    spec = pair_spec(2)
    p = pair_placement(cells[:2], cells[2:])
    f = GradientField.from_coeffs(c10=c10, c20=c20, c11=c11, bumps=[Bump(3.0, 4.0, amp, 1.5)])
    a = evaluate(f, FOM_ALL, spec, p, EvalBudget(1))
    b = Evaluator(f, FOM_ALL, spec, EvalBudget(1))(p)
    c = evaluate(f, FOM_ALL, spec, p, EvalBudget(1))
    assert a == b == c
    assert min(a.offset, a.area, a.wirelength, a.fom, *a.pair_mismatch) >= 0


@given(st.dictionaries(st.sampled_from(["mismatch", "offset", "area", "wirelength"]),
                       st.floats(0, 100), min_size=4, max_size=4),
       st.sampled_from(["mismatch", "offset", "area", "wirelength"]), st.floats(0, 10))
def test_fom_monotone_in_each_metric(metrics, which, bump):
    lo = FOM_ALL.combine(metrics)
    hi = FOM_ALL.combine({**metrics, which: metrics[which] + bump})
    assert hi >= lo


def test_field_and_fom_validation():
    f = GradientField(bumps=(Bump(0, 0, 1, 1), Bump(0, 0, 1, 0.0)))
    assert any("bumps[1]" in p for p in f.problems())
    assert FomSpec({"area": 0.0}, {}).problems()
    assert FomSpec({"area": 1.0}, {"area": -1.0}).problems()
    assert not FomSpec({"area": 1.0}, {"area": 3.0}).problems()
