"""Constructive symmetric layouts and the exhaustive-search oracle."""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterator, NamedTuple

from qplace.core import DIRECTIONS, CircuitSpec, Placement, UnitId
from qplace.errors import PatternImpossible, TooLarge, UnbalancedPair
from qplace.lde import EvalBudget, EvalReport, Evaluator, FomSpec, GradientField


class SymmetryStyle(Enum):
    Y_AXIS = "y-axis"
    XY_COMMON_CENTROID = "xy-common-centroid"


def _pair_layout(spec: CircuitSpec) -> dict[tuple[int, int], tuple[int, int]]:
    """Map device A -> device B for every pair, checking the pattern preconditions."""
    idx = spec.device_index
    partner: dict[tuple[int, int], tuple[int, int]] = {}
    used: set[tuple[int, int]] = set()
    for pair in spec.match_pairs:
        a, b = idx[pair.device_a], idx[pair.device_b]
        na = spec.groups[a[0]].devices[a[1]][1]
        nb = spec.groups[b[0]].devices[b[1]][1]
        if na != nb:
            raise UnbalancedPair(f"{pair.device_a} has {na} units but {pair.device_b} has {nb}")
        if a[0] != b[0]:
            raise PatternImpossible(f"pair {pair.device_a}/{pair.device_b} spans two groups")
        if a in used or b in used:
            raise PatternImpossible(f"a device of pair {pair.device_a}/{pair.device_b} is already matched")
        used.update((a, b))
        partner[a] = b
    return partner


def _group_items(spec: CircuitSpec, g: int, partner) -> tuple[list, list[UnitId]]:
    """Split a group into matched (A-unit, B-unit) couples and leftover units."""
    matched_b = set(partner.values())
    couples, singles = [], []
    for d, (_, n) in enumerate(spec.groups[g].devices):
        key = (g, d)
        if key in partner:
            b = partner[key]
            couples.extend(((g, d, u), (b[0], b[1], u)) for u in range(n))
        elif key not in matched_b:
            singles.extend((g, d, u) for u in range(n))
    return couples, singles


def _y_axis(spec: CircuitSpec, partner) -> dict[UnitId, tuple[int, int]]:
    W, H = spec.grid.width, spec.grid.height
    if W % 2:
        raise PatternImpossible("Y-axis symmetry needs an even grid width")
    half = W // 2
    pos = {}
    y0 = 0
    for g in range(len(spec.groups)):
        couples, singles = _group_items(spec, g, partner)
        slots = list(couples)
        for i in range(0, len(singles), 2):
            slots.append((singles[i], singles[i + 1] if i + 1 < len(singles) else None))
        hw = min(half, max(1, math.ceil(math.sqrt(len(slots)))))
        rows = math.ceil(len(slots) / hw)
        if y0 + rows > H:
            raise PatternImpossible(f"group {spec.groups[g].name!r} does not fit above y={y0}")
        for s, (left, right) in enumerate(slots):
            y = y0 + s // hw
            lx = half - 1 - s % hw
            pos[left] = (lx, y)
            if right is not None:
                pos[right] = (W - 1 - lx, y)
        y0 += rows
    return pos


# A at (0,0),(1,1); B at (1,0),(0,1): both centroids sit at the tile centre
_TILE_A = ((0, 0), (1, 1))
_TILE_B = ((1, 0), (0, 1))


def _common_centroid(spec: CircuitSpec, partner) -> dict[UnitId, tuple[int, int]]:
    W, H = spec.grid.width, spec.grid.height
    pos = {}
    y0 = 0
    for g in range(len(spec.groups)):
        couples, singles = _group_items(spec, g, partner)
        tiles = []
        # couples of one pair are consecutive, so stepping by 2 never mixes pairs
        for i in range(0, len(couples), 2):
            if i + 1 >= len(couples) or couples[i][0][:2] != couples[i + 1][0][:2]:
                raise PatternImpossible("common-centroid tiles need an even unit count per device")
            (a0, b0), (a1, b1) = couples[i], couples[i + 1]
            tiles.append((a0, a1, b0, b1))
        tw = max(1, math.ceil(math.sqrt(len(tiles) + len(singles) / 4)))
        width = 2 * tw
        if width > W:
            tw, width = W // 2, 2 * (W // 2)
            if tw < 1:
                raise PatternImpossible("grid too narrow for a 2x2 tile")
        x0 = (W - width) // 2
        tile_rows = math.ceil(len(tiles) / tw)
        single_rows = math.ceil(len(singles) / width)
        if y0 + 2 * tile_rows + single_rows > H:
            raise PatternImpossible(f"group {spec.groups[g].name!r} does not fit above y={y0}")
        for t, (a0, a1, b0, b1) in enumerate(tiles):
            tx, ty = x0 + 2 * (t % tw), y0 + 2 * (t // tw)
            for uid, (dx, dy) in zip((a0, a1), _TILE_A):
                pos[uid] = (tx + dx, ty + dy)
            for uid, (dx, dy) in zip((b0, b1), _TILE_B):
                pos[uid] = (tx + dx, ty + dy)
        ys = y0 + 2 * tile_rows
        for k, uid in enumerate(singles):
            pos[uid] = (x0 + k % width, ys + k // width)
        y0 = ys + single_rows
    return pos


def place_symmetric(spec: CircuitSpec, style: SymmetryStyle) -> Placement:
    """Y-axis mirror layout or 2x2 interdigitated common-centroid layout.

    Groups are stacked bottom to top in spec order.
    """
    partner = _pair_layout(spec)
    if style is SymmetryStyle.Y_AXIS:
        pos = _y_axis(spec, partner)
    else:
        pos = _common_centroid(spec, partner)
    p = Placement(spec.grid, pos)
    problems = p.violations()
    if problems:
        raise PatternImpossible("; ".join(problems))
    return p


def connected_sets(grid_w: int, grid_h: int, n: int, limit: int | None = None) -> list[tuple]:
    """All 8-connected n-cell subsets of the grid, each as a (y, x)-sorted cell tuple."""
    level = {frozenset([(x, y)]) for x in range(grid_w) for y in range(grid_h)}
    for _ in range(n - 1):
        nxt = set()
        for s in level:
            for x, y in s:
                for d in DIRECTIONS:
                    c = (x + d.dx, y + d.dy)
                    if 0 <= c[0] < grid_w and 0 <= c[1] < grid_h and c not in s:
                        nxt.add(s | {c})
            if limit is not None and len(nxt) > limit:
                raise TooLarge(f"more than {limit} connected {n}-cell shapes")
        level = nxt
    return sorted(tuple(sorted(s, key=lambda c: (c[1], c[0]))) for s in level)


def multiset_permutations(counts: list[int]) -> Iterator[tuple[int, ...]]:
    """Distinct arrangements of symbol i repeated counts[i] times, in lexicographic order."""
    total = sum(counts)
    seq: list[int] = []
    left = list(counts)

    def rec():
        if len(seq) == total:
            yield tuple(seq)
            return
        for i, c in enumerate(left):
            if c:
                left[i] -= 1
                seq.append(i)
                yield from rec()
                seq.pop()
                left[i] += 1

    yield from rec()


def enumerate_placements(spec: CircuitSpec, max_states: int) -> Iterator[Placement]:
    """Every placement meeting the core invariants, in canonical order."""
    grid = spec.grid
    options = []
    for g, group in enumerate(spec.groups):
        counts = [n for _, n in group.devices]
        labelings = list(multiset_permutations(counts))
        shapes = connected_sets(grid.width, grid.height, group.unit_count, limit=max_states)
        options.append((g, shapes, labelings))

    count = 0
    chosen: dict[UnitId, tuple[int, int]] = {}
    occupied: set[tuple[int, int]] = set()

    def rec(k):
        nonlocal count
        if k == len(options):
            count += 1
            if count > max_states:
                raise TooLarge(f"more than {max_states} valid placements")
            yield Placement(grid, chosen)
            return
        g, shapes, labelings = options[k]
        for cells in shapes:
            if any(c in occupied for c in cells):
                continue
            occupied.update(cells)
            for lab in labelings:
                seen = [0] * len(spec.groups[g].devices)
                for cell, d in zip(cells, lab):
                    chosen[(g, d, seen[d])] = cell
                    seen[d] += 1
                yield from rec(k + 1)
            occupied.difference_update(cells)

    yield from rec(0)


class OracleResult(NamedTuple):
    best_cost: float
    best_placement: Placement
    best_report: EvalReport
    states: int


def exhaustive_oracle(
    spec: CircuitSpec, field: GradientField, fom: FomSpec, max_states: int = 10**7
) -> OracleResult:
    """Exact optimum by enumeration; ties go to the first placement in canonical order.

    Uses its own evaluation counter, never an optimizer's budget.
    """
    evaluator = Evaluator(field, fom, spec, EvalBudget(max_states))
    best = None
    for p in enumerate_placements(spec, max_states):
        r = evaluator(p)
        if best is None or r.fom < best[0]:
            best = (r.fom, p, r)
    if best is None:
        raise PatternImpossible("no valid placement exists on this grid")
    return OracleResult(best[0], best[1], best[2], evaluator.calls)
