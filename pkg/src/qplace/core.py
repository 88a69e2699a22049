"""Grid world, circuit hierarchy and move legality.

A circuit is a list of groups, each group a list of devices, each device a
number of identical 1x1 unit cells. A unit is identified by the triple
``(group index, device index, unit index)``. Groups must stay 8-connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Union

from qplace.errors import GridTooSmall, IllegalMove, ValidationError

UnitId = tuple[int, int, int]
Cell = tuple[int, int]

TOP_AGENT = -1


class Direction(Enum):
    N = (0, 1)
    NE = (1, 1)
    E = (1, 0)
    SE = (1, -1)
    S = (0, -1)
    SW = (-1, -1)
    W = (-1, 0)
    NW = (-1, 1)

    @property
    def dx(self) -> int:
        return self.value[0]

    @property
    def dy(self) -> int:
        return self.value[1]

    def reverse(self) -> "Direction":
        return Direction((-self.dx, -self.dy))


DIRECTIONS: tuple[Direction, ...] = tuple(Direction)
for _i, _d in enumerate(DIRECTIONS):
    _d.index = _i  # position in compass order, used in action keys
del _i, _d
_NEIGHBORS = tuple(d.value for d in DIRECTIONS)
_DIR_PAIRS = tuple((d, d.value) for d in DIRECTIONS)


class Level(Enum):
    TOP = "top"
    BOTTOM = "bottom"


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height


@dataclass(frozen=True)
class GroupSpec:
    name: str
    devices: tuple[tuple[str, int], ...]

    @property
    def unit_count(self) -> int:
        return sum(n for _, n in self.devices)


@dataclass(frozen=True)
class PairSpec:
    device_a: str
    device_b: str
    sensitivity: float = 1.0


@dataclass(frozen=True)
class CircuitSpec:
    groups: tuple[GroupSpec, ...]
    match_pairs: tuple[PairSpec, ...]
    grid: GridSpec

    @cached_property
    def device_index(self) -> dict[str, tuple[int, int]]:
        """Device name -> (group index, device index)."""
        out = {}
        for g, group in enumerate(self.groups):
            for d, (name, _) in enumerate(group.devices):
                out.setdefault(name, (g, d))
        return out

    @cached_property
    def unit_ids(self) -> tuple[UnitId, ...]:
        return tuple(
            (g, d, u)
            for g, group in enumerate(self.groups)
            for d, (_, n) in enumerate(group.devices)
            for u in range(n)
        )

    @property
    def total_units(self) -> int:
        return sum(g.unit_count for g in self.groups)

    def device_name(self, g: int, d: int) -> str:
        return self.groups[g].devices[d][0]

    def problems(self) -> list[str]:
        """Every invariant violation, as human-readable strings."""
        out = []
        if self.grid.width < 1 or self.grid.height < 1:
            out.append(f"grid: width and height must be >= 1, got {self.grid.width}x{self.grid.height}")
        if not self.groups:
            out.append("groups: at least one group is required")
        seen: dict[str, str] = {}
        for gi, group in enumerate(self.groups):
            if not group.devices:
                out.append(f"groups[{gi}] ({group.name}): no devices")
            for di, (name, n) in enumerate(group.devices):
                where = f"groups[{gi}].devices[{di}]"
                if name in seen:
                    out.append(f"{where}: duplicate device name {name!r} (first seen at {seen[name]})")
                else:
                    seen[name] = where
                if not isinstance(n, int) or n < 1:
                    out.append(f"{where} ({name}): unit_count must be an integer >= 1, got {n!r}")
        for pi, pair in enumerate(self.match_pairs):
            where = f"match_pairs[{pi}]"
            if pair.device_a == pair.device_b:
                out.append(f"{where}: device_a and device_b are both {pair.device_a!r}")
            for name in (pair.device_a, pair.device_b):
                if name not in seen:
                    out.append(f"{where}: unknown device {name!r}")
            if not pair.sensitivity >= 0:
                out.append(f"{where}: sensitivity must be >= 0, got {pair.sensitivity!r}")
        return out

    def validate(self) -> "CircuitSpec":
        problems = self.problems()
        if problems:
            raise ValidationError(problems)
        return self


def is_connected(cells: Iterable[Cell]) -> bool:
    """8-neighbourhood flood fill. The empty set counts as connected."""
    remaining = set(cells)
    if not remaining:
        return True
    stack = [remaining.pop()]
    while stack:
        x, y = stack.pop()
        for dx, dy in _NEIGHBORS:
            c = (x + dx, y + dy)
            if c in remaining:
                remaining.remove(c)
                stack.append(c)
    return not remaining


def _touches(cell: Cell, cells) -> bool:
    x, y = cell
    for dx, dy in _NEIGHBORS:
        if (x + dx, y + dy) in cells:
            return True
    return False


class Placement:
    """Immutable assignment of unit ids to grid cells.

    Construction does not enforce the connectivity invariant so that
    analytic tests can build arbitrary geometries; use ``violations()``.
    """

    __slots__ = ("grid", "_pos", "_occ", "_groups", "_hash")

    def __init__(self, grid: GridSpec, positions: Mapping[UnitId, Cell]):
        self.grid = grid
        self._pos = {tuple(k): (int(v[0]), int(v[1])) for k, v in sorted(positions.items())}
        self._occ = {}
        self._groups: dict[int, list[UnitId]] = {}
        for uid, cell in self._pos.items():
            self._occ.setdefault(cell, uid)
            self._groups.setdefault(uid[0], []).append(uid)
        self._hash = None

    @classmethod
    def _fast(cls, grid, pos, occ, groups) -> "Placement":
        p = cls.__new__(cls)
        p.grid, p._pos, p._occ, p._groups, p._hash = grid, pos, occ, groups, None
        return p

    @property
    def positions(self) -> Mapping[UnitId, Cell]:
        return MappingProxyType(self._pos)

    def __getitem__(self, uid: UnitId) -> Cell:
        return self._pos[uid]

    def __iter__(self) -> Iterator[UnitId]:
        return iter(self._pos)

    def __len__(self) -> int:
        return len(self._pos)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Placement):
            return NotImplemented
        return self.grid == other.grid and self._pos == other._pos

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.grid, tuple(self._pos.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Placement({self.grid.width}x{self.grid.height}, {self._pos})"

    def items(self):
        return self._pos.items()

    def occupant(self, cell: Cell):
        return self._occ.get(cell)

    @property
    def group_indices(self) -> list[int]:
        return sorted(self._groups)

    def group_units(self, g: int) -> list[UnitId]:
        return self._groups.get(g, [])

    def group_cells(self, g: int) -> list[Cell]:
        return [self._pos[u] for u in self._groups.get(g, [])]

    def device_cells(self, g: int, d: int) -> list[Cell]:
        return [c for u, c in self._pos.items() if u[0] == g and u[1] == d]

    def translated(self, dx: int, dy: int, grid: GridSpec | None = None) -> "Placement":
        grid = grid or self.grid
        return Placement(grid, {u: (x + dx, y + dy) for u, (x, y) in self._pos.items()})

    def violations(self) -> list[str]:
        out = []
        for uid, (x, y) in self._pos.items():
            if not self.grid.contains(x, y):
                out.append(f"unit {uid} out of bounds at {(x, y)}")
        if len(self._occ) != len(self._pos):
            seen = {}
            for uid, cell in self._pos.items():
                if cell in seen:
                    out.append(f"units {seen[cell]} and {uid} overlap at {cell}")
                seen[cell] = uid
        for g in self.group_indices:
            if not is_connected(self.group_cells(g)):
                out.append(f"group {g} is not 8-connected")
        return out

    def is_valid(self) -> bool:
        return not self.violations()


@dataclass(frozen=True)
class MoveAction:
    level: Level
    agent: int
    mover: Union[int, UnitId]
    direction: Direction


def _top_ok(p: Placement, g: int, d: Direction) -> bool:
    dx, dy = d.value
    grid, occ = p.grid, p._occ
    for u in p._groups.get(g, ()):
        x, y = p._pos[u]
        nx, ny = x + dx, y + dy
        if not (0 <= nx < grid.width and 0 <= ny < grid.height):
            return False
        other = occ.get((nx, ny))
        if other is not None and other[0] != g:
            return False
    return True


def _bottom_candidates(p: Placement, uid: UnitId):
    """Yield legal directions for one unit, in compass order."""
    g = uid[0]
    x, y = p._pos[uid]
    rest = {p._pos[u] for u in p._groups[g] if u != uid}
    rest_connected = is_connected(rest)
    grid, occ = p.grid, p._occ
    w, h = grid.width, grid.height
    for d, (dx, dy) in _DIR_PAIRS:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h):
            continue
        new = (nx, ny)
        if new in occ:
            continue
        if not rest:
            yield d
        elif rest_connected:
            if _touches(new, rest):
                yield d
        elif is_connected(rest | {new}):
            yield d


def legal_moves(p: Placement, level: Level, agent: int) -> list[MoveAction]:
    """Every legal move of one agent, movers in index order, then compass order."""
    if level is Level.TOP:
        return [
            MoveAction(Level.TOP, TOP_AGENT, g, d)
            for g in p.group_indices
            for d in DIRECTIONS
            if _top_ok(p, g, d)
        ]
    if agent not in p._groups:
        raise KeyError(f"no group {agent} in placement")
    return [
        MoveAction(Level.BOTTOM, agent, uid, d)
        for uid in p._groups[agent]
        for d in _bottom_candidates(p, uid)
    ]


def is_legal(p: Placement, m: MoveAction) -> bool:
    if m.level is Level.TOP:
        return m.agent == TOP_AGENT and m.mover in p._groups and _top_ok(p, m.mover, m.direction)
    uid = m.mover
    if not isinstance(uid, tuple) or uid not in p._pos or uid[0] != m.agent:
        return False
    return m.direction in set(_bottom_candidates(p, uid))


def apply_move(p: Placement, m: MoveAction, check: bool = True) -> Placement:
    """Return a new placement with the mover displaced; ``p`` is untouched."""
    if check and not is_legal(p, m):
        raise IllegalMove(f"{m} is not legal in this placement")
    dx, dy = m.direction.value
    pos = dict(p._pos)
    occ = dict(p._occ)
    if m.level is Level.TOP:
        movers = p._groups[m.mover]
        for u in movers:
            del occ[pos[u]]
        for u in movers:
            x, y = pos[u]
            pos[u] = (x + dx, y + dy)
            occ[pos[u]] = u
    else:
        u = m.mover
        x, y = pos[u]
        del occ[(x, y)]
        pos[u] = (x + dx, y + dy)
        occ[pos[u]] = u
    return Placement._fast(p.grid, pos, occ, p._groups)


def _block_shape(n: int, max_h: int) -> tuple[int, int]:
    w = max(1, math.ceil(math.sqrt(n)))
    while math.ceil(n / w) > max_h and w < n:
        w += 1
    return w, math.ceil(n / w)


def initial_placement(spec: CircuitSpec) -> Placement:
    """Groups left to right in spec order as row-major blocks, one spacer column apart."""
    grid = spec.grid
    if spec.total_units > grid.width * grid.height:
        raise GridTooSmall(f"{spec.total_units} units cannot fit on a {grid.width}x{grid.height} grid")
    pos = {}
    x0 = 0
    for g, group in enumerate(spec.groups):
        n = group.unit_count
        w, h = _block_shape(n, grid.height)
        if x0 + w > grid.width or h > grid.height:
            raise GridTooSmall(f"group {group.name!r} ({w}x{h} block) does not fit at x={x0}")
        k = 0
        for d, (_, count) in enumerate(group.devices):
            for u in range(count):
                pos[(g, d, u)] = (x0 + k % w, k // w)
                k += 1
        x0 += w + 1
    return Placement(grid, pos)


def bounding_area(p: Placement) -> int:
    if not len(p):
        return 0
    xs = [c[0] for c in p._pos.values()]
    ys = [c[1] for c in p._pos.values()]
    return (max(xs) - min(xs) + 1) * (max(ys) - min(ys) + 1)


def device_centroids(p: Placement) -> dict[tuple[int, int], tuple[float, float]]:
    acc: dict[tuple[int, int], list[float]] = {}
    for (g, d, _), (x, y) in p._pos.items():
        a = acc.setdefault((g, d), [0.0, 0.0, 0])
        a[0] += x + 0.5
        a[1] += y + 0.5
        a[2] += 1
    return {k: (sx / n, sy / n) for k, (sx, sy, n) in acc.items()}


def _hpwl(points) -> float:
    xs = [pt[0] for pt in points]
    ys = [pt[1] for pt in points]
    return (max(xs) - min(xs)) + (max(ys) - min(ys))


def wirelength(p: Placement, spec: CircuitSpec) -> float:
    """Centroid HPWL summed over matched pairs and over groups."""
    cents = device_centroids(p)
    idx = spec.device_index
    total = 0.0
    for pair in spec.match_pairs:
        total += _hpwl([cents[idx[pair.device_a]], cents[idx[pair.device_b]]])
    for g, group in enumerate(spec.groups):
        pts = [cents[(g, d)] for d in range(len(group.devices)) if (g, d) in cents]
        if pts:
            total += _hpwl(pts)
    return total
