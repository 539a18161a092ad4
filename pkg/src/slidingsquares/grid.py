"""Grid geometry: configurations, connectivity, holes, and shape predicates.

Cells are ``(x, y)`` integer tuples; x grows east, y grows north. A
configuration is a finite set of occupied cells with persistent per-square
identities. Negative coordinates are allowed and squares may transiently
leave the bounding box while moving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K

Cell = tuple[int, int]


@dataclass(frozen=True)
class BoundingBox:
    x: int
    y: int
    width: int
    height: int

    @property
    def origin(self) -> Cell:
        return (self.x, self.y)

    @property
    def perimeter(self) -> int:
        return 2 * (self.width + self.height)

    def contains(self, cell: Cell) -> bool:
        return (
            self.x <= cell[0] < self.x + self.width
            and self.y <= cell[1] < self.y + self.height
        )

    def in_ring(self, cell: Cell) -> bool:
        """Inside the box or the surrounding 1-cell frame."""
        return (
            self.x - 1 <= cell[0] <= self.x + self.width
            and self.y - 1 <= cell[1] <= self.y + self.height
        )

    def union(self, other: "BoundingBox") -> "BoundingBox":
        x = min(self.x, other.x)
        y = min(self.y, other.y)
        x1 = max(self.x + self.width, other.x + other.width)
        y1 = max(self.y + self.height, other.y + other.height)
        return BoundingBox(x, y, x1 - x, y1 - y)


class Configuration:
    """An edge-connected set of unit squares with square identities.

    Identities persist across moves so traces can be audited square by
    square; equality and hashing ignore them and compare cell sets only.
    """

    __slots__ = ("_cells", "_ids")

    def __init__(self, cells, ids=None):
        cellset = frozenset((int(x), int(y)) for x, y in cells)
        if not cellset:
            raise ValueError("empty configuration")
        object.__setattr__(self, "_cells", cellset)
        if ids is None:
            ids = {c: i for i, c in enumerate(sorted(cellset))}
        else:
            ids = dict(ids)
            if set(ids) != cellset:
                raise ValueError("ids must cover exactly the cells")
        object.__setattr__(self, "_ids", ids)

    @property
    def cells(self) -> frozenset:
        return self._cells

    @property
    def ids(self) -> dict:
        return dict(self._ids)

    def id_at(self, cell: Cell) -> int:
        return self._ids[cell]

    def __len__(self):
        return len(self._cells)

    def __contains__(self, cell):
        return tuple(cell) in self._cells

    def __iter__(self):
        return iter(self._cells)

    def __eq__(self, other):
        if isinstance(other, Configuration):
            return self._cells == other._cells
        return NotImplemented

    def __hash__(self):
        return hash(self._cells)

    def __repr__(self):
        bb = self.bounding_box()
        return f"Configuration({len(self)} squares, box {bb.width}x{bb.height})"

    def bounding_box(self) -> BoundingBox:
        xs = [c[0] for c in self._cells]
        ys = [c[1] for c in self._cells]
        return BoundingBox(min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)

    def translated(self, dx: int, dy: int) -> "Configuration":
        return Configuration(
            ((x + dx, y + dy) for x, y in self._cells),
            {(x + dx, y + dy): i for (x, y), i in self._ids.items()},
        )

    def normalized(self) -> "Configuration":
        """Translate so the bounding-box origin sits at (0, 0)."""
        bb = self.bounding_box()
        if bb.x == 0 and bb.y == 0:
            return self
        return self.translated(-bb.x, -bb.y)

    def root_square(self) -> Cell:
        """Leftmost square of the bottom row."""
        return min(self._cells, key=lambda c: (c[1], c[0]))

    def to_grid(self, margin: int = 2):
        """Occupancy array ``occ[x, y]`` plus the world coordinate of cell (0, 0)."""
        bb = self.bounding_box()
        ox, oy = bb.x - margin, bb.y - margin
        occ = np.zeros((bb.width + 2 * margin, bb.height + 2 * margin), dtype=np.uint8)
        for x, y in self._cells:
            occ[x - ox, y - oy] = 1
        return occ, ox, oy


def is_edge_connected(config: Configuration) -> bool:
    """True iff the edge-adjacency graph of the configuration is connected."""
    occ, _, _ = config.to_grid(margin=1)
    return bool(K.connected(occ))


def holes(config: Configuration) -> list[frozenset]:
    """Finite maximal vertex-connected sets of empty cells.

    The infinite outside region is excluded; each hole is returned as a
    frozenset of cells, ordered by smallest member.
    """
    occ, ox, oy = config.to_grid(margin=1)
    out = K.outside_mask(occ)
    W, H = occ.shape
    seen = np.zeros((W, H), dtype=bool)
    found = []
    for x in range(W):
        for y in range(H):
            if occ[x, y] or out[x, y] or seen[x, y]:
                continue
            comp = []
            stack = [(x, y)]
            seen[x, y] = True
            while stack:
                cx, cy = stack.pop()
                comp.append((cx + ox, cy + oy))
                for dx in (-1, 0, 1):
                    for dy in (-1, 0, 1):
                        ax, ay = cx + dx, cy + dy
                        if (
                            0 <= ax < W
                            and 0 <= ay < H
                            and not occ[ax, ay]
                            and not out[ax, ay]
                            and not seen[ax, ay]
                        ):
                            seen[ax, ay] = True
                            stack.append((ax, ay))
            found.append(frozenset(comp))
    found.sort(key=lambda h: min(h))
    return found


def boundary_squares(config: Configuration) -> set:
    """Squares vertex-connected to the outside region."""
    occ, ox, oy = config.to_grid(margin=1)
    out = K.outside_mask(occ)
    W, H = occ.shape
    result = set()
    for x in range(W):
        for y in range(H):
            if not occ[x, y]:
                continue
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    ax, ay = x + dx, y + dy
                    if 0 <= ax < W and 0 <= ay < H and out[ax, ay]:
                        result.add((x + ox, y + oy))
    return result


def is_xy_monotone(config: Configuration) -> bool:
    """Staircase condition relative to the bounding-box origin.

    Every square above the bottom row has its south neighbor occupied and
    every square right of the leftmost column has its west neighbor
    occupied.
    """
    bb = config.bounding_box()
    cells = config.cells
    for x, y in cells:
        if y > bb.y and (x, y - 1) not in cells:
            return False
        if x > bb.x and (x - 1, y) not in cells:
            return False
    return True


def _rows(config: Configuration):
    rows = {}
    for x, y in config.cells:
        rows.setdefault(y, []).append(x)
    return rows


def is_left_aligned_histogram(config: Configuration) -> bool:
    """Rows are contiguous intervals anchored at the leftmost column and the
    occupied rows are contiguous in y."""
    bb = config.bounding_box()
    rows = _rows(config)
    ys = sorted(rows)
    if ys != list(range(ys[0], ys[-1] + 1)):
        return False
    for xs in rows.values():
        xs.sort()
        if xs[0] != bb.x or xs != list(range(xs[0], xs[0] + len(xs))):
            return False
    return True


def _two_core(cells: frozenset) -> set:
    """Iteratively strip degree-1 squares; what remains lies on cycles."""
    core = set(cells)
    changed = True
    while changed and core:
        changed = False
        for c in list(core):
            x, y = c
            deg = sum(
                1
                for n in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))
                if n in core
            )
            if deg <= 1:
                core.discard(c)
                changed = True
    return core


def is_double_gamma(config: Configuration) -> bool:
    """Stuck-chunk shape: a 2-connected core whose top two rows have equal
    length >= 2 and whose lower rows have width exactly 2 at the left, plus
    at most two attached loose squares."""
    core = _two_core(config.cells)
    if not core:
        return False
    loose = config.cells - core
    if len(loose) > 2:
        return False
    for lx, ly in loose:
        adj = sum(
            1
            for n in ((lx + 1, ly), (lx - 1, ly), (lx, ly + 1), (lx, ly - 1))
            if n in core
        )
        if adj == 0:
            return False
    rows = {}
    for x, y in core:
        rows.setdefault(y, []).append(x)
    ys = sorted(rows, reverse=True)
    if ys != list(range(ys[0], ys[-1] - 1, -1)):
        return False
    if len(ys) < 2:
        return False
    x0 = min(x for x, _ in core)
    for i, y in enumerate(ys):
        xs = sorted(rows[y])
        if xs[0] != x0 or xs != list(range(xs[0], xs[0] + len(xs))):
            return False
        if i < 2:
            if len(xs) != len(rows[ys[0]]) or len(xs) < 2:
                return False
        else:
            if len(xs) != 2:
                return False
    return True
