"""Mutable engine state shared by the gathering, compaction, and bridge
phases: an occupancy grid with square identities, a frozen bounding box,
and the move log. Single-owner mutation; snapshots are immutable."""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import _kernels as K
from .grid import BoundingBox, Cell, Configuration
from .moves import CODES, Move

_NET = K.NET


class Board:
    def __init__(self, config: Configuration, box: Optional[BoundingBox] = None,
                 margin: int = 2):
        bb = config.bounding_box() if box is None else box
        span = bb.union(config.bounding_box())
        self.box = bb
        self.P = bb.perimeter
        self.ox = span.x - margin
        self.oy = span.y - margin
        self.occ = np.zeros(
            (span.width + 2 * margin, span.height + 2 * margin), dtype=np.uint8
        )
        self.at = {}
        self.pos = {}
        for cell, sid in config.ids.items():
            self.at[cell] = sid
            self.pos[sid] = cell
            self.occ[cell[0] - self.ox, cell[1] - self.oy] = 1
        self.moves: list[Move] = []
        self._topo = None
        self._cutcap = None

    # -- coordinates ----------------------------------------------------
    def local(self, cell: Cell) -> tuple[int, int]:
        return cell[0] - self.ox, cell[1] - self.oy

    def world(self, gx: int, gy: int) -> Cell:
        return gx + self.ox, gy + self.oy

    def occupied(self, cell: Cell) -> bool:
        gx, gy = self.local(cell)
        if 0 <= gx < self.occ.shape[0] and 0 <= gy < self.occ.shape[1]:
            return bool(self.occ[gx, gy])
        return False

    @property
    def n(self) -> int:
        return len(self.at)

    def root_square(self) -> Cell:
        return min(self.at, key=lambda c: (c[1], c[0]))

    # -- mutation -------------------------------------------------------
    def do(self, cell: Cell, code: str) -> Cell:
        """Apply a move assumed legal; returns the destination cell."""
        ci = CODES.index(code)
        dst = (cell[0] + int(_NET[ci, 0]), cell[1] + int(_NET[ci, 1]))
        gx, gy = self.local(cell)
        tx, ty = self.local(dst)
        assert self.occ[gx, gy] == 1 and self.occ[tx, ty] == 0, (cell, code)
        self.occ[gx, gy] = 0
        self.occ[tx, ty] = 1
        sid = self.at.pop(cell)
        self.at[dst] = sid
        self.pos[sid] = dst
        self.moves.append(Move(cell[0], cell[1], code))
        self._topo = None
        self._cutcap = None
        return dst

    def snapshot(self) -> Configuration:
        return Configuration(self.at.keys(), self.at)

    # -- cached per-state analyses ---------------------------------------
    def topo(self):
        """Decomposition labels plus tree structure for the current state."""
        if self._topo is None:
            labels = K.decompose_labels(self.occ)
            chunk1, chunk2, loose_of, link_of, n_chunks, n_links, fragile = labels
            rx, ry = self.local(self.root_square())
            parent, root, n_edges, sizes = K.tree_structure(
                self.occ, chunk1, chunk2, loose_of, link_of, n_chunks, n_links, rx, ry
            )
            self._topo = (
                chunk1, chunk2, loose_of, link_of,
                int(n_chunks), int(n_links), fragile,
                parent, int(root), int(n_edges), sizes,
            )
        return self._topo

    def cut_cap(self):
        if self._cutcap is None:
            rx, ry = self.local(self.root_square())
            cut, cap, seen = K.cut_and_capacity(self.occ, rx, ry)
            self._cutcap = (cut, cap)
        return self._cutcap

    def is_stable(self, cell: Cell) -> bool:
        cut, _ = self.cut_cap()
        gx, gy = self.local(cell)
        return not cut[gx, gy]

    def xy_monotone(self) -> bool:
        return bool(K.xy_monotone(self.occ))

    def box_bounds_local(self, ring: int = 1):
        bx0, by0 = self.local(self.box.origin)
        return (
            bx0 - ring,
            by0 - ring,
            bx0 + self.box.width - 1 + ring,
            by0 + self.box.height - 1 + ring,
        )


def walk(board: Board, src: Cell, dst: Cell, bounds=None, allow_drop=True,
         drop_in_box_only=True):
    """Move path for the square at src toward dst over legal single moves.

    The rest of the configuration stays static; since callers pick stable
    movers, every step of the walk keeps the whole configuration
    edge-connected. Returns ``(reached, path)``: the shortest legal path to
    dst when reachable, otherwise (if allowed) a path to the reachable cell
    closest to dst by empty-region distance, preferring progress over
    staying put. Paths are lists of Move in world coordinates.
    """
    gx, gy = board.local(src)
    tx, ty = board.local(dst)
    if bounds is None:
        bounds = board.box_bounds_local()
    x0, y0, x1, y1 = bounds
    occ = board.occ
    occ[gx, gy] = 0
    dist, via = K.walk_bfs(occ, gx, gy, x0, y0, x1, y1)
    if dist[tx, ty] >= 0:
        occ[gx, gy] = 1
        return True, _rebuild(board, via, gx, gy, tx, ty)
    if not allow_drop:
        occ[gx, gy] = 1
        return False, []
    # blocked: approach ranking by 8-connected empty-region distance to dst
    appr = _approach(occ, tx, ty, x0, y0, x1, y1)
    occ[gx, gy] = 1
    if drop_in_box_only:
        bx0, by0 = board.local(board.box.origin)
        bx1, by1 = bx0 + board.box.width - 1, by0 + board.box.height - 1
    else:
        bx0, by0, bx1, by1 = x0, y0, x1, y1
    best = None
    start_score = appr[gx, gy] if appr[gx, gy] >= 0 else 10 ** 9
    for x in range(max(x0, 0), min(x1 + 1, occ.shape[0])):
        for y in range(max(y0, 0), min(y1 + 1, occ.shape[1])):
            if dist[x, y] < 0 or (x == gx and y == gy):
                continue
            if not (bx0 <= x <= bx1 and by0 <= y <= by1):
                continue
            a = appr[x, y]
            if a < 0 or a >= start_score:
                continue
            key = (a, x, y)
            if best is None or key < best:
                best = key
    if best is None:
        return False, []
    _, x, y = best
    return False, _rebuild(board, via, gx, gy, x, y)


def _rebuild(board: Board, via, sx, sy, tx, ty):
    path = []
    x, y = tx, ty
    while not (x == sx and y == sy):
        code = int(via[x, y])
        px = x - int(_NET[code, 0])
        py = y - int(_NET[code, 1])
        path.append(Move(px + board.ox, py + board.oy, CODES[code]))
        x, y = px, py
    path.reverse()
    return path


def _approach(occ, tx, ty, x0, y0, x1, y1):
    """8-connected BFS distance from the target over empty cells."""
    W, H = occ.shape
    appr = np.full((W, H), -1, dtype=np.int32)
    if occ[tx, ty]:
        return appr
    from collections import deque

    appr[tx, ty] = 0
    q = deque([(tx, ty)])
    while q:
        x, y = q.popleft()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                ax, ay = x + dx, y + dy
                if (
                    x0 <= ax <= x1
                    and y0 <= ay <= y1
                    and 0 <= ax < W
                    and 0 <= ay < H
                    and not occ[ax, ay]
                    and appr[ax, ay] < 0
                ):
                    appr[ax, ay] = appr[x, y] + 1
                    q.append((ax, ay))
    return appr


def execute(board: Board, path) -> int:
    for m in path:
        board.do(m.source, m.code)
    return len(path)
