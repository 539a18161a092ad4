"""Phase 2: compaction.

Squares of heavy leaf chunks move toward the origin with three kinds of
composite moves, tried in priority order:

* LM moves: single S/W slides or SW/WS/NW/WN transitions that stay inside
  the frozen box and keep every square of the acting chunk in one chunk
  (loose membership counts: a mover may land as a degree-1 square attached
  to the chunk, which the final histogram-shedding steps rely on).
* Corner moves: two slides filling a concave corner whose three neighbors
  are consecutive on the chunk's boundary cycle.
* Chain moves: a bottom-row (or leftmost-column) square exits the box,
  slides along the 1-cell ring, and re-enters at the closest empty cell
  nearer the origin, preceded by a loose-square slide when the landing
  would otherwise create a link.

Every composite strictly decreases the score d = sum of (2x + y) over all
squares relative to the origin, so compaction terminates; it stops as soon
as the configuration is xy-monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .grid import BoundingBox, Cell, Configuration, is_left_aligned_histogram, is_double_gamma
from .moves import CODES, Move, Trace
from .topology import Chunk, trace_boundary_cycle
from ._board import Board

# Calibration knob: compaction is expected to finish within
# COMPACT_MOVE_FACTOR * n * P moves.
COMPACT_MOVE_FACTOR = 4

LM_ORDER = ("SW", "WS", "W", "S", "NW", "WN")
LM_DELTA = {"S": -1, "W": -2, "SW": -3, "WS": -3, "NW": -1, "WN": -1}


@dataclass(frozen=True)
class CompactMove:
    kind: str  # "LM", "top-corner", "bottom-corner", "chain"
    moves: tuple
    # acting chunk: the lexicographically smallest member cell from the
    # public enumerators, or the per-state integer label inside engine logs
    chunk_id: object

    def score_delta(self) -> int:
        d = 0
        for m in self.moves:
            sx, sy = m.source
            tx, ty = m.dest
            d += (2 * tx + ty) - (2 * sx + sy)
        return d


@dataclass
class CompactLog:
    composites: list = field(default_factory=list)
    chain_counts: dict = field(default_factory=dict)
    early_exit: bool = False
    stuck_violations: list = field(default_factory=list)


def score(config: Configuration, origin: Optional[Cell] = None) -> int:
    """d = sum over squares of 2x + y, relative to the origin."""
    if origin is None:
        origin = config.bounding_box().origin
    ox, oy = origin
    return sum(2 * (x - ox) + (y - oy) for x, y in config.cells)


def _leaf_chunk_members(board: Board):
    """Chunks eligible for compaction: no other chunk below them.

    Ordinarily these are the leaf chunks of the component tree. A chunk
    whose only descendants are remnant links (the root component may stay
    a link, and re-rooting can flip such a link below the chunk) still
    compacts, so that it eventually surrounds and absorbs the remnants.
    """
    labels = board.topo()
    chunk1, chunk2, loose_of = labels[0], labels[1], labels[2]
    n_chunks, n_links = labels[4], labels[5]
    parent = labels[7]
    n_nodes = n_chunks + n_links
    has_chunk_below = [False] * n_nodes
    for j in range(n_chunks):
        p = parent[j]
        while p >= 0:
            has_chunk_below[p] = True
            p = parent[p]
    leaf_ids = [i for i in range(n_chunks) if not has_chunk_below[i]]
    out = []
    W, H = board.occ.shape
    for cid in leaf_ids:
        core, loose = [], []
        for x in range(W):
            for y in range(H):
                if chunk1[x, y] == cid or chunk2[x, y] == cid:
                    core.append(board.world(x, y))
                elif loose_of[x, y] == cid:
                    loose.append(board.world(x, y))
        members = core + loose
        out.append((min(members), members, core))
    out.sort(key=lambda t: t[0])
    return out


def _members_array(board: Board, members):
    arr = np.empty((len(members), 2), dtype=np.int64)
    for i, c in enumerate(members):
        arr[i, 0], arr[i, 1] = board.local(c)
    return arr


def _integrity(board: Board, members, swaps):
    """Apply swaps on a scratch grid; require all members in one chunk.

    ``swaps`` maps member cell -> new cell. Membership as a loose square
    counts; splitting the chunk or stranding a member in a link is what
    invalidates a move.
    """
    occ = board.occ
    flipped = []
    for src, dst in swaps.items():
        sx, sy = board.local(src)
        dx, dy = board.local(dst)
        occ[sx, sy] = 0
        occ[dx, dy] = 1
        flipped.append((sx, sy, dx, dy))
    labels = K.decompose_labels(occ)
    chunk1, chunk2, loose_of = labels[0], labels[1], labels[2]
    final = [swaps.get(c, c) for c in members]
    arr = _members_array(board, final)
    ok = bool(K.chunk_holds_cells(chunk1, chunk2, loose_of, arr, False))
    for sx, sy, dx, dy in flipped:
        occ[dx, dy] = 0
        occ[sx, sy] = 1
    return ok


def _geometry_ok(board: Board, cell: Cell, code: str) -> bool:
    gx, gy = board.local(cell)
    return bool(K.move_geometry_ok(board.occ, gx, gy, CODES.index(code)))


def _lm_candidates(board: Board, leaf, collect_all=False):
    cid, members, _core = leaf
    cut, _ = board.cut_cap()
    raw = []
    for cell in members:
        gx, gy = board.local(cell)
        if cut[gx, gy]:
            continue
        for code in LM_ORDER:
            ci = CODES.index(code)
            dst = (cell[0] + int(K.NET[ci, 0]), cell[1] + int(K.NET[ci, 1]))
            if not board.box.contains(dst):
                continue
            if not K.move_geometry_ok(board.occ, gx, gy, ci):
                continue
            raw.append((LM_DELTA[code], cell[0], cell[1], CODES.index(code), cell, code, dst))
    raw.sort()
    found = []
    for _, _, _, _, cell, code, dst in raw:
        if _integrity(board, members, {cell: dst}):
            cm = CompactMove("LM", (Move(cell[0], cell[1], code),), cid)
            if not collect_all:
                return [cm]
            found.append(cm)
    return found


def _corner_candidates(board: Board, leaf, collect_all=False):
    cid, members, core = leaf
    cycle = trace_boundary_cycle(frozenset(core))
    n = len(cycle)
    if n < 4:
        return []
    corners = {}
    for i in range(n):
        for step in (1, -1):
            a = cycle[i]
            b = cycle[(i + step) % n]
            c = cycle[(i + 2 * step) % n]
            # top corner: neighbors N, NE, E of the empty cell
            if b == (a[0] + 1, a[1]) and c == (b[0], b[1] - 1):
                s = (a[0], a[1] - 1)
                if not board.occupied(s) and board.box.contains(s):
                    corners.setdefault((s, "top-corner"), (a, b, c))
            # bottom corner: neighbors S, SE, E
            if b == (a[0] + 1, a[1]) and c == (b[0], b[1] + 1):
                s = (a[0], a[1] + 1)
                if not board.occupied(s) and board.box.contains(s):
                    corners.setdefault((s, "bottom-corner"), (a, b, c))
    found = []
    for (s, kind), (b1, b2, b3) in sorted(corners.items()):
        into = "S" if kind == "top-corner" else "N"
        variants = (
            ((b1, into), (b2, "W")),
            ((b3, "W"), (b2, into)),
        )
        for first, second in variants:
            cm = _try_composite(
                board, members, cid, kind,
                [Move(first[0][0], first[0][1], first[1]),
                 Move(second[0][0], second[0][1], second[1])],
            )
            if cm is not None:
                found.append(cm)
                if not collect_all:
                    return found
                break
    return found


def _try_composite(board, members, cid, kind, moves):
    """Validate a multi-move composite: per-move legality on the evolving
    grid, then chunk integrity of the final state."""
    occ = board.occ
    done = []
    ok = True
    for m in moves:
        gx, gy = board.local(m.source)
        ci = CODES.index(m.code)
        if (
            not (0 <= gx < occ.shape[0] and 0 <= gy < occ.shape[1])
            or not occ[gx, gy]
            or not K.move_geometry_ok(occ, gx, gy, ci)
            or not K.connected_without(occ, gx, gy)
        ):
            ok = False
            break
        tx, ty = board.local(m.dest)
        occ[gx, gy] = 0
        occ[tx, ty] = 1
        done.append((gx, gy, tx, ty))
    if ok:
        # figure out the final cell of every member
        swaps = {}
        pos = {c: c for c in members}
        tracked = dict(pos)
        for m in moves:
            src, dst = m.source, m.dest
            owner = None
            for orig, cur in tracked.items():
                if cur == src:
                    owner = orig
                    break
            if owner is not None:
                tracked[owner] = dst
        swaps = {o: c for o, c in tracked.items() if o != c}
        labels = K.decompose_labels(occ)
        chunk1, chunk2, loose_of = labels[0], labels[1], labels[2]
        final = list(tracked.values())
        arr = _members_array(board, final)
        ok = bool(K.chunk_holds_cells(chunk1, chunk2, loose_of, arr, False))
    for gx, gy, tx, ty in reversed(done):
        occ[tx, ty] = 0
        occ[gx, gy] = 1
    if not ok:
        return None
    return CompactMove(kind, tuple(moves), cid)


def _chain_candidates(board: Board, leaf, collect_all=False):
    cid, members, _core = leaf
    cut, _ = board.cut_cap()
    bx, by = board.box.x, board.box.y
    member_set = set(members)
    found = []

    def degree(cell):
        return sum(1 for nb in ((cell[0] + 1, cell[1]), (cell[0] - 1, cell[1]),
                                (cell[0], cell[1] + 1), (cell[0], cell[1] - 1))
                   if board.occupied(nb))

    # bottom-row chains (SW out, W along the ring, WN back in)
    for cell in sorted(c for c in member_set if c[1] == by):
        gx, gy = board.local(cell)
        if cut[gx, gy] or not board.occupied((cell[0] - 1, by)):
            continue
        xe = None
        x = cell[0] - 1
        while x >= bx:
            if not board.occupied((x, by)):
                xe = x
                break
            x -= 1
        if xe is None:
            continue
        moves = []
        right = (xe + 1, by)
        if right in member_set and degree(right) == 1:
            moves.append(Move(right[0], right[1], "N"))
            xe = xe + 1
        if xe > cell[0] - 2:
            continue
        moves.append(Move(cell[0], cell[1], "SW"))
        for xx in range(cell[0] - 1, xe + 1, -1):
            moves.append(Move(xx, by - 1, "W"))
        moves.append(Move(xe + 1, by - 1, "WN"))
        cm = _try_composite(board, members, cid, "chain", moves)
        if cm is not None:
            found.append(cm)
            if not collect_all:
                return found

    # leftmost-column chains (mirrored in x = y)
    for cell in sorted(c for c in member_set if c[0] == bx):
        gx, gy = board.local(cell)
        if cut[gx, gy] or not board.occupied((bx, cell[1] - 1)):
            continue
        ye = None
        y = cell[1] - 1
        while y >= by:
            if not board.occupied((bx, y)):
                ye = y
                break
            y -= 1
        if ye is None:
            continue
        moves = []
        top = (bx, ye + 1)
        if top in member_set and degree(top) == 1:
            moves.append(Move(top[0], top[1], "E"))
            ye = ye + 1
        if ye > cell[1] - 2:
            continue
        moves.append(Move(cell[0], cell[1], "WS"))
        for yy in range(cell[1] - 1, ye + 1, -1):
            moves.append(Move(bx - 1, yy, "S"))
        moves.append(Move(bx - 1, ye + 1, "SE"))
        cm = _try_composite(board, members, cid, "chain", moves)
        if cm is not None:
            found.append(cm)
            if not collect_all:
                return found
    return found


def _eligible_chunk_ids(board: Board):
    labels = board.topo()
    n_chunks, n_links = labels[4], labels[5]
    parent = labels[7]
    has_chunk_below = [False] * (n_chunks + n_links)
    for j in range(n_chunks):
        p = parent[j]
        while p >= 0:
            has_chunk_below[p] = True
            p = parent[p]
    return [i for i in range(n_chunks) if not has_chunk_below[i]]


def _find_composite(board: Board, debug_log: Optional[CompactLog] = None):
    labels = board.topo()
    chunk1, chunk2, loose_of = labels[0], labels[1], labels[2]
    cids = _eligible_chunk_ids(board)
    if not cids:
        return None
    cut, _ = board.cut_cap()
    bx0, by0, bx1, by1 = board.box_bounds_local(ring=0)
    lm_all = []
    for cid in cids:
        x, y, code = K.lm_search(
            board.occ, chunk1, chunk2, loose_of, cut, cid, bx0, by0, bx1, by1
        )
        if x >= 0:
            mv = Move(*board.world(int(x), int(y)), CODES[int(code)])
            lm_all.append((cid, mv))
    if lm_all:
        # maximal score decrease first, then lexicographic
        def key(item):
            cid, mv = item
            sx, sy = mv.source
            tx, ty = mv.dest
            return (2 * (tx - sx) + (ty - sy), mv.x, mv.y, CODES.index(mv.code))

        cid, mv = min(lm_all, key=key)
        return CompactMove("LM", (mv,), cid)
    leaves = _leaf_chunk_members(board)
    corner_all = []
    for leaf in leaves:
        got = _corner_candidates(board, leaf)
        if got:
            corner_all.append(got[0])
    if corner_all:
        corner_all.sort(key=lambda cm: (cm.moves[0].x, cm.moves[0].y, cm.kind))
        return corner_all[0]
    chain_all = []
    for leaf in leaves:
        got = _chain_candidates(board, leaf)
        if got:
            chain_all.append(got[0])
    if chain_all:
        chain_all.sort(key=lambda cm: (cm.moves[0].x, cm.moves[0].y))
        return chain_all[0]
    if debug_log is not None:
        _record_stuck_shapes(board, leaves, debug_log)
    return None




def _record_stuck_shapes(board: Board, leaves, log: CompactLog):
    """Stuck leaf chunks must outline a left-aligned histogram (with the
    origin) or a double-Gamma (without it); log any violation."""
    for cid, members, core in leaves:
        chunk_cfg = Configuration(members)
        core_cfg = Configuration(core)
        if board.box.origin in members:
            if not is_left_aligned_histogram(core_cfg):
                log.stuck_violations.append(("histogram", cid))
        elif len(leaves) > 1:
            if not is_double_gamma(chunk_cfg):
                log.stuck_violations.append(("double-gamma", cid))


def run_compact(board: Board, log: Optional[CompactLog] = None,
                debug_checks: bool = False) -> CompactLog:
    if log is None:
        log = CompactLog()
    budget = 2 * COMPACT_MOVE_FACTOR * board.n * board.P + 1024
    start = len(board.moves)
    while len(board.moves) - start < budget:
        if board.xy_monotone():
            log.early_exit = True
            return log
        cm = _find_composite(board, log if debug_checks else None)
        if cm is None:
            raise RuntimeError(
                "no LM/corner/chain move available on a non-monotone configuration"
            )
        if cm.kind == "chain":
            traveler = cm.moves[-1]
            # the traveler is the square doing the out-of-box trip; its
            # identity is the one at the first non-preamble source
            first = cm.moves[0] if cm.moves[0].code in ("SW", "WS") else cm.moves[1]
            sid = board.at[first.source]
            log.chain_counts[sid] = log.chain_counts.get(sid, 0) + 1
        for m in cm.moves:
            board.do(m.source, m.code)
        log.composites.append(cm)
    raise RuntimeError("compaction exceeded its move budget")


# -- public operations -------------------------------------------------


def _board_for(config: Configuration, box: Optional[BoundingBox]):
    return Board(config, box)


def _leaf_for_chunk(board: Board, chunk: Chunk):
    members = sorted(chunk.cells)
    core = sorted(chunk.core)
    return (min(members), members, core)


def enumerate_lm_moves(config: Configuration, chunk: Chunk,
                       box: Optional[BoundingBox] = None) -> list[CompactMove]:
    board = _board_for(config, box)
    return _lm_candidates(board, _leaf_for_chunk(board, chunk), collect_all=True)


def enumerate_corner_moves(config: Configuration, chunk: Chunk,
                           box: Optional[BoundingBox] = None) -> list[CompactMove]:
    board = _board_for(config, box)
    return _corner_candidates(board, _leaf_for_chunk(board, chunk), collect_all=True)


def enumerate_chain_moves(config: Configuration, chunk: Chunk,
                          box: Optional[BoundingBox] = None) -> list[CompactMove]:
    board = _board_for(config, box)
    return _chain_candidates(board, _leaf_for_chunk(board, chunk), collect_all=True)


def compact(config: Configuration, box: Optional[BoundingBox] = None,
            log: Optional[CompactLog] = None, debug_checks: bool = False) -> Trace:
    """Compact until xy-monotone inside the frozen box."""
    board = Board(config, box)
    run_compact(board, log if log is not None else CompactLog(), debug_checks)
    return Trace(config, board.moves, board.box)
