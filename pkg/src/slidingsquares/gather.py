"""Phase 1: gathering.

Light cut squares (connectors and cut squares of links whose descendant
count is below the frozen perimeter P) are resolved from the top of the
component tree downward: squares from the descendant side walk along the
boundary into one or two empty cells next to the light square, forming a
cycle that pulls it into a chunk. Resolutions repeat, always picking the
light square of maximal capacity, until every leaf of the component tree
is a chunk of size at least P (or the configuration became xy-monotone,
at which point everything stops early).

Configurations with fewer than P squares are first seeded: stable squares
walk to the west neighbor of the current root square until the origin of
the bounding box is occupied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from . import _kernels as K
from .grid import BoundingBox, Cell, Configuration, is_xy_monotone
from .moves import Trace
from ._board import Board, execute, walk

# Per-episode move allowance: episodes should stay within
# EPISODE_MOVE_FACTOR * P moves. This is a calibration knob for tests, not
# an enforced limit.
EPISODE_MOVE_FACTOR = 8


class AlreadyMonotone(Exception):
    """Raised when gathering is requested for an xy-monotone configuration."""


@dataclass
class GatherEpisode:
    square_id: int
    cell: Cell
    targets: tuple
    moves: int
    success: bool


@dataclass
class GatherLog:
    episodes: list = field(default_factory=list)
    early_exit: bool = False
    reselections: int = 0

    @property
    def total_moves(self) -> int:
        return sum(e.moves for e in self.episodes)

    def selected_ids(self) -> list[int]:
        return [e.square_id for e in self.episodes]


def _neighbors8(cell: Cell):
    x, y = cell
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx or dy:
                yield (x + dx, y + dy)


def _core_ids(labels, gx, gy):
    chunk1, chunk2 = labels[0], labels[1]
    ids = set()
    if chunk1[gx, gy] >= 0:
        ids.add(int(chunk1[gx, gy]))
    if chunk2[gx, gy] >= 0:
        ids.add(int(chunk2[gx, gy]))
    return ids


def _target_cells_board(board: Board, s: Cell):
    """Candidate fill cells for a light square, root-side merges first.

    Returns a tuple of one or two cells to fill (alternating singles or a
    dependent pair), or None when no fill can put the square on a new
    cycle. Fills must be empty, inside the frozen box, and on the outside
    region (cells in holes are unreachable for walkers).
    """
    occ = board.occ
    out = K.outside_mask(occ)
    cands = []
    for c in sorted(_neighbors8(s)):
        if not board.box.contains(c):
            continue
        gx, gy = board.local(c)
        if occ[gx, gy] or not out[gx, gy]:
            continue
        cands.append(c)
    if not cands:
        return None
    sgx, sgy = board.local(s)
    rx, ry = board.local(board.root_square())
    dmask = K.descendants_mask(occ, rx, ry, sgx, sgy)

    def evaluate(fills):
        for f in fills:
            fx, fy = board.local(f)
            occ[fx, fy] = 1
        labels = K.decompose_labels(occ)
        common = _core_ids(labels, sgx, sgy)
        for f in fills:
            fx, fy = board.local(f)
            common &= _core_ids(labels, fx, fy)
        upward = False
        if common:
            chunk1, chunk2 = labels[0], labels[1]
            fill_local = {board.local(f) for f in fills}
            W, H = occ.shape
            for x in range(W):
                if upward:
                    break
                for y in range(H):
                    if not occ[x, y] or dmask[x, y] or (x, y) in fill_local:
                        continue
                    if x == sgx and y == sgy:
                        continue
                    if chunk1[x, y] in common or chunk2[x, y] in common:
                        upward = True
                        break
        for f in fills:
            fx, fy = board.local(f)
            occ[fx, fy] = 0
        return (bool(common), upward)

    singles_up, singles_down = [], []
    for e in cands:
        ok, up = evaluate((e,))
        if ok:
            (singles_up if up else singles_down).append(e)
    if singles_up:
        rest = singles_up[1:] + singles_down
        return (singles_up[0], rest[0] if rest else None)
    pairs_up, pairs_down = [], []
    for e, f in combinations(cands, 2):
        ok, up = evaluate((e, f))
        if ok:
            (pairs_up if up else pairs_down).append((e, f))
    if pairs_up:
        return pairs_up[0]
    if singles_down:
        rest = singles_down[1:]
        return (singles_down[0], rest[0] if rest else None)
    if pairs_down:
        return pairs_down[0]
    return None


def _light_list(board: Board):
    """Light cut squares (connectors or in-link), by decreasing capacity."""
    labels = board.topo()
    cut, cap = board.cut_cap()
    arr = K.light_candidates(
        board.occ, labels[0], labels[1], labels[2], labels[3], cut, cap, board.P
    )
    lights = [
        (int(arr[i, 2]), board.world(int(arr[i, 0]), int(arr[i, 1])))
        for i in range(arr.shape[0])
    ]
    lights.sort(key=lambda t: (-t[0], t[1]))
    return lights


def _is_light_cut(board: Board, s: Cell) -> bool:
    if s not in board.at:
        return False
    return any(cell == s for _, cell in _light_list(board))


def _descendant_ids(board: Board, s: Cell) -> set:
    sgx, sgy = board.local(s)
    rx, ry = board.local(board.root_square())
    dmask = K.descendants_mask(board.occ, rx, ry, sgx, sgy)
    W, H = board.occ.shape
    out = set()
    for x in range(W):
        for y in range(H):
            if dmask[x, y]:
                out.add(board.at[board.world(x, y)])
    return out


def _resolved(board: Board, s: Cell, d0_ids: set) -> bool:
    """Episode success: squares from the descendant side were pulled into
    a chunk that also holds s and a square from the root side."""
    if s not in board.at:
        return True
    labels = board.topo()
    sgx, sgy = board.local(s)
    ids = _core_ids(labels, sgx, sgy)
    if not ids:
        return False
    chunk1, chunk2, loose_of = labels[0], labels[1], labels[2]
    W, H = board.occ.shape
    for cid in ids:
        has_desc = False
        has_root = False
        for x in range(W):
            for y in range(H):
                if not board.occ[x, y] or (x == sgx and y == sgy):
                    continue
                if chunk1[x, y] == cid or chunk2[x, y] == cid or loose_of[x, y] == cid:
                    if board.at[board.world(x, y)] in d0_ids:
                        has_desc = True
                    else:
                        has_root = True
                    if has_desc and has_root:
                        return True
    return False


def _movers(board: Board, s: Cell, pending):
    """Stable boundary squares among the descendants of s, preferring ones
    clear of the light square and the pending fill cells."""
    occ = board.occ
    out = K.outside_mask(occ)
    cut, _ = board.cut_cap()
    rx, ry = board.local(board.root_square())
    sgx, sgy = board.local(s)
    dmask = K.descendants_mask(occ, rx, ry, sgx, sgy)
    W, H = occ.shape
    result = []
    avoid = set()
    for t in pending:
        avoid.update(_neighbors8(t))
        avoid.add(t)
    for x in range(W):
        for y in range(H):
            if not occ[x, y] or not dmask[x, y] or cut[x, y]:
                continue
            boundary = False
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    if out[x + dx, y + dy]:
                        boundary = True
                        break
                if boundary:
                    break
            if not boundary:
                continue
            cell = board.world(x, y)
            near_s = abs(cell[0] - s[0]) + abs(cell[1] - s[1]) == 1
            pref = 1 if (near_s or cell in avoid) else 0
            result.append((pref, cell))
    result.sort()
    return [c for _, c in result]


def _resolve_board(board: Board, s: Cell, log: GatherLog) -> bool:
    sid = board.at[s]
    start_len = len(board.moves)
    d0_ids = _descendant_ids(board, s)
    success = False
    rounds = 0
    targets_seen = []
    while rounds < 8 and not success:
        rounds += 1
        if board.xy_monotone():
            break
        if not _is_light_cut(board, s):
            success = True
            break
        if _resolved(board, s, d0_ids):
            success = True
            break
        tc = _target_cells_board(board, s)
        if tc is None:
            break
        targets_seen.append(tc)
        pending = [e for e in tc if e is not None]
        moved_this_round = False
        for e in pending:
            guard = 4 * board.P + 16
            while not board.occupied(e) and guard:
                guard -= 1
                if _resolved(board, s, d0_ids):
                    success = True
                    break
                placed = False
                for a in _movers(board, s, [t for t in pending if not board.occupied(t)])[:12]:
                    reached, path = walk(board, a, e)
                    if path:
                        execute(board, path)
                        placed = True
                        moved_this_round = True
                        break
                if not placed:
                    break
            if success:
                break
            if board.occupied(e) and _resolved(board, s, d0_ids):
                success = True
                break
        if not moved_this_round and not success:
            break
    log.episodes.append(
        GatherEpisode(sid, s, tuple(targets_seen), len(board.moves) - start_len, success)
    )
    return success


def _bad_leaves(board: Board) -> bool:
    labels = board.topo()
    n_chunks, n_links = labels[4], labels[5]
    parent, sizes = labels[7], labels[10]
    n_nodes = n_chunks + n_links
    if n_nodes == 1:
        if n_chunks == 0:
            return True  # a single link must still be gathered
        return board.n < board.P and False or sizes[0] < board.P and board.n >= board.P
    has_child = [False] * n_nodes
    for i in range(n_nodes):
        p = parent[i]
        if p >= 0:
            has_child[p] = True
    if board.n < board.P:
        # light configurations gather into one chunk
        return True
    for i in range(n_nodes):
        if has_child[i]:
            continue
        if i >= n_chunks or sizes[i] < board.P:
            return True
    return False


def run_gather(board: Board, log: Optional[GatherLog] = None) -> GatherLog:
    if log is None:
        log = GatherLog()
    resolved: set[int] = set()
    skipped: set[int] = set()
    allow_reselect = False
    budget = 16 * board.P * board.n + 1024
    start = len(board.moves)
    while len(board.moves) - start < budget:
        if board.xy_monotone():
            log.early_exit = True
            break
        if not _bad_leaves(board):
            break
        picked = None
        for _, cell in _light_list(board):
            sid = board.at[cell]
            if sid in skipped or (sid in resolved and not allow_reselect):
                continue
            if _target_cells_board(board, cell) is not None:
                picked = cell
                break
        if picked is None:
            if not allow_reselect and resolved:
                allow_reselect = True
                continue
            break
        if board.at[picked] in resolved:
            log.reselections += 1
        success = _resolve_board(board, picked, log)
        ep = log.episodes[-1]
        if ep.moves == 0:
            # nothing changed; never pick this square again in this state
            skipped.add(ep.square_id)
        if success:
            resolved.add(ep.square_id)
            if ep.moves > 0:
                skipped.clear()
                allow_reselect = False
    else:
        raise RuntimeError("gather exceeded its move budget")
    return log


def run_seed(board: Board) -> None:
    """Walk stable squares to the west of the root square until the origin
    of the frozen box is occupied (light-configuration preprocessing)."""
    origin = board.box.origin
    guard = 4 * board.P + 16
    while not board.occupied(origin) and guard:
        guard -= 1
        if board.xy_monotone():
            return
        root = board.root_square()
        e = (root[0] - 1, root[1])
        occ = board.occ
        out = K.outside_mask(occ)
        cut, _ = board.cut_cap()
        labels = board.topo()
        chunk1 = labels[0]
        # preference: link-leaf (degree 1) squares, then extremal chunk
        # squares, then any stable boundary square; never the root, never
        # the already-seeded bottom row
        cands = []
        for cell in board.at:
            if cell == root or cell[1] == board.box.y:
                continue
            gx, gy = board.local(cell)
            if cut[gx, gy]:
                continue
            if not any(
                out[gx + dx, gy + dy] for dx in (-1, 0, 1) for dy in (-1, 0, 1)
            ):
                continue
            deg = sum(
                1
                for nb in ((cell[0] + 1, cell[1]), (cell[0] - 1, cell[1]),
                           (cell[0], cell[1] + 1), (cell[0], cell[1] - 1))
                if nb in board.at
            )
            pref = 0 if deg == 1 else (1 if chunk1[gx, gy] >= 0 else 2)
            cands.append((pref, cell))
        cands.sort()
        placed = False
        for _, a in cands:
            reached, path = walk(board, a, e, allow_drop=False)
            if reached:
                execute(board, path)
                placed = True
                break
        if not placed:
            for _, a in cands:
                reached, path = walk(board, a, e)
                if path:
                    execute(board, path)
                    placed = True
                    break
        if not placed:
            raise RuntimeError("seeding stuck: no stable square can reach the origin row")
    if not board.occupied(origin) and not board.xy_monotone():
        raise RuntimeError("seeding failed to occupy the origin")


# -- public operations -------------------------------------------------


def target_cells(config: Configuration, cell: Cell,
                 box: Optional[BoundingBox] = None):
    """The one or two empty cells whose filling pulls a light square into a
    chunk, or None when the square is already as chunked as fills allow."""
    if is_xy_monotone(config):
        raise AlreadyMonotone("configuration is already xy-monotone")
    board = Board(config, box)
    return _target_cells_board(board, cell)


def resolve_light_square(config: Configuration, cell: Cell,
                         box: Optional[BoundingBox] = None) -> Trace:
    """Run one gathering episode for the given light square."""
    board = Board(config, box)
    log = GatherLog()
    _resolve_board(board, cell, log)
    return Trace(config, board.moves, board.box)


def gather(config: Configuration, box: Optional[BoundingBox] = None,
           log: Optional[GatherLog] = None) -> Trace:
    """Gather until every component-tree leaf is a chunk of size >= P."""
    board = Board(config, box)
    run_gather(board, log if log is not None else GatherLog())
    return Trace(config, board.moves, board.box)


def seed_origin(config: Configuration, box: Optional[BoundingBox] = None) -> Trace:
    """Occupy the bounding-box origin of a light configuration."""
    board = Board(config, box)
    if not board.occupied(board.box.origin) and not board.xy_monotone():
        run_seed(board)
    return Trace(config, board.moves, board.box)
