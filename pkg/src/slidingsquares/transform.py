"""Phase 3: transforming between xy-monotone configurations, and the full
source-to-target pipeline.

The bridge walks one square at a time: the bottommost source square of
maximum potential (x + y) moves along the boundary to the topmost missing
target cell of minimum potential. Removing the chosen square and filling
the chosen cell both preserve xy-monotonicity, so every intermediate state
stays connected and each square moves at most once.

The full pipeline runs seed/gather/compact on both endpoints, bridges the
two monotone forms, and replays the target side backwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .grid import BoundingBox, Configuration, is_xy_monotone
from .moves import Move, Trace, reverse_move
from ._board import Board, execute, walk
from .gather import GatherLog, run_gather, run_seed
from .compact import CompactLog, run_compact

# Calibration knob: a full reconfiguration is expected to use at most
# TOTAL_MOVE_FACTOR * max(P, P') * n moves.
TOTAL_MOVE_FACTOR = 8


@dataclass
class PhaseCounts:
    seed: int = 0
    gather: int = 0
    compact: int = 0

    @property
    def total(self) -> int:
        return self.seed + self.gather + self.compact


@dataclass
class Plan:
    initial: Configuration
    target: Configuration
    source_trace: Trace
    target_trace: Trace
    bridge_moves: list
    box: BoundingBox
    source_counts: PhaseCounts
    target_counts: PhaseCounts

    @property
    def bridge_count(self) -> int:
        return len(self.bridge_moves)

    @property
    def total_moves(self) -> int:
        return (
            len(self.source_trace.moves)
            + len(self.bridge_moves)
            + len(self.target_trace.moves)
        )

    def full_trace(self) -> Trace:
        moves = list(self.source_trace.moves)
        moves.extend(self.bridge_moves)
        moves.extend(reverse_move(m) for m in reversed(self.target_trace.moves))
        return Trace(self.initial, moves, self.box)


def potential(cell) -> int:
    return cell[0] + cell[1]


def transform_monotone(m1: Configuration, m2: Configuration) -> list[Move]:
    """Moves turning one xy-monotone configuration into another.

    Both must be normalized to the origin and have equal size. Each square
    moves at most once; the untouched part stays xy-monotone throughout.
    """
    if len(m1) != len(m2):
        raise ValueError("size mismatch")
    for cfg in (m1, m2):
        bb = cfg.bounding_box()
        if (bb.x, bb.y) != (0, 0):
            raise ValueError("configurations must be normalized to the origin")
        if not is_xy_monotone(cfg):
            raise ValueError("configurations must be xy-monotone")
    if m1 == m2:
        return []
    union_box = m1.bounding_box().union(m2.bounding_box())
    board = Board(m1, box=union_box)
    target = set(m2.cells)
    guard = 2 * len(m1) + 4
    while guard:
        guard -= 1
        cur = set(board.at)
        if cur == target:
            return list(board.moves)
        src = max(cur - target, key=lambda c: (potential(c), c[0]))
        dst = min(target - cur, key=lambda c: (potential(c), c[0]))
        reached, path = walk(board, src, dst, allow_drop=False)
        if not reached:
            raise RuntimeError(f"bridge walk blocked from {src} to {dst}")
        execute(board, path)
    raise RuntimeError("bridge did not converge")


def pipeline_side(config: Configuration, box: Optional[BoundingBox] = None,
                  debug_checks: bool = False):
    """Seed/gather/compact one configuration to its xy-monotone form.

    Returns ``(trace, counts, monotone_config, gather_log, compact_log)``.
    """
    board = Board(config, box)
    counts = PhaseCounts()
    glog = GatherLog()
    clog = CompactLog()
    if not board.xy_monotone():
        if board.n < board.P and not board.occupied(board.box.origin):
            run_seed(board)
            counts.seed = len(board.moves)
        mark = len(board.moves)
        run_gather(board, glog)
        counts.gather = len(board.moves) - mark
        mark = len(board.moves)
        if not board.xy_monotone():
            run_compact(board, clog, debug_checks)
        counts.compact = len(board.moves) - mark
    trace = Trace(config, list(board.moves), board.box)
    return trace, counts, board.snapshot(), glog, clog


def reconfigure(source: Configuration, target: Configuration,
                debug_checks: bool = False) -> Plan:
    """A verified move plan turning the source into the target.

    Both configurations are aligned so their bounding-box origins sit at
    (0, 0); the in-place contract is tracked against the union of the two
    bounding boxes.
    """
    if len(source) != len(target):
        raise ValueError("size mismatch")
    src = source.normalized()
    dst = target.normalized()
    union_box = src.bounding_box().union(dst.bounding_box())
    if src == dst:
        empty = Trace(src, [], union_box)
        return Plan(src, dst, empty, Trace(dst, [], union_box), [], union_box,
                    PhaseCounts(), PhaseCounts())
    t_src, c_src, m_src, _, _ = pipeline_side(src, debug_checks=debug_checks)
    t_dst, c_dst, m_dst, _, _ = pipeline_side(dst, debug_checks=debug_checks)
    bridge = transform_monotone(m_src, m_dst)
    return Plan(src, dst, t_src, t_dst, bridge, union_box, c_src, c_dst)
