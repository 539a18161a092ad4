"""Move legality, application, reversal, and trace verification.

A square moves either by a slide (one step along two flanking support
squares) or by a convex transition (a diagonal step around an occupied
pivot, through an empty intermediate cell). Every legal move must also
satisfy the backbone condition: the configuration minus the moving square
stays edge-connected, which is stricter than requiring connectivity only
at the endpoints. Convex transitions are atomic; they are never split
into two half-moves.

Trace text format::

    squares-trace v1
    box X Y W H          (optional; enables the in-place check)
    x y CODE             (one move per line; CODE is one of the 12 codes)
    # comment
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .grid import BoundingBox, Cell, Configuration

CODES = K.CODES
SLIDES = CODES[:4]
TRANSITIONS = CODES[4:]
LM_CODES = ("S", "W", "SW", "WS", "NW", "WN")

_NET = {c: (int(K.NET[i, 0]), int(K.NET[i, 1])) for i, c in enumerate(CODES)}
_REV = {c: CODES[K.REVERSE[i]] for i, c in enumerate(CODES)}


@dataclass(frozen=True)
class Move:
    x: int
    y: int
    code: str

    @property
    def source(self) -> Cell:
        return (self.x, self.y)

    @property
    def dest(self) -> Cell:
        dx, dy = _NET[self.code]
        return (self.x + dx, self.y + dy)

    @property
    def is_slide(self) -> bool:
        return self.code in SLIDES

    def __str__(self):
        return f"{self.x} {self.y} {self.code}"


def reverse_move(move: Move) -> Move:
    """The inverse move, anchored at the destination cell.

    Slides map to the opposite slide; a transition (d1, d2) maps to
    (opposite d2, opposite d1). reverse(reverse(m)) == m.
    """
    tx, ty = move.dest
    return Move(tx, ty, _REV[move.code])


def move_delta(code: str) -> tuple[int, int]:
    return _NET[code]


def is_legal(config: Configuration, move: Move) -> bool:
    """Full legality: free space and support, backbone, result connected.

    Raises ValueError("no square ...") when the source cell is empty.
    """
    if move.source not in config:
        raise ValueError(f"no square at {move.source}")
    occ, ox, oy = config.to_grid(margin=2)
    return _legal_on_grid(occ, move.x - ox, move.y - oy, CODES.index(move.code))


def _legal_on_grid(occ, gx, gy, code) -> bool:
    if not K.move_geometry_ok(occ, gx, gy, code):
        return False
    if not K.connected_without(occ, gx, gy):
        return False
    # geometry + backbone imply the result is connected (the destination
    # keeps a support neighbor); checked defensively anyway.
    nx, ny = gx + int(K.NET[code, 0]), gy + int(K.NET[code, 1])
    occ[gx, gy] = 0
    adjacent = (
        occ[nx + 1, ny] or occ[nx - 1, ny] or occ[nx, ny + 1] or occ[nx, ny - 1]
    )
    occ[gx, gy] = 1
    return bool(adjacent)


def apply_move(config: Configuration, move: Move) -> Configuration:
    """Apply a legal move, carrying the square's identity to the new cell."""
    if not is_legal(config, move):
        raise ValueError(f"illegal move {move}")
    src, dst = move.source, move.dest
    ids = config.ids
    ids[dst] = ids.pop(src)
    cells = set(config.cells)
    cells.discard(src)
    cells.add(dst)
    return Configuration(cells, ids)


def enumerate_legal_moves(config: Configuration) -> list[Move]:
    """All legal moves, ordered by (x, y) then direction-code order."""
    occ, ox, oy = config.to_grid(margin=2)
    cut, _, _ = K.cut_and_capacity(occ, *_root_local(config, ox, oy))
    result = []
    for x, y in sorted(config.cells):
        gx, gy = x - ox, y - oy
        if cut[gx, gy]:
            continue
        for ci, code in enumerate(CODES):
            if K.move_geometry_ok(occ, gx, gy, ci):
                result.append(Move(x, y, code))
    return result


def _root_local(config: Configuration, ox: int, oy: int) -> tuple[int, int]:
    rx, ry = config.root_square()
    return rx - ox, ry - oy


@dataclass
class Trace:
    initial: Configuration
    moves: list[Move] = field(default_factory=list)
    box: Optional[BoundingBox] = None

    def __len__(self):
        return len(self.moves)

    def final(self) -> Configuration:
        cfg = self.initial
        cells = set(cfg.cells)
        ids = cfg.ids
        for m in self.moves:
            src, dst = m.source, m.dest
            ids[dst] = ids.pop(src)
            cells.discard(src)
            cells.add(dst)
        return Configuration(cells, ids)

    def reversed(self) -> "Trace":
        """The backward trace from the final configuration to the initial."""
        return Trace(
            self.final(),
            [reverse_move(m) for m in reversed(self.moves)],
            self.box,
        )


@dataclass
class VerifyReport:
    ok: bool
    failure_index: Optional[int] = None
    failure_kind: Optional[str] = None
    slides: int = 0
    transitions: int = 0

    @property
    def total(self) -> int:
        return self.slides + self.transitions


_KINDS = {
    1: "free-space",
    2: "backbone",
    3: "disconnection",
    4: "out-of-ring",
    5: "duplicate-cell",
}


def verify_trace(trace: Trace, target: Optional[Configuration] = None) -> VerifyReport:
    """Replay a trace, validating every move; never raises for bad traces.

    With a declared box, every intermediate state must keep all squares
    inside the box except at most one in the surrounding 1-cell ring. With
    a target, the final configuration must match it exactly (same
    coordinates).
    """
    cfg = trace.initial
    bb = cfg.bounding_box()
    span = bb if trace.box is None else bb.union(trace.box)
    # grid must cover everything the trace can touch
    margin = 2
    for m in trace.moves:
        for cx, cy in (m.source, m.dest):
            margin = max(
                margin,
                span.x - cx + 2,
                span.y - cy + 2,
                cx - (span.x + span.width) + 3,
                cy - (span.y + span.height) + 3,
            )
    ox, oy = span.x - margin, span.y - margin
    occ = np.zeros(
        (span.width + 2 * margin, span.height + 2 * margin), dtype=np.uint8
    )
    for x, y in cfg.cells:
        occ[x - ox, y - oy] = 1
    mv = np.empty((len(trace.moves), 3), dtype=np.int32)
    for i, m in enumerate(trace.moves):
        mv[i, 0] = m.x - ox
        mv[i, 1] = m.y - oy
        mv[i, 2] = CODES.index(m.code)
    if trace.box is not None:
        b = trace.box
        status, idx, slides, transitions = K.replay(
            occ, mv, b.x - ox, b.y - oy,
            b.x + b.width - 1 - ox, b.y + b.height - 1 - oy, True,
        )
    else:
        status, idx, slides, transitions = K.replay(occ, mv, 0, 0, 0, 0, False)
    if status != 0:
        return VerifyReport(
            False,
            int(idx) if idx >= 0 else 0,
            _KINDS[int(status)],
            int(slides),
            int(transitions),
        )
    if target is not None:
        final_cells = {
            (x + ox, y + oy)
            for x in range(occ.shape[0])
            for y in range(occ.shape[1])
            if occ[x, y]
        }
        if final_cells != set(target.cells):
            return VerifyReport(
                False, len(trace.moves), "target-mismatch", int(slides), int(transitions)
            )
    return VerifyReport(True, None, None, int(slides), int(transitions))


def emit_trace(trace: Trace) -> str:
    lines = ["squares-trace v1"]
    if trace.box is not None:
        b = trace.box
        lines.append(f"box {b.x} {b.y} {b.width} {b.height}")
    lines.extend(str(m) for m in trace.moves)
    return "\n".join(lines) + "\n"


def parse_trace(text: str, initial: Configuration) -> Trace:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != "squares-trace v1":
        raise ValueError("not a squares-trace v1 file")
    box = None
    moves = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "box":
            if len(parts) != 5:
                raise ValueError(f"bad box line: {ln!r}")
            x, y, w, h = map(int, parts[1:])
            box = BoundingBox(x, y, w, h)
            continue
        if len(parts) != 3 or parts[2] not in CODES:
            raise ValueError(f"bad move line: {ln!r}")
        moves.append(Move(int(parts[0]), int(parts[1]), parts[2]))
    return Trace(initial, moves, box)
