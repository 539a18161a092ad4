"""Chunks, links, connectors, and the component tree.

A chunk is an inclusion-maximal set of squares bounded by (and including)
a simple adjacency cycle of length >= 4, together with everything the
cycle encloses and any attached degree-1 loose squares. A link is a
connected component of squares in no chunk. The component tree connects
chunks and links that share a square or have edge-adjacent squares, rooted
at the component holding the leftmost square of the bottom row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .grid import Cell, Configuration


@dataclass(frozen=True)
class Chunk:
    cells: frozenset
    cycle: tuple
    interior: frozenset
    loose: frozenset
    solid: bool

    @property
    def size(self) -> int:
        return len(self.cells)

    @property
    def core(self) -> frozenset:
        return self.cells - self.loose


@dataclass(frozen=True)
class Link:
    cells: frozenset

    @property
    def size(self) -> int:
        return len(self.cells)


Node = Union[Chunk, Link]


@dataclass
class ComponentTree:
    nodes: list
    root: int
    parent: list
    children: list
    connectors: dict  # chunk node index -> sorted tuple of connector cells

    def leaves(self) -> list[int]:
        return [i for i, ch in enumerate(self.children) if not ch]

    def is_chunk(self, i: int) -> bool:
        return isinstance(self.nodes[i], Chunk)

    def node_of(self, cell: Cell) -> int:
        for i, node in enumerate(self.nodes):
            if cell in node.cells:
                return i
        raise KeyError(cell)

    def leaf_connector(self, i: int) -> Optional[Cell]:
        """The unique connector of a leaf chunk, or None for a lone node."""
        if not self.is_chunk(i):
            raise ValueError("not a chunk node")
        cells = self.connectors.get(i, ())
        if not cells:
            return None
        if self.parent[i] is None:
            return min(cells)
        parent_cells = self.nodes[self.parent[i]].cells
        toward = [
            c
            for c in cells
            if c in parent_cells
            or any(n in parent_cells for n in _neighbors4(c))
        ]
        return min(toward) if toward else min(cells)


def _neighbors4(cell: Cell):
    x, y = cell
    return ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))


def trace_boundary_cycle(core: frozenset) -> tuple:
    """Outer boundary of a chunk core as an ordered cell cycle.

    A right-hand wall follower over edge adjacency, starting at the
    bottom-left-most cell heading east; for the 2-connected cores produced
    by decomposition this walks the outer face, a simple cycle.
    """
    if len(core) == 1:
        return (next(iter(core)),)
    start = min(core, key=lambda c: (c[1], c[0]))
    compass = ((0, 1), (1, 0), (0, -1), (-1, 0))  # N E S W, clockwise
    cycle = [start]
    cur = start
    heading = 1  # east
    guard = 4 * len(core) + 8
    while guard:
        guard -= 1
        nxt = None
        for turn in (1, 0, 3, 2):  # right, straight, left, back
            h = (heading + turn) % 4
            cand = (cur[0] + compass[h][0], cur[1] + compass[h][1])
            if cand in core:
                nxt = cand
                heading = h
                break
        if nxt is None or nxt == start:
            return tuple(cycle)
        cycle.append(nxt)
        cur = nxt
    return tuple(cycle)


def _decompose_grid(config: Configuration):
    occ, ox, oy = config.to_grid(margin=1)
    labels = K.decompose_labels(occ)
    return occ, ox, oy, labels


def decompose(config: Configuration):
    """Split a configuration into chunks and links.

    Returns (chunks, links); a square shared by two chunks appears in both
    (it is a connector), loose squares belong to their chunk, every other
    square is in exactly one link.
    """
    occ, ox, oy, labels = _decompose_grid(config)
    return _materialize(occ, ox, oy, labels)


def component_tree(config: Configuration) -> ComponentTree:
    occ, ox, oy, labels = _decompose_grid(config)
    chunk1, chunk2, loose_of, link_of, n_chunks, n_links, fragile = labels
    rx, ry = config.root_square()
    parent_arr, root, n_edges, _sizes = K.tree_structure(
        occ, chunk1, chunk2, loose_of, link_of, n_chunks, n_links, rx - ox, ry - oy
    )
    chunks, links = _materialize(occ, ox, oy, labels)
    nodes: list = list(chunks) + list(links)
    n_nodes = len(nodes)
    parent = [None if parent_arr[i] < 0 else int(parent_arr[i]) for i in range(n_nodes)]
    children = [[] for _ in range(n_nodes)]
    for i in range(n_nodes):
        if parent[i] is not None:
            children[parent[i]].append(i)
    connectors = {}
    for i, node in enumerate(nodes):
        if not isinstance(node, Chunk):
            continue
        conn = set()
        others = [nodes[j].cells for j in range(n_nodes) if j != i]
        for c in node.core:
            if any(c in cells for cells in others):
                conn.add(c)
                continue
            for nb in _neighbors4(c):
                if nb in config and nb not in node.cells:
                    conn.add(c)
                    break
        connectors[i] = tuple(sorted(conn))
    return ComponentTree(nodes, int(root), parent, children, connectors)


def _materialize(occ, ox, oy, labels):
    chunk1, chunk2, loose_of, link_of, n_chunks, n_links, fragile = labels
    W, H = occ.shape
    chunk_core = [set() for _ in range(n_chunks)]
    chunk_loose = [set() for _ in range(n_chunks)]
    link_cells = [set() for _ in range(n_links)]
    for x in range(W):
        for y in range(H):
            if not occ[x, y]:
                continue
            cell = (x + ox, y + oy)
            if chunk1[x, y] >= 0:
                chunk_core[chunk1[x, y]].add(cell)
                if chunk2[x, y] >= 0:
                    chunk_core[chunk2[x, y]].add(cell)
            elif loose_of[x, y] >= 0:
                chunk_loose[loose_of[x, y]].add(cell)
            else:
                link_cells[link_of[x, y]].add(cell)
    chunks = []
    for i in range(n_chunks):
        core = frozenset(chunk_core[i])
        cycle = trace_boundary_cycle(core)
        chunks.append(
            Chunk(
                cells=core | frozenset(chunk_loose[i]),
                cycle=cycle,
                interior=core - set(cycle),
                loose=frozenset(chunk_loose[i]),
                solid=not bool(fragile[i]),
            )
        )
    links = [Link(frozenset(c)) for c in link_cells]
    return chunks, links


def classify_square(config: Configuration, cell: Cell) -> str:
    """"cut" if removing the square disconnects the configuration."""
    if cell not in config:
        raise ValueError(f"no square at {cell}")
    if len(config) == 1:
        return "stable"
    occ, ox, oy = config.to_grid(margin=1)
    return "stable" if K.connected_without(occ, cell[0] - ox, cell[1] - oy) else "cut"


def capacity(
    config: Configuration,
    cell: Cell,
    perimeter: Optional[int] = None,
) -> tuple[frozenset, bool]:
    """Descendant squares of a cut square and its light/heavy status.

    D is the union of the connected components of C minus the square that
    do not contain the root square; the square is light when |D| is below
    the bounding-box perimeter (pass the pipeline's frozen perimeter to
    override).
    """
    if classify_square(config, cell) == "stable":
        raise ValueError(f"{cell} is not a cut square")
    if perimeter is None:
        perimeter = config.bounding_box().perimeter
    root = config.root_square()
    remaining = set(config.cells)
    remaining.discard(cell)
    if cell == root:
        reached = set()
    else:
        reached = {root}
        stack = [root]
        while stack:
            c = stack.pop()
            for nb in _neighbors4(c):
                if nb in remaining and nb not in reached:
                    reached.add(nb)
                    stack.append(nb)
    descendants = frozenset(remaining - reached)
    return descendants, len(descendants) < perimeter
