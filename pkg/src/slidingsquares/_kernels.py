"""Hot numeric kernels over occupancy grids.

Every kernel takes a uint8 occupancy array indexed ``occ[x, y]`` plus plain
integers, so the same source compiles under numba's nopython mode and also
runs as ordinary Python when numba is unavailable or disabled.

Set ``SLIDINGSQUARES_NO_NUMBA=1`` to force the pure-Python/numpy path
(used by the backend benchmark and as a safety hatch on platforms without
numba). ``NUMBA_ENABLED`` reports which path is active.
"""

import os

import numpy as np

_disabled = os.environ.get("SLIDINGSQUARES_NO_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

try:
    if _disabled:
        raise ImportError("numba disabled by SLIDINGSQUARES_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# Direction codes, in canonical enumeration order. Slides first, then convex
# transitions written as (first step, second step).
CODES = ("N", "E", "S", "W", "NE", "EN", "SE", "ES", "SW", "WS", "NW", "WN")
CODE_INDEX = {c: i for i, c in enumerate(CODES)}
N_SLIDES = 4

_step = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}

# Net displacement per code.
NET = np.zeros((12, 2), dtype=np.int8)
# First and second step of a transition (unused for slides).
D1 = np.zeros((12, 2), dtype=np.int8)
D2 = np.zeros((12, 2), dtype=np.int8)
for _i, _c in enumerate(CODES):
    if _i < N_SLIDES:
        NET[_i] = _step[_c]
    else:
        a, b = _step[_c[0]], _step[_c[1]]
        D1[_i] = a
        D2[_i] = b
        NET[_i] = (a[0] + b[0], a[1] + b[1])

# reverse: slides map to the opposite slide, transitions (d1, d2) to
# (opposite d2, opposite d1).
REVERSE = np.array(
    [CODE_INDEX[c] for c in ("S", "W", "N", "E",
                             "WS", "SW", "WN", "NW",
                             "EN", "NE", "ES", "SE")],
    dtype=np.int8,
)

# Lexicographically monotone move codes: S, W, SW, WS, NW, WN.
LM_CODES = np.array(
    [CODE_INDEX[c] for c in ("S", "W", "SW", "WS", "NW", "WN")], dtype=np.int8
)

EDGE4 = np.array([(0, 1), (1, 0), (0, -1), (-1, 0)], dtype=np.int8)
DIAG8 = np.array(
    [(0, 1), (1, 0), (0, -1), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)],
    dtype=np.int8,
)


@njit(cache=True)
def move_geometry_ok(occ, x, y, code):
    """Free-space and support conditions for a move, ignoring connectivity.

    For a slide the two cells flanking start and destination on one common
    perpendicular side must be occupied (either side works). For a convex
    transition the pivot (start + second step) must be occupied while the
    intermediate (start + first step) and the destination are empty.
    """
    W, H = occ.shape
    nx = x + NET[code, 0]
    ny = y + NET[code, 1]
    if nx < 0 or ny < 0 or nx >= W or ny >= H:
        return False
    if occ[nx, ny]:
        return False
    if code < 4:
        # perpendicular offsets: swap the axis of motion
        px = NET[code, 1]
        py = NET[code, 0]
        for sgn in (1, -1):
            ax, ay = x + sgn * px, y + sgn * py
            bx, by = nx + sgn * px, ny + sgn * py
            if 0 <= ax < W and 0 <= ay < H and 0 <= bx < W and 0 <= by < H:
                if occ[ax, ay] and occ[bx, by]:
                    return True
        return False
    ix, iy = x + D1[code, 0], y + D1[code, 1]
    px, py = x + D2[code, 0], y + D2[code, 1]
    if ix < 0 or iy < 0 or ix >= W or iy >= H:
        return False
    if px < 0 or py < 0 or px >= W or py >= H:
        return False
    return occ[px, py] == 1 and occ[ix, iy] == 0


@njit(cache=True)
def connected(occ):
    """True iff the occupied cells form one edge-connected component."""
    W, H = occ.shape
    total = 0
    sx = -1
    sy = -1
    for x in range(W):
        for y in range(H):
            if occ[x, y]:
                total += 1
                if sx < 0:
                    sx, sy = x, y
    if total == 0:
        return False
    seen = np.zeros((W, H), dtype=np.uint8)
    stack_x = np.empty(total, dtype=np.int32)
    stack_y = np.empty(total, dtype=np.int32)
    stack_x[0] = sx
    stack_y[0] = sy
    seen[sx, sy] = 1
    sp = 1
    count = 0
    while sp > 0:
        sp -= 1
        x, y = stack_x[sp], stack_y[sp]
        count += 1
        for k in range(4):
            ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
            if 0 <= ax < W and 0 <= ay < H and occ[ax, ay] and not seen[ax, ay]:
                seen[ax, ay] = 1
                stack_x[sp] = ax
                stack_y[sp] = ay
                sp += 1
    return count == total


@njit(cache=True)
def connected_without(occ, cx, cy):
    """Connectivity of the occupied set with one cell removed."""
    occ[cx, cy] = 0
    ok = connected(occ)
    occ[cx, cy] = 1
    return ok


@njit(cache=True)
def cut_and_capacity(occ, rx, ry):
    """Cut squares and descendant counts in one DFS from the root square.

    Returns ``(cut, cap, order)`` where ``cut[x, y]`` is 1 for squares whose
    removal disconnects the configuration, ``cap[x, y]`` is the number of
    squares in components of C minus the square that do not contain the
    root (the root square itself gets n - 1), and ``order`` is the number
    of squares reached (callers can detect disconnected input).
    """
    W, H = occ.shape
    n = int(np.sum(occ))
    NV = W * H
    disc = np.full(NV, -1, dtype=np.int32)
    low = np.empty(NV, dtype=np.int32)
    parent = np.full(NV, -1, dtype=np.int32)
    subsz = np.ones(NV, dtype=np.int64)
    cap = np.zeros((W, H), dtype=np.int64)
    cut = np.zeros((W, H), dtype=np.uint8)

    root = rx * H + ry
    stack_v = np.empty(n + 1, dtype=np.int32)
    stack_k = np.empty(n + 1, dtype=np.int32)
    sp = 0
    stack_v[0] = root
    stack_k[0] = 0
    sp = 1
    disc[root] = 0
    low[root] = 0
    timer = 1
    root_children = 0
    visited = 1
    while sp > 0:
        v = stack_v[sp - 1]
        k = stack_k[sp - 1]
        if k < 4:
            stack_k[sp - 1] = k + 1
            x, y = v // H, v % H
            ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
            if ax < 0 or ay < 0 or ax >= W or ay >= H or not occ[ax, ay]:
                continue
            u = ax * H + ay
            if disc[u] < 0:
                disc[u] = timer
                low[u] = timer
                timer += 1
                visited += 1
                parent[u] = v
                if v == root:
                    root_children += 1
                stack_v[sp] = u
                stack_k[sp] = 0
                sp += 1
            elif u != parent[v] and disc[u] < low[v]:
                low[v] = disc[u]
        else:
            sp -= 1
            p = parent[v]
            if p >= 0:
                if low[v] < low[p]:
                    low[p] = low[v]
                subsz[p] += subsz[v]
                if p != root and low[v] >= disc[p]:
                    px, py = p // H, p % H
                    cut[px, py] = 1
                    cap[px, py] += subsz[v]
    if root_children > 1:
        cut[rx, ry] = 1
    cap[rx, ry] = n - 1
    return cut, cap, visited


@njit(cache=True)
def outside_mask(occ):
    """Empty cells 8-connected to the array border (the infinite outside).

    The caller must pad the grid so the border row/column is empty; the
    complementary empty cells are exactly the holes of the configuration.
    """
    W, H = occ.shape
    out = np.zeros((W, H), dtype=np.uint8)
    stack_x = np.empty(W * H, dtype=np.int32)
    stack_y = np.empty(W * H, dtype=np.int32)
    sp = 0
    for x in range(W):
        for y in (0, H - 1):
            if not occ[x, y] and not out[x, y]:
                out[x, y] = 1
                stack_x[sp] = x
                stack_y[sp] = y
                sp += 1
    for y in range(H):
        for x in (0, W - 1):
            if not occ[x, y] and not out[x, y]:
                out[x, y] = 1
                stack_x[sp] = x
                stack_y[sp] = y
                sp += 1
    while sp > 0:
        sp -= 1
        x, y = stack_x[sp], stack_y[sp]
        for k in range(8):
            ax, ay = x + DIAG8[k, 0], y + DIAG8[k, 1]
            if 0 <= ax < W and 0 <= ay < H and not occ[ax, ay] and not out[ax, ay]:
                out[ax, ay] = 1
                stack_x[sp] = ax
                stack_y[sp] = ay
                sp += 1
    return out


@njit(cache=True)
def decompose_labels(occ):
    """Chunk/link labelling of a configuration.

    Chunks are inclusion-maximal square sets bounded by (and including) a
    simple adjacency cycle of length >= 4: every cyclic biconnected
    component plus all squares enclosed by its outer cycle, with attached
    degree-1 squares as loose members. Links are connected components of
    the remaining squares.

    Returns ``(chunk1, chunk2, loose_of, link_of, n_chunks, n_links,
    fragile)``: per-cell primary/secondary chunk id (a square shared by two
    chunks is a connector), the chunk a loose square belongs to, link ids,
    and a per-chunk flag for enclosed holes. Ids are dense and ordered by
    the lexicographically smallest member cell, so labelling is
    deterministic. Cells carry -1 where a label does not apply.
    """
    W, H = occ.shape
    NV = W * H
    n = int(np.sum(occ))

    chunk1 = np.full((W, H), -1, dtype=np.int32)
    chunk2 = np.full((W, H), -1, dtype=np.int32)
    loose_of = np.full((W, H), -1, dtype=np.int32)
    link_of = np.full((W, H), -1, dtype=np.int32)
    if n == 0:
        return chunk1, chunk2, loose_of, link_of, 0, 0, np.zeros(0, dtype=np.uint8)

    # --- biconnected components (iterative Hopcroft-Tarjan) ---
    disc = np.full(NV, -1, dtype=np.int32)
    low = np.empty(NV, dtype=np.int32)
    parent = np.full(NV, -1, dtype=np.int32)
    estack = np.empty((4 * n + 8, 2), dtype=np.int32)
    esp = 0
    # up to two cyclic-BCC ids per vertex
    b1 = np.full(NV, -1, dtype=np.int32)
    b2 = np.full(NV, -1, dtype=np.int32)
    n_bcc = 0
    stamp = np.full(NV, -1, dtype=np.int32)

    stack_v = np.empty(n + 1, dtype=np.int32)
    stack_k = np.empty(n + 1, dtype=np.int32)
    timer = 0
    for x0 in range(W):
        for y0 in range(H):
            if not occ[x0, y0]:
                continue
            root = x0 * H + y0
            if disc[root] >= 0:
                continue
            disc[root] = timer
            low[root] = timer
            timer += 1
            stack_v[0] = root
            stack_k[0] = 0
            sp = 1
            while sp > 0:
                v = stack_v[sp - 1]
                k = stack_k[sp - 1]
                if k < 4:
                    stack_k[sp - 1] = k + 1
                    x, y = v // H, v % H
                    ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
                    if ax < 0 or ay < 0 or ax >= W or ay >= H or not occ[ax, ay]:
                        continue
                    u = ax * H + ay
                    if disc[u] < 0:
                        estack[esp, 0] = v
                        estack[esp, 1] = u
                        esp += 1
                        disc[u] = timer
                        low[u] = timer
                        timer += 1
                        parent[u] = v
                        stack_v[sp] = u
                        stack_k[sp] = 0
                        sp += 1
                    elif u != parent[v] and disc[u] < disc[v]:
                        estack[esp, 0] = v
                        estack[esp, 1] = u
                        esp += 1
                        if disc[u] < low[v]:
                            low[v] = disc[u]
                else:
                    sp -= 1
                    p = parent[v]
                    if p < 0:
                        continue
                    if low[v] < low[p]:
                        low[p] = low[v]
                    if low[v] >= disc[p]:
                        # pop one biconnected component: every stacked edge
                        # above and including the tree edge (p, v)
                        edges = 0
                        while esp > 0:
                            esp -= 1
                            edges += 1
                            if estack[esp, 0] == p and estack[esp, 1] == v:
                                break
                        # single-edge components are bridges; >= 2 edges in a
                        # simple graph means the component carries a cycle
                        if edges >= 2:
                            for e in range(esp, esp + edges):
                                for side in range(2):
                                    w = estack[e, side]
                                    if stamp[w] != n_bcc:
                                        stamp[w] = n_bcc
                                        if b1[w] < 0:
                                            b1[w] = n_bcc
                                        elif b2[w] < 0:
                                            b2[w] = n_bcc
                            n_bcc += 1

    # --- collect cells per cyclic BCC ---
    counts = np.zeros(n_bcc + 1, dtype=np.int64)
    for v in range(NV):
        if b1[v] >= 0:
            counts[b1[v] + 1] += 1
        if b2[v] >= 0:
            counts[b2[v] + 1] += 1
    offs = np.cumsum(counts)
    total_mem = int(offs[n_bcc])
    mem = np.empty(total_mem, dtype=np.int32)
    fill = offs[:-1].copy()
    for v in range(NV):
        if b1[v] >= 0:
            mem[fill[b1[v]]] = v
            fill[b1[v]] += 1
        if b2[v] >= 0:
            mem[fill[b2[v]]] = v
            fill[b2[v]] += 1

    # --- chunk cell sets: BCC plus enclosed squares ---
    # Chunk regions are pairwise disjoint, share a single connector, or nest;
    # nesting sheds at least one cell of x-extent per side per level, so a
    # cell sits in at most min(W, H) // 2 + 3 candidate chunks.
    depth_bound = min(W, H) // 2 + 3
    cells_buf = np.empty(depth_bound * n + 8, dtype=np.int32)
    cstart = np.zeros(n_bcc + 1, dtype=np.int64)
    cbx0 = np.empty(n_bcc + 1, dtype=np.int32)
    cby0 = np.empty(n_bcc + 1, dtype=np.int32)
    cbx1 = np.empty(n_bcc + 1, dtype=np.int32)
    cby1 = np.empty(n_bcc + 1, dtype=np.int32)
    fragile_raw = np.zeros(n_bcc + 1, dtype=np.uint8)
    cpos = 0
    seen = np.full(NV, -1, dtype=np.int32)
    fq = np.empty((W + 2) * (H + 2), dtype=np.int32)
    for b in range(n_bcc):
        cstart[b] = cpos
        lo_x, lo_y = W, H
        hi_x, hi_y = -1, -1
        for e in range(offs[b], offs[b + 1]):
            v = mem[e]
            x, y = v // H, v % H
            if x < lo_x:
                lo_x = x
            if x > hi_x:
                hi_x = x
            if y < lo_y:
                lo_y = y
            if y > hi_y:
                hi_y = y
            if seen[v] != b:
                seen[v] = b
                cells_buf[cpos] = v
                cpos += 1
        # anything (occupied or not) strictly inside the outer cycle of the
        # BCC is enclosed; flood 8-connected from the bbox margin over
        # non-BCC cells.
        bcc_sz = cpos - cstart[b]
        area = (hi_x - lo_x + 1) * (hi_y - lo_y + 1)
        if area > bcc_sz:
            x0, y0 = lo_x - 1, lo_y - 1
            x1, y1 = hi_x + 1, hi_y + 1
            ww = x1 - x0 + 1
            hh = y1 - y0 + 1
            reach = np.zeros((ww, hh), dtype=np.uint8)
            qp = 0
            qn = 0
            for xx in range(ww):
                for yy in (0, hh - 1):
                    if not reach[xx, yy]:
                        reach[xx, yy] = 1
                        fq[qn] = xx * hh + yy
                        qn += 1
            for yy in range(hh):
                for xx in (0, ww - 1):
                    if not reach[xx, yy]:
                        reach[xx, yy] = 1
                        fq[qn] = xx * hh + yy
                        qn += 1
            while qp < qn:
                c = fq[qp]
                qp += 1
                xx, yy = c // hh, c % hh
                for k in range(8):
                    ax, ay = xx + DIAG8[k, 0], yy + DIAG8[k, 1]
                    if ax < 0 or ay < 0 or ax >= ww or ay >= hh or reach[ax, ay]:
                        continue
                    gx, gy = x0 + ax, y0 + ay
                    blocked = False
                    if 0 <= gx < W and 0 <= gy < H and occ[gx, gy]:
                        v = gx * H + gy
                        if b1[v] == b or b2[v] == b:
                            blocked = True
                    if not blocked:
                        reach[ax, ay] = 1
                        fq[qn] = ax * hh + ay
                        qn += 1
            for xx in range(ww):
                for yy in range(hh):
                    if reach[xx, yy]:
                        continue
                    gx, gy = x0 + xx, y0 + yy
                    v = gx * H + gy
                    if b1[v] == b or b2[v] == b:
                        continue
                    if occ[gx, gy]:
                        if seen[v] != b:
                            seen[v] = b
                            cells_buf[cpos] = v
                            cpos += 1
                    else:
                        fragile_raw[b] = 1
        cbx0[b], cby0[b], cbx1[b], cby1[b] = lo_x, lo_y, hi_x, hi_y
    cstart[n_bcc] = cpos

    # --- drop candidate chunks nested inside another ---
    keep = np.ones(n_bcc, dtype=np.uint8)
    member = np.full(NV, -1, dtype=np.int32)
    for b in range(n_bcc):
        sz_b = cstart[b + 1] - cstart[b]
        for c in range(n_bcc):
            if c == b or not keep[c]:
                continue
            sz_c = cstart[c + 1] - cstart[c]
            if sz_c < sz_b or (sz_c == sz_b and c > b):
                continue
            if (
                cbx0[c] > cbx0[b]
                or cby0[c] > cby0[b]
                or cbx1[c] < cbx1[b]
                or cby1[c] < cby1[b]
            ):
                continue
            for e in range(cstart[c], cstart[c + 1]):
                member[cells_buf[e]] = c
            inside = True
            for e in range(cstart[b], cstart[b + 1]):
                if member[cells_buf[e]] != c:
                    inside = False
                    break
            if inside:
                keep[b] = 0
                break

    # --- renumber surviving chunks by smallest member cell ---
    order_key = np.empty(n_bcc, dtype=np.int64)
    for b in range(n_bcc):
        best = np.int64(NV + 1)
        if keep[b]:
            for e in range(cstart[b], cstart[b + 1]):
                v = cells_buf[e]
                x, y = v // H, v % H
                key = np.int64(y) * W + x
                if key < best:
                    best = key
        order_key[b] = best
    perm = np.argsort(order_key, kind="mergesort")
    n_chunks = 0
    newid = np.full(n_bcc, -1, dtype=np.int32)
    for i in range(n_bcc):
        b = perm[i]
        if keep[b]:
            newid[b] = n_chunks
            n_chunks += 1
    fragile = np.zeros(n_chunks, dtype=np.uint8)
    for b in range(n_bcc):
        if newid[b] < 0:
            continue
        cid = newid[b]
        fragile[cid] = fragile_raw[b]
        for e in range(cstart[b], cstart[b + 1]):
            v = cells_buf[e]
            x, y = v // H, v % H
            if chunk1[x, y] < 0 or chunk1[x, y] == cid:
                chunk1[x, y] = cid
            elif chunk2[x, y] < 0:
                chunk2[x, y] = cid

    # --- loose squares: degree-1 squares adjacent to a chunk square ---
    for x in range(W):
        for y in range(H):
            if not occ[x, y] or chunk1[x, y] >= 0:
                continue
            deg = 0
            nx_, ny_ = -1, -1
            for k in range(4):
                ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
                if 0 <= ax < W and 0 <= ay < H and occ[ax, ay]:
                    deg += 1
                    nx_, ny_ = ax, ay
            if deg == 1 and chunk1[nx_, ny_] >= 0:
                loose_of[x, y] = chunk1[nx_, ny_]

    # --- links: everything not in a chunk and not loose ---
    n_links = 0
    lq = np.empty(n, dtype=np.int32)
    for y in range(H):
        for x in range(W):
            if (
                not occ[x, y]
                or chunk1[x, y] >= 0
                or loose_of[x, y] >= 0
                or link_of[x, y] >= 0
            ):
                continue
            lid = n_links
            n_links += 1
            link_of[x, y] = lid
            lq[0] = x * H + y
            qn = 1
            qp = 0
            while qp < qn:
                v = lq[qp]
                qp += 1
                vx, vy = v // H, v % H
                for k in range(4):
                    ax, ay = vx + EDGE4[k, 0], vy + EDGE4[k, 1]
                    if (
                        0 <= ax < W
                        and 0 <= ay < H
                        and occ[ax, ay]
                        and chunk1[ax, ay] < 0
                        and loose_of[ax, ay] < 0
                        and link_of[ax, ay] < 0
                    ):
                        link_of[ax, ay] = lid
                        lq[qn] = ax * H + ay
                        qn += 1
    return chunk1, chunk2, loose_of, link_of, n_chunks, n_links, fragile


@njit(cache=True)
def tree_structure(occ, chunk1, chunk2, loose_of, link_of, n_chunks, n_links, rx, ry):
    """Component-tree structure over decomposition labels.

    Nodes are chunks (ids 0..n_chunks-1) then links (n_chunks..). Two nodes
    are adjacent when they share a square or have edge-adjacent squares.
    Returns ``(parent, root, n_edges, sizes)``; parent is -1 for the root
    and -2 for nodes unreachable from it (never happens on connected
    input). ``n_edges`` counts distinct adjacencies so callers can assert
    the graph is a tree. ``sizes`` counts squares per node (loose squares
    count toward their chunk).
    """
    W, H = occ.shape
    n_nodes = n_chunks + n_links
    parent = np.full(n_nodes, -2, dtype=np.int32)
    sizes = np.zeros(n_nodes, dtype=np.int64)
    if n_nodes == 0:
        return parent, -1, 0, sizes
    adj = np.zeros((n_nodes, n_nodes), dtype=np.uint8)

    for x in range(W):
        for y in range(H):
            if not occ[x, y]:
                continue
            a1 = chunk1[x, y]
            a2 = chunk2[x, y]
            al = loose_of[x, y]
            ak = link_of[x, y]
            if a1 >= 0:
                sizes[a1] += 1
                if a2 >= 0:
                    sizes[a2] += 1
                    adj[a1, a2] = 1
                    adj[a2, a1] = 1
            elif al >= 0:
                sizes[al] += 1
            elif ak >= 0:
                sizes[n_chunks + ak] += 1
            # edges to E and N neighbors (each unordered pair scanned once)
            for k in range(2):
                ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
                if ax >= W or ay >= H or not occ[ax, ay]:
                    continue
                for ma in range(3):
                    if ma == 0:
                        u = a1
                    elif ma == 1:
                        u = a2
                    else:
                        u = al if al >= 0 else (-1 if ak < 0 else n_chunks + ak)
                    if u < 0:
                        continue
                    b1 = chunk1[ax, ay]
                    b2 = chunk2[ax, ay]
                    bl = loose_of[ax, ay]
                    bk = link_of[ax, ay]
                    for mb in range(3):
                        if mb == 0:
                            v = b1
                        elif mb == 1:
                            v = b2
                        else:
                            v = bl if bl >= 0 else (-1 if bk < 0 else n_chunks + bk)
                        if v < 0 or v == u:
                            continue
                        adj[u, v] = 1
                        adj[v, u] = 1

    n_edges = 0
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if adj[i, j]:
                n_edges += 1

    # root node: the one containing the root square (smaller chunk id wins
    # for a shared connector; loose squares belong to their chunk)
    if chunk1[rx, ry] >= 0:
        root = chunk1[rx, ry]
    elif loose_of[rx, ry] >= 0:
        root = loose_of[rx, ry]
    else:
        root = n_chunks + link_of[rx, ry]

    parent[root] = -1
    queue = np.empty(n_nodes, dtype=np.int32)
    queue[0] = root
    qn = 1
    qp = 0
    while qp < qn:
        u = queue[qp]
        qp += 1
        for v in range(n_nodes):
            if adj[u, v] and parent[v] == -2:
                parent[v] = u
                queue[qn] = v
                qn += 1
    return parent, root, n_edges, sizes


@njit(cache=True)
def light_candidates(occ, chunk1, chunk2, loose_of, link_of, cut, cap, perimeter):
    """Cut squares eligible for gathering: connectors and cut link squares.

    Returns an (m, 3) array of (x, y, capacity) for every cut square that
    is either a chunk square adjacent to a different component (or shared
    between two chunks) or a square of a link, with capacity below the
    given perimeter.
    """
    W, H = occ.shape
    out = np.empty((W * H, 3), dtype=np.int64)
    m = 0
    for x in range(W):
        for y in range(H):
            if not occ[x, y] or not cut[x, y]:
                continue
            if cap[x, y] >= perimeter:
                continue
            eligible = False
            if link_of[x, y] >= 0:
                eligible = True
            elif chunk1[x, y] >= 0:
                if chunk2[x, y] >= 0:
                    eligible = True
                else:
                    c = chunk1[x, y]
                    for k in range(4):
                        ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
                        if ax < 0 or ay < 0 or ax >= W or ay >= H:
                            continue
                        if not occ[ax, ay]:
                            continue
                        if (
                            chunk1[ax, ay] != c
                            and chunk2[ax, ay] != c
                            and loose_of[ax, ay] != c
                        ):
                            eligible = True
                            break
            if eligible:
                out[m, 0] = x
                out[m, 1] = y
                out[m, 2] = cap[x, y]
                m += 1
    return out[:m]


@njit(cache=True)
def walk_bfs(occ, sx, sy, x0, y0, x1, y1):
    """BFS of a single free square over legal moves against static occupancy.

    ``occ`` must not contain the mover. Positions are restricted to the
    inclusive rectangle (x0, y0)-(x1, y1). Returns ``(dist, via)`` where
    ``via[x, y]`` is the move code that first entered the cell (-1 if
    unreached); paths reconstruct by stepping backwards with REVERSE.
    """
    W, H = occ.shape
    dist = np.full((W, H), -1, dtype=np.int32)
    via = np.full((W, H), -1, dtype=np.int8)
    qx = np.empty(W * H, dtype=np.int32)
    qy = np.empty(W * H, dtype=np.int32)
    qx[0] = sx
    qy[0] = sy
    dist[sx, sy] = 0
    qp = 0
    qn = 1
    while qp < qn:
        x, y = qx[qp], qy[qp]
        qp += 1
        for code in range(12):
            nx = x + NET[code, 0]
            ny = y + NET[code, 1]
            if nx < x0 or ny < y0 or nx > x1 or ny > y1:
                continue
            if dist[nx, ny] >= 0:
                continue
            if not move_geometry_ok(occ, x, y, code):
                continue
            dist[nx, ny] = dist[x, y] + 1
            via[nx, ny] = code
            qx[qn] = nx
            qy[qn] = ny
            qn += 1
    return dist, via


@njit(cache=True)
def replay(occ, moves, bx0, by0, bx1, by1, check_box):
    """Replay a move sequence, validating every step.

    ``moves`` is an (n, 3) int32 array of (x, y, code) in grid-local
    coordinates. Returns ``(status, index, slides, transitions)`` with
    status 0 for success or a failure kind: 1 free-space, 2 backbone,
    3 disconnection, 4 out-of-ring, 5 duplicate-cell. The box check, when
    enabled, requires all squares inside the box except at most one within
    the surrounding 1-cell ring, at every state.
    """
    W, H = occ.shape
    slides = 0
    transitions = 0

    out = 0
    if check_box:
        for x in range(W):
            for y in range(H):
                if occ[x, y] and not (bx0 <= x <= bx1 and by0 <= y <= by1):
                    if x < bx0 - 1 or x > bx1 + 1 or y < by0 - 1 or y > by1 + 1:
                        return 4, -1, slides, transitions
                    out += 1
        if out > 1:
            return 4, -1, slides, transitions

    for i in range(moves.shape[0]):
        x, y, code = moves[i, 0], moves[i, 1], moves[i, 2]
        if x < 0 or y < 0 or x >= W or y >= H or not occ[x, y]:
            return 1, i, slides, transitions
        if code < 0 or code > 11:
            return 1, i, slides, transitions
        nx = x + NET[code, 0]
        ny = y + NET[code, 1]
        if nx < 0 or ny < 0 or nx >= W or ny >= H:
            return 4, i, slides, transitions
        if occ[nx, ny]:
            return 5, i, slides, transitions
        if not move_geometry_ok(occ, x, y, code):
            return 1, i, slides, transitions
        if not connected_without(occ, x, y):
            return 2, i, slides, transitions
        occ[x, y] = 0
        # destination adjacency to the backbone makes the result connected;
        # verified explicitly to stay defensive.
        adj = False
        for k in range(4):
            ax, ay = nx + EDGE4[k, 0], ny + EDGE4[k, 1]
            if 0 <= ax < W and 0 <= ay < H and occ[ax, ay]:
                adj = True
                break
        occ[nx, ny] = 1
        if not adj:
            occ[nx, ny] = 0
            occ[x, y] = 1
            return 3, i, slides, transitions
        if code < 4:
            slides += 1
        else:
            transitions += 1
        if check_box:
            if not (bx0 <= x <= bx1 and by0 <= y <= by1):
                out -= 1
            if not (bx0 <= nx <= bx1 and by0 <= ny <= by1):
                if nx < bx0 - 1 or nx > bx1 + 1 or ny < by0 - 1 or ny > by1 + 1:
                    return 4, i, slides, transitions
                out += 1
            if out > 1:
                return 4, i, slides, transitions
    return 0, -1, slides, transitions


@njit(cache=True)
def _bcc_pass(occ, epoch, ve, disc, low, parent, estack, sv, sk,
              be, b1, b2, se, stamp, bbx0, bby0, bbx1, bby1):
    """Epoch-stamped biconnected-components pass over the grid graph.

    Fills per-vertex cyclic-BCC ids (b1/b2, valid when be == epoch) and
    per-BCC bounding boxes; returns the number of cyclic BCCs. No arrays
    are allocated, so candidate loops can call this cheaply.
    """
    W, H = occ.shape
    n_bcc = 0
    esp = 0
    timer = 0
    for x0 in range(W):
        for y0 in range(H):
            if not occ[x0, y0]:
                continue
            root = x0 * H + y0
            if ve[root] == epoch:
                continue
            ve[root] = epoch
            disc[root] = timer
            low[root] = timer
            parent[root] = -1
            timer += 1
            sv[0] = root
            sk[0] = 0
            sp = 1
            while sp > 0:
                v = sv[sp - 1]
                k = sk[sp - 1]
                if k < 4:
                    sk[sp - 1] = k + 1
                    x, y = v // H, v % H
                    ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
                    if ax < 0 or ay < 0 or ax >= W or ay >= H or not occ[ax, ay]:
                        continue
                    u = ax * H + ay
                    if ve[u] != epoch:
                        estack[esp, 0] = v
                        estack[esp, 1] = u
                        esp += 1
                        ve[u] = epoch
                        disc[u] = timer
                        low[u] = timer
                        timer += 1
                        parent[u] = v
                        sv[sp] = u
                        sk[sp] = 0
                        sp += 1
                    elif u != parent[v] and disc[u] < disc[v]:
                        estack[esp, 0] = v
                        estack[esp, 1] = u
                        esp += 1
                        if disc[u] < low[v]:
                            low[v] = disc[u]
                else:
                    sp -= 1
                    p = parent[v]
                    if p < 0:
                        continue
                    if low[v] < low[p]:
                        low[p] = low[v]
                    if low[v] >= disc[p]:
                        edges = 0
                        while esp > 0:
                            esp -= 1
                            edges += 1
                            if estack[esp, 0] == p and estack[esp, 1] == v:
                                break
                        if edges >= 2:
                            lox, loy, hix, hiy = W, H, -1, -1
                            for e in range(esp, esp + edges):
                                for side in range(2):
                                    w = estack[e, side]
                                    if se[w] != epoch or stamp[w] != n_bcc:
                                        se[w] = epoch
                                        stamp[w] = n_bcc
                                        if be[w] != epoch:
                                            be[w] = epoch
                                            b1[w] = n_bcc
                                            b2[w] = -1
                                        elif b1[w] != n_bcc and b2[w] < 0:
                                            b2[w] = n_bcc
                                        wx, wy = w // H, w % H
                                        if wx < lox:
                                            lox = wx
                                        if wx > hix:
                                            hix = wx
                                        if wy < loy:
                                            loy = wy
                                        if wy > hiy:
                                            hiy = wy
                            bbx0[n_bcc] = lox
                            bby0[n_bcc] = loy
                            bbx1[n_bcc] = hix
                            bby1[n_bcc] = hiy
                            n_bcc += 1
    return n_bcc


@njit(cache=True)
def lm_search(occ, chunk1, chunk2, loose_of, cut, cid, bx0, by0, bx1, by1):
    """Best valid LM move for the chunk with the given id.

    Candidates are ordered by (score delta, x, y, code); the first one
    whose application keeps every chunk member in a single chunk wins.
    Each candidate is screened with an allocation-free BCC test; only
    geometrically ambiguous cases (possible enclosure or nesting) fall
    back to the full decomposition. Returns (x, y, code) or (-1, -1, -1).
    The occupancy grid is used as scratch space but restored.
    """
    W, H = occ.shape
    NV = W * H
    n_mem = 0
    for x in range(W):
        for y in range(H):
            if chunk1[x, y] == cid or chunk2[x, y] == cid or loose_of[x, y] == cid:
                n_mem += 1
    if n_mem == 0:
        return -1, -1, -1
    mx = np.empty(n_mem, dtype=np.int32)
    my = np.empty(n_mem, dtype=np.int32)
    i = 0
    for x in range(W):
        for y in range(H):
            if chunk1[x, y] == cid or chunk2[x, y] == cid or loose_of[x, y] == cid:
                mx[i] = x
                my[i] = y
                i += 1
    # Region enclosed by the chunk core, from one flood per call: moves of
    # squares strictly inside the core's outer cycle that land inside it
    # again cannot disturb the cycle, so they are valid with no further
    # analysis (the mover stays enclosed, everyone else is untouched).
    reach0 = np.zeros((W, H), dtype=np.uint8)
    rq = np.empty(NV, dtype=np.int32)
    rn = 0
    for xx in range(W):
        for yy in (0, H - 1):
            core = chunk1[xx, yy] == cid or chunk2[xx, yy] == cid
            if not (occ[xx, yy] and core) and not reach0[xx, yy]:
                reach0[xx, yy] = 1
                rq[rn] = xx * H + yy
                rn += 1
    for yy in range(H):
        for xx in (0, W - 1):
            core = chunk1[xx, yy] == cid or chunk2[xx, yy] == cid
            if not (occ[xx, yy] and core) and not reach0[xx, yy]:
                reach0[xx, yy] = 1
                rq[rn] = xx * H + yy
                rn += 1
    rp = 0
    while rp < rn:
        v0 = rq[rp]
        rp += 1
        xx, yy = v0 // H, v0 % H
        for k in range(8):
            qx, qy = xx + DIAG8[k, 0], yy + DIAG8[k, 1]
            if qx < 0 or qy < 0 or qx >= W or qy >= H or reach0[qx, qy]:
                continue
            core = chunk1[qx, qy] == cid or chunk2[qx, qy] == cid
            if occ[qx, qy] and core:
                continue
            reach0[qx, qy] = 1
            rq[rn] = qx * H + qy
            rn += 1

    # Candidate moves ordered by (score delta, interior first, x, y, code).
    # Interior moves (mover strictly inside the core's enclosure, landing
    # inside it) keep the outer cycle untouched and are valid outright, so
    # preferring them makes the winning candidate cheap to find.
    mbx0, mby0, mbx1, mby1 = W, H, -1, -1
    for i in range(n_mem):
        if mx[i] < mbx0:
            mbx0 = mx[i]
        if mx[i] > mbx1:
            mbx1 = mx[i]
        if my[i] < mby0:
            mby0 = my[i]
        if my[i] > mby1:
            mby1 = my[i]

    cand_key = np.empty(n_mem * 6, dtype=np.int64)
    cand_xyc = np.empty((n_mem * 6, 4), dtype=np.int32)
    nc = 0
    for i in range(n_mem):
        x, y = mx[i], my[i]
        if cut[x, y]:
            continue
        strict_inside = chunk1[x, y] == cid or chunk2[x, y] == cid
        if strict_inside:
            for k in range(8):
                qx, qy = x + DIAG8[k, 0], y + DIAG8[k, 1]
                if qx < 0 or qy < 0 or qx >= W or qy >= H or reach0[qx, qy]:
                    strict_inside = False
                    break
        for k in range(6):
            code = LM_CODES[k]
            nx = x + NET[code, 0]
            ny = y + NET[code, 1]
            if nx < bx0 or ny < by0 or nx > bx1 or ny > by1:
                continue
            if not move_geometry_ok(occ, x, y, code):
                continue
            delta = 2 * (nx - x) + (ny - y)
            inner = 0 if (strict_inside and not reach0[nx, ny]) else 1
            cand_key[nc] = ((((np.int64(inner) * 8 + delta + 8) * W + x) * H + y) * 16 + code)
            cand_xyc[nc, 0] = x
            cand_xyc[nc, 1] = y
            cand_xyc[nc, 2] = code
            cand_xyc[nc, 3] = inner
            nc += 1
    if nc == 0:
        return -1, -1, -1
    order = np.argsort(cand_key[:nc])

    # Current cycle structure and region labels, once per call. Regions are
    # 8-connected components of cells on no cycle (empty cells and tree
    # squares); label 0 is the outside. A candidate that opens a wall cell
    # between the outside and a region holding a robust tree member (degree
    # >= 2, clear of the move) strands that member, provided the landing
    # cannot create new cycles; such candidates are rejected in O(1).
    ve = np.zeros(NV, dtype=np.int32)
    disc = np.empty(NV, dtype=np.int32)
    low = np.empty(NV, dtype=np.int32)
    parent = np.empty(NV, dtype=np.int32)
    estack = np.empty((4 * NV + 8, 2), dtype=np.int32)
    sv = np.empty(NV + 1, dtype=np.int32)
    sk = np.empty(NV + 1, dtype=np.int32)
    be = np.zeros(NV, dtype=np.int32)
    b1 = np.empty(NV, dtype=np.int32)
    b2 = np.empty(NV, dtype=np.int32)
    se = np.zeros(NV, dtype=np.int32)
    stamp = np.empty(NV, dtype=np.int32)
    nb_max = NV // 2 + 2
    bbx0 = np.empty(nb_max, dtype=np.int32)
    bby0 = np.empty(nb_max, dtype=np.int32)
    bbx1 = np.empty(nb_max, dtype=np.int32)
    bby1 = np.empty(nb_max, dtype=np.int32)
    _bcc_pass(occ, 1, ve, disc, low, parent, estack, sv, sk,
              be, b1, b2, se, stamp, bbx0, bby0, bbx1, bby1)
    member_mask = np.zeros((W, H), dtype=np.uint8)
    for i in range(n_mem):
        member_mask[mx[i], my[i]] = 1
    region = np.full((W, H), -1, dtype=np.int32)
    n_regions = 0
    max_wit = 8
    wit_x = np.empty((NV + 2, max_wit), dtype=np.int32)
    wit_y = np.empty((NV + 2, max_wit), dtype=np.int32)
    wit_n = np.zeros(NV + 2, dtype=np.int32)
    for sx0 in range(W):
        for sy0 in range(H):
            on_cycle = occ[sx0, sy0] and be[sx0 * H + sy0] == 1
            if on_cycle or region[sx0, sy0] >= 0:
                continue
            rid = n_regions
            n_regions += 1
            region[sx0, sy0] = rid
            rq[0] = sx0 * H + sy0
            rn = 1
            rp = 0
            while rp < rn:
                v0 = rq[rp]
                rp += 1
                xx, yy = v0 // H, v0 % H
                if occ[xx, yy] and member_mask[xx, yy]:
                    deg = 0
                    for k in range(4):
                        qx, qy = xx + EDGE4[k, 0], yy + EDGE4[k, 1]
                        if 0 <= qx < W and 0 <= qy < H and occ[qx, qy]:
                            deg += 1
                    if deg >= 2 and wit_n[rid] < max_wit:
                        wit_x[rid, wit_n[rid]] = xx
                        wit_y[rid, wit_n[rid]] = yy
                        wit_n[rid] += 1
                for k in range(8):
                    qx, qy = xx + DIAG8[k, 0], yy + DIAG8[k, 1]
                    if qx < 0 or qy < 0 or qx >= W or qy >= H:
                        continue
                    if region[qx, qy] >= 0:
                        continue
                    if occ[qx, qy] and be[qx * H + qy] == 1:
                        continue
                    region[qx, qy] = rid
                    rq[rn] = qx * H + qy
                    rn += 1
    # region id containing the border is the outside
    outside_region = region[0, 0]

    inv = np.zeros(nb_max, dtype=np.uint8)
    fe = np.zeros(NV, dtype=np.int32)
    fq = np.empty(NV, dtype=np.int32)
    mem_arr = np.empty((n_mem, 2), dtype=np.int64)

    epoch = 1
    for oi in range(nc):
        ci = order[oi]
        x, y, code = cand_xyc[ci, 0], cand_xyc[ci, 1], cand_xyc[ci, 2]
        nx = x + NET[code, 0]
        ny = y + NET[code, 1]
        if cand_xyc[ci, 3] == 0:
            return x, y, code
        # O(1) rules for loose movers: a degree-1 member detaches freely,
        # so validity is decided by where it lands
        if loose_of[x, y] == cid:
            has_core = False
            has_other = False
            for k in range(4):
                qx, qy = nx + EDGE4[k, 0], ny + EDGE4[k, 1]
                if qx == x and qy == y:
                    continue
                if 0 <= qx < W and 0 <= qy < H and occ[qx, qy]:
                    if chunk1[qx, qy] == cid or chunk2[qx, qy] == cid:
                        has_core = True
                    else:
                        has_other = True
            if not has_other:
                if has_core or not reach0[nx, ny]:
                    return x, y, code
                # lands attached to nothing of the chunk, outside its
                # enclosure: the mover is stranded
                continue
        # O(1) stranding reject: the mover sits on a cycle, the landing is
        # too bare to close any new cycle, and vacating the mover's cell
        # joins the outside to a region holding a robust tree member.
        if be[x * H + y] == 1:
            tdeg = 0
            for k in range(4):
                qx, qy = nx + EDGE4[k, 0], ny + EDGE4[k, 1]
                if 0 <= qx < W and 0 <= qy < H and occ[qx, qy] and not (qx == x and qy == y):
                    tdeg += 1
            if tdeg <= 1:
                saw_out = False
                leak = -1
                for k in range(8):
                    qx, qy = x + DIAG8[k, 0], y + DIAG8[k, 1]
                    if qx < 0 or qy < 0 or qx >= W or qy >= H:
                        continue
                    if qx == nx and qy == ny:
                        continue
                    r = region[qx, qy]
                    if r < 0:
                        continue
                    if r == outside_region:
                        saw_out = True
                    elif wit_n[r] > 0:
                        leak = r
                if saw_out and leak >= 0:
                    stranded = False
                    for wi in range(wit_n[leak]):
                        wx, wy = wit_x[leak, wi], wit_y[leak, wi]
                        if abs(wx - x) + abs(wy - y) == 1:
                            continue
                        if abs(wx - nx) + abs(wy - ny) == 1:
                            continue
                        if wx == nx and wy == ny:
                            continue
                        stranded = True
                        break
                    if stranded:
                        continue
        occ[x, y] = 0
        occ[nx, ny] = 1
        epoch += 1
        n_bcc = _bcc_pass(occ, epoch, ve, disc, low, parent, estack, sv, sk,
                          be, b1, b2, se, stamp, bbx0, bby0, bbx1, bby1)
        # tri-state screening: 1 valid, 0 invalid, -1 needs full labels
        first = True
        shared1 = -1
        shared2 = -1
        for j in range(n_bcc):
            inv[j] = 0
        has_noid = False
        for i in range(n_mem):
            ax, ay = mx[i], my[i]
            if ax == x and ay == y:
                ax, ay = nx, ny
            v = ax * H + ay
            ia = -1
            ib = -1
            if be[v] == epoch:
                ia = b1[v]
                ib = b2[v]
            else:
                deg = 0
                lastn = -1
                for k in range(4):
                    qx, qy = ax + EDGE4[k, 0], ay + EDGE4[k, 1]
                    if 0 <= qx < W and 0 <= qy < H and occ[qx, qy]:
                        deg += 1
                        lastn = qx * H + qy
                if deg == 1 and be[lastn] == epoch:
                    ia = b1[lastn]
                    ib = b2[lastn]
                else:
                    has_noid = True
                    continue
            if ia >= 0:
                inv[ia] = 1
            if ib >= 0:
                inv[ib] = 1
            if first:
                shared1, shared2 = ia, ib
                first = False
            else:
                keep1 = shared1 if shared1 >= 0 and (shared1 == ia or shared1 == ib) else -1
                keep2 = shared2 if shared2 >= 0 and (shared2 == ia or shared2 == ib) else -1
                shared1, shared2 = keep1, keep2
        if not has_noid and (shared1 >= 0 or shared2 >= 0):
            state = 1  # every member carries one common cycle id
        else:
            state = -1
            if has_noid:
                # members without a cycle id are chunk members only when
                # enclosed; flood 8-connected from the chunk bbox ring over
                # cells not on any cycle (anything enclosing the chunk
                # would have absorbed it), and reject on a hit
                fep = 2 * epoch
                qn = 0
                for xx in range(max(mbx0 - 1, 0), min(mbx1 + 2, W)):
                    for yy in (max(mby0 - 1, 0), min(mby1 + 1, H - 1)):
                        v0 = xx * H + yy
                        if not (occ[xx, yy] and be[v0] == epoch) and fe[v0] != fep:
                            fe[v0] = fep
                            fq[qn] = v0
                            qn += 1
                for yy in range(max(mby0 - 1, 0), min(mby1 + 2, H)):
                    for xx in (max(mbx0 - 1, 0), min(mbx1 + 1, W - 1)):
                        v0 = xx * H + yy
                        if not (occ[xx, yy] and be[v0] == epoch) and fe[v0] != fep:
                            fe[v0] = fep
                            fq[qn] = v0
                            qn += 1
                qp = 0
                while qp < qn:
                    v0 = fq[qp]
                    qp += 1
                    xx, yy = v0 // H, v0 % H
                    for k in range(8):
                        qx, qy = xx + DIAG8[k, 0], yy + DIAG8[k, 1]
                        if qx < max(mbx0 - 1, 0) or qy < max(mby0 - 1, 0):
                            continue
                        if qx > min(mbx1 + 1, W - 1) or qy > min(mby1 + 1, H - 1):
                            continue
                        v1 = qx * H + qy
                        if fe[v1] == fep or (occ[qx, qy] and be[v1] == epoch):
                            continue
                        fe[v1] = fep
                        fq[qn] = v1
                        qn += 1
                for i in range(n_mem):
                    ax, ay = mx[i], my[i]
                    if ax == x and ay == y:
                        ax, ay = nx, ny
                    v = ax * H + ay
                    if be[v] == epoch:
                        continue
                    deg = 0
                    lastn = -1
                    for k in range(4):
                        qx, qy = ax + EDGE4[k, 0], ay + EDGE4[k, 1]
                        if 0 <= qx < W and 0 <= qy < H and occ[qx, qy]:
                            deg += 1
                            lastn = qx * H + qy
                    if deg == 1 and be[lastn] == epoch:
                        continue
                    if fe[v] == fep:
                        state = 0  # stranded outside every cycle region
                        break
            if state == -1:
                # nested case: find the unique outermost involved cycle and
                # test membership against its enclosure with one flood
                c0 = -1
                outer_count = 0
                for a in range(n_bcc):
                    if not inv[a]:
                        continue
                    contained = False
                    for b in range(n_bcc):
                        if a == b or not inv[b]:
                            continue
                        if (
                            bbx0[b] <= bbx0[a]
                            and bby0[b] <= bby0[a]
                            and bbx1[a] <= bbx1[b]
                            and bby1[a] <= bby1[b]
                        ):
                            contained = True
                            break
                    if not contained:
                        outer_count += 1
                        c0 = a
                if outer_count == 1:
                    fep = 2 * epoch + 1
                    qn = 0
                    for xx in range(max(mbx0 - 1, 0), min(mbx1 + 2, W)):
                        for yy in (max(mby0 - 1, 0), min(mby1 + 1, H - 1)):
                            v0 = xx * H + yy
                            on_c0 = be[v0] == epoch and (b1[v0] == c0 or b2[v0] == c0)
                            if not (occ[xx, yy] and on_c0) and fe[v0] != fep:
                                fe[v0] = fep
                                fq[qn] = v0
                                qn += 1
                    for yy in range(max(mby0 - 1, 0), min(mby1 + 2, H)):
                        for xx in (max(mbx0 - 1, 0), min(mbx1 + 1, W - 1)):
                            v0 = xx * H + yy
                            on_c0 = be[v0] == epoch and (b1[v0] == c0 or b2[v0] == c0)
                            if not (occ[xx, yy] and on_c0) and fe[v0] != fep:
                                fe[v0] = fep
                                fq[qn] = v0
                                qn += 1
                    qp = 0
                    while qp < qn:
                        v0 = fq[qp]
                        qp += 1
                        xx, yy = v0 // H, v0 % H
                        for k in range(8):
                            qx, qy = xx + DIAG8[k, 0], yy + DIAG8[k, 1]
                            if qx < max(mbx0 - 1, 0) or qy < max(mby0 - 1, 0):
                                continue
                            if qx > min(mbx1 + 1, W - 1) or qy > min(mby1 + 1, H - 1):
                                continue
                            v1 = qx * H + qy
                            if fe[v1] == fep:
                                continue
                            on_c0 = be[v1] == epoch and (b1[v1] == c0 or b2[v1] == c0)
                            if occ[qx, qy] and on_c0:
                                continue
                            fe[v1] = fep
                            fq[qn] = v1
                            qn += 1
                    all_in = True
                    for i in range(n_mem):
                        ax, ay = mx[i], my[i]
                        if ax == x and ay == y:
                            ax, ay = nx, ny
                        v = ax * H + ay
                        if be[v] == epoch and (b1[v] == c0 or b2[v] == c0):
                            continue
                        if fe[v] != fep:
                            continue  # enclosed by the outermost cycle
                        # allow degree-1 attachment to the chunk
                        deg = 0
                        ok1 = False
                        for k in range(4):
                            qx, qy = ax + EDGE4[k, 0], ay + EDGE4[k, 1]
                            if 0 <= qx < W and 0 <= qy < H and occ[qx, qy]:
                                deg += 1
                                v1 = qx * H + qy
                                on_c0 = be[v1] == epoch and (b1[v1] == c0 or b2[v1] == c0)
                                if on_c0 or fe[v1] != fep:
                                    ok1 = True
                        if deg == 1 and ok1:
                            continue
                        all_in = False
                        break
                    if all_in:
                        state = 1
        ok = False
        if state == 1:
            ok = True
        elif state == -1:
            c1, c2, lo, _lk, _nch, _nlk, _fr = decompose_labels(occ)
            for i in range(n_mem):
                ax, ay = mx[i], my[i]
                if ax == x and ay == y:
                    ax, ay = nx, ny
                mem_arr[i, 0] = ax
                mem_arr[i, 1] = ay
            ok = chunk_holds_cells(c1, c2, lo, mem_arr, False)
        occ[nx, ny] = 0
        occ[x, y] = 1
        if ok:
            return x, y, code
    return -1, -1, -1


@njit(cache=True)
def xy_monotone(occ):
    """Staircase condition over the occupied cells' own bounding box."""
    W, H = occ.shape
    x0, y0 = W, H
    for x in range(W):
        for y in range(H):
            if occ[x, y]:
                if x < x0:
                    x0 = x
                if y < y0:
                    y0 = y
    if x0 == W:
        return False
    for x in range(W):
        for y in range(H):
            if occ[x, y]:
                if y > y0 and not occ[x, y - 1]:
                    return False
                if x > x0 and not occ[x - 1, y]:
                    return False
    return True


@njit(cache=True)
def descendants_mask(occ, rx, ry, sx, sy):
    """Squares in components of C minus (sx, sy) not containing the root."""
    W, H = occ.shape
    mask = np.zeros((W, H), dtype=np.uint8)
    reach = np.zeros((W, H), dtype=np.uint8)
    if not (rx == sx and ry == sy):
        qx = np.empty(W * H, dtype=np.int32)
        qy = np.empty(W * H, dtype=np.int32)
        qx[0] = rx
        qy[0] = ry
        reach[rx, ry] = 1
        qn = 1
        qp = 0
        while qp < qn:
            x, y = qx[qp], qy[qp]
            qp += 1
            for k in range(4):
                ax, ay = x + EDGE4[k, 0], y + EDGE4[k, 1]
                if (
                    0 <= ax < W
                    and 0 <= ay < H
                    and occ[ax, ay]
                    and not reach[ax, ay]
                    and not (ax == sx and ay == sy)
                ):
                    reach[ax, ay] = 1
                    qx[qn] = ax
                    qy[qn] = ay
                    qn += 1
    for x in range(W):
        for y in range(H):
            if occ[x, y] and not reach[x, y] and not (x == sx and y == sy):
                mask[x, y] = 1
    return mask


@njit(cache=True)
def chunk_holds_cells(chunk1, chunk2, loose_of, cells, require_core_last):
    """True if some single chunk contains every listed cell.

    ``cells`` is an (n, 2) array; loose membership counts. When
    ``require_core_last`` is set, the final cell (the moved square) must
    additionally sit on the chunk's cycle or interior, not as a loose
    square.
    """
    n = cells.shape[0]
    if n == 0:
        return True
    x0, y0 = cells[0, 0], cells[0, 1]
    for cand in (chunk1[x0, y0], chunk2[x0, y0], loose_of[x0, y0]):
        if cand < 0:
            continue
        ok = True
        for i in range(n):
            x, y = cells[i, 0], cells[i, 1]
            if chunk1[x, y] == cand or chunk2[x, y] == cand:
                continue
            if loose_of[x, y] == cand:
                if require_core_last and i == n - 1:
                    ok = False
                    break
                continue
            ok = False
            break
        if ok:
            return True
    return False
