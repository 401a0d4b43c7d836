"""Pure-Python implementations of the hot kernels.

Same signatures as the compiled module ``_ckernels``; the package picks one
at import time (see ``kernels.__init__``).  Everything here works on plain
ints used as bitmasks (graphs of at most 63 vertices) except
``max_matching``, which takes adjacency lists and has no size cap.
"""

from __future__ import annotations

from collections import deque

BACKEND_NAME = "python"


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def max_matching(n: int, adj: list[list[int]]) -> list[int]:
    """Maximum cardinality matching in a general graph (blossom contraction).

    Returns ``mate`` with ``mate[v] = u`` or ``-1``.  Greedy initialisation
    plus one alternating-forest search per remaining free vertex.
    """
    match = [-1] * n
    for v in range(n):
        if match[v] == -1:
            for u in adj[v]:
                if match[u] == -1:
                    match[v] = u
                    match[u] = v
                    break

    p = [-1] * n
    base = list(range(n))
    used = [False] * n

    def lca(a: int, b: int) -> int:
        on_path = [False] * n
        while True:
            a = base[a]
            on_path[a] = True
            if match[a] == -1:
                break
            a = p[match[a]]
        while True:
            b = base[b]
            if on_path[b]:
                return b
            b = p[match[b]]

    def mark_path(v: int, b: int, child: int, blossom: list[bool]) -> None:
        while base[v] != b:
            blossom[base[v]] = True
            blossom[base[match[v]]] = True
            p[v] = child
            child = match[v]
            v = p[match[v]]

    def find_path(root: int) -> bool:
        for i in range(n):
            used[i] = False
            p[i] = -1
            base[i] = i
        used[root] = True
        q = deque([root])
        while q:
            v = q.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and p[match[to]] != -1):
                    curbase = lca(v, to)
                    blossom = [False] * n
                    mark_path(v, curbase, to, blossom)
                    mark_path(to, curbase, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = curbase
                            if not used[i]:
                                used[i] = True
                                q.append(i)
                elif p[to] == -1:
                    p[to] = v
                    if match[to] == -1:
                        u = to
                        while u != -1:
                            pv = p[u]
                            ppv = match[pv]
                            match[u] = pv
                            match[pv] = u
                            u = ppv
                        return True
                    else:
                        used[match[to]] = True
                        q.append(match[to])
        return False

    for v in range(n):
        if match[v] == -1:
            find_path(v)
    return match


def embed_backtrack(
    host_masks: list[int],
    guest_masks: list[int],
    order: list[int],
    forbidden_masks: list[int],
) -> list[int] | None:
    """Injective edge-preserving map of the guest into the host, or None.

    ``order`` fixes the guest vertex insertion order; candidates for the
    vertex at position i are host vertices adjacent (outside forbidden
    edges) to the images of all earlier guest neighbours.  Exhaustive, so
    a None return is a proof of nonexistence.
    """
    n_h = len(host_masks)
    n_g = len(guest_masks)
    if n_g > n_h:
        return None
    full = (1 << n_h) - 1
    allowed = [host_masks[u] & ~forbidden_masks[u] for u in range(n_h)]

    # earlier-neighbour lists in insertion order
    pos_of = {g: i for i, g in enumerate(order)}
    prev = []
    for i, g in enumerate(order):
        prev.append([pos_of[x] for x in _bits(guest_masks[g]) if pos_of[x] < i])

    images = [-1] * n_g
    cand_stack = [0] * (n_g + 1)

    def candidates(i: int, used: int) -> int:
        c = full & ~used
        for j in prev[i]:
            c &= allowed[images[j]]
            if not c:
                return 0
        return c

    i = 0
    used = 0
    cand_stack[0] = candidates(0, 0) if n_g else 0
    if n_g == 0:
        return []
    while True:
        c = cand_stack[i]
        if c:
            low = c & -c
            cand_stack[i] = c ^ low
            v = low.bit_length() - 1
            images[i] = v
            if i + 1 == n_g:
                out = [-1] * n_g
                for k, g in enumerate(order):
                    out[g] = images[k]
                return out
            used |= low
            i += 1
            cand_stack[i] = candidates(i, used)
        else:
            i -= 1
            if i < 0:
                return None
            used &= ~(1 << images[i])


def clique_factor(masks: list[int], k: int) -> list[tuple[int, ...]] | None:
    """Exact partition of all vertices into K_k's, or None (proved).

    Memoised search over remaining-vertex bitmasks; always expands the
    lowest remaining vertex, so the state space is small in practice.
    """
    n = len(masks)
    if n % k != 0:
        return None
    failed: set[int] = set()

    def cliques_through(v: int, mask: int):
        """(k-1)-subsets S of mask forming a clique with v, as masks."""
        out = []
        base_cand = masks[v] & mask

        def grow(cur_mask: int, cand: int, size: int):
            if size == k - 1:
                out.append(cur_mask)
                return
            c = cand
            while c:
                low = c & -c
                c ^= low
                u = low.bit_length() - 1
                grow(cur_mask | low, c & masks[u], size + 1)

        grow(0, base_cand, 0)
        return out

    solution: list[tuple[int, ...]] = []

    def solve(mask: int) -> bool:
        if mask == 0:
            return True
        if mask in failed:
            return False
        low = mask & -mask
        v = low.bit_length() - 1
        for s in cliques_through(v, mask):
            solution.append(tuple(sorted([v] + list(_bits(s)))))
            if solve(mask & ~(s | low)):
                return True
            solution.pop()
        failed.add(mask)
        return False

    if solve((1 << n) - 1):
        return solution
    return None


def enum_cliques(masks: list[int], k: int) -> list[tuple[int, ...]]:
    """All k-cliques, each once, in lexicographic vertex order."""
    n = len(masks)
    out: list[tuple[int, ...]] = []
    if k == 1:
        return [(v,) for v in range(n)]

    def grow(cur: list[int], cand: int):
        if len(cur) == k:
            out.append(tuple(cur))
            return
        c = cand
        while c:
            low = c & -c
            c ^= low
            v = low.bit_length() - 1
            cur.append(v)
            grow(cur, cand & masks[v] & ~((1 << (v + 1)) - 1))
            cur.pop()

    for v in range(n):
        grow([v], masks[v] & ~((1 << (v + 1)) - 1))
    return out
