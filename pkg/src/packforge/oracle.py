"""Exact brute-force oracles used to cross-check the search heuristics.

All oracles are exhaustive and carry soft size caps (configuration values,
not hard limits): results are proofs within the cap, errors above it.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .core import SimpleGraph, norm_edge
from .errors import OracleScaleError


@dataclass
class OracleCaps:
    """Soft caps; acceptance tests scale them."""

    embed: int = 14
    regular_pair_side: int = 12
    kfactor: int = 14
    separator: int = 18
    colouring: int = 25
    clique_n: int = 60
    clique_k: int = 5


CAPS = OracleCaps()


def _embed_order(guest: SimpleGraph) -> list[int]:
    """Connectivity-first order: each vertex after the first in its
    component has an already-placed neighbour, which keeps candidate sets
    small during backtracking."""
    order: list[int] = []
    placed = [False] * guest.n
    verts = sorted(range(guest.n), key=lambda v: -guest.degree(v))
    for s in verts:
        if placed[s]:
            continue
        placed[s] = True
        order.append(s)
        frontier = sorted(guest.neighbors(s), key=lambda v: -guest.degree(v))
        queue = list(frontier)
        while queue:
            v = queue.pop(0)
            if placed[v]:
                continue
            placed[v] = True
            order.append(v)
            queue.extend(
                sorted(
                    (w for w in guest.neighbors(v) if not placed[w]),
                    key=lambda w: -guest.degree(w),
                )
            )
    return order


def exhaustive_subgraph_embed(
    host: SimpleGraph,
    guest: SimpleGraph,
    forbidden_edges=(),
    cap: int | None = None,
) -> list[int] | None:
    """Injective edge-preserving map avoiding the forbidden host edges.

    Exhaustive backtracking: a None return proves no embedding exists.
    """
    cap = CAPS.embed if cap is None else cap
    if host.n > cap:
        raise OracleScaleError(
            f"host has {host.n} vertices, oracle cap is {cap}"
        )
    if guest.n > host.n:
        return None
    host_masks = host.adjacency_masks()
    guest_masks = guest.adjacency_masks()
    forb = [0] * host.n
    for e in forbidden_edges:
        u, v = norm_edge(*e)
        forb[u] |= 1 << v
        forb[v] |= 1 << u
    order = _embed_order(guest)
    return kernels.embed_backtrack(host_masks, guest_masks, order, forb)


def embed_by_permutations(host: SimpleGraph, guest: SimpleGraph) -> list[int] | None:
    """Independent oracle: try every injection host <- guest (n <= 7)."""
    from itertools import permutations

    if host.n > 7:
        raise OracleScaleError("permutation oracle capped at 7 vertices")
    gedges = list(guest.edges())
    for perm in permutations(range(host.n), guest.n):
        if all(host.has_edge(perm[x], perm[y]) for x, y in gedges):
            return list(perm)
    return None


def kfactor_oracle(g: SimpleGraph, k: int, cap: int | None = None):
    """Exact K_k-factor, or None (proved nonexistent).  n <= cap."""
    cap = CAPS.kfactor if cap is None else cap
    if g.n > cap:
        raise OracleScaleError(f"k-factor oracle cap is {cap}, got n={g.n}")
    if k <= 0 or g.n % k != 0:
        return None
    return kernels.clique_factor(g.adjacency_masks(), k)


def rfactor_oracle(g: SimpleGraph, r: int, cap: int = 10) -> bool:
    """Does a spanning r-regular subgraph exist?  Backtracking over the
    incident-edge choices of each vertex in order, with degree pruning."""
    if g.n > cap:
        raise OracleScaleError(f"r-factor oracle cap is {cap}, got n={g.n}")
    n = g.n
    if r == 0:
        return True
    if r >= n or any(g.degree(v) < r for v in range(n)):
        return False
    if (n * r) % 2 == 1:
        return False
    # need[v]: residual degree demand; process vertices in order, choosing
    # the subset of edges to later vertices
    adj_fwd = [sorted(w for w in g.neighbors(v) if w > v) for v in range(n)]
    need = [r] * n

    def solve(v: int) -> bool:
        if v == n:
            return all(x == 0 for x in need)
        cands = [w for w in adj_fwd[v] if need[w] > 0]
        want = need[v]
        if want < 0 or want > len(cands):
            return False
        if want == 0:
            # no forward edge from v may be forced; just recurse
            return solve(v + 1)

        def choose(idx: int, left: int) -> bool:
            if left == 0:
                return solve(v + 1)
            if len(cands) - idx < left:
                return False
            # take cands[idx]
            w = cands[idx]
            need[w] -= 1
            need[v] -= 1
            if choose(idx + 1, left - 1):
                return True
            need[w] += 1
            need[v] += 1
            return choose(idx + 1, left)

        return choose(0, want)

    return solve(0)
