"""Clique-factor and clique-system constructions on dense graphs."""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .core import MultiHypergraph, SimpleGraph
from .errors import BudgetExhausted, Infeasible, InputError, OracleScaleError
from .oracle import CAPS
from .rng import rng_for


@dataclass
class CliqueSystem:
    """A hypergraph whose every edge induces a complete subgraph of base."""

    base: SimpleGraph
    cliques: MultiHypergraph
    k: int

    def validate(self) -> None:
        if self.cliques.rank > self.k:
            raise InputError(f"clique system rank {self.cliques.rank} > k={self.k}")
        for e in self.cliques.edges:
            es = sorted(e)
            for i, u in enumerate(es):
                for v in es[i + 1 :]:
                    if not self.base.has_edge(u, v):
                        raise InputError(f"hyperedge {es} not a clique: ({u},{v})")


def enumerate_cliques(g: SimpleGraph, k: int, budget: int = 2_000_000):
    """All k-cliques of g, each once, in lexicographic order."""
    if k < 1:
        raise InputError("k must be positive")
    if k > CAPS.clique_k and g.n > CAPS.clique_n:
        raise OracleScaleError(
            f"clique enumeration budget: need k <= {CAPS.clique_k} or "
            f"n <= {CAPS.clique_n}"
        )
    if g.n <= 63:
        return kernels.enum_cliques(g.adjacency_masks(), k)
    out: list[tuple[int, ...]] = []

    def grow(cur: list[int], cand: list[int]):
        if len(out) > budget:
            raise OracleScaleError("clique enumeration budget exceeded")
        if len(cur) == k:
            out.append(tuple(cur))
            return
        for idx, v in enumerate(cand):
            cur.append(v)
            grow(cur, [w for w in cand[idx + 1 :] if g.has_edge(v, w)])
            cur.pop()

    grow([], list(range(g.n)))
    return out


def _validate_factor(g: SimpleGraph, k: int, cliques) -> None:
    seen: set[int] = set()
    for q in cliques:
        if len(q) != k:
            raise InputError("factor part of wrong size")
        for v in q:
            if v in seen:
                raise InputError("factor parts overlap")
            seen.add(v)
        ql = sorted(q)
        for i, u in enumerate(ql):
            for v in ql[i + 1 :]:
                if not g.has_edge(u, v):
                    raise InputError(f"factor part {ql} is not a clique")
    if seen != set(range(g.n)):
        raise InputError("factor does not cover every vertex")


def k_factor(
    g: SimpleGraph, k: int, seed: int = 0, restarts: int = 400
) -> list[tuple[int, ...]]:
    """Vertex-disjoint K_k's covering V(g) exactly once.

    k=2 is solved exactly by maximum matching at any size.  For k >= 3 the
    search is exact (proved infeasible on failure) up to the oracle cap and
    a randomised greedy with restarts above it (failure then only means
    the budget ran out).  Guaranteed to succeed for min degree >=
    (1 - 1/k) n.
    """
    n = g.n
    if k <= 0:
        raise InputError("k must be positive")
    if n % k != 0:
        raise InputError(f"k={k} does not divide n={n}")
    if n == 0:
        return []
    if k == 1:
        return [(v,) for v in range(n)]
    if k == 2:
        mate = kernels.max_matching(n, [sorted(g.neighbors(v)) for v in range(n)])
        if any(m == -1 for m in mate):
            raise Infeasible("no perfect matching exists", proved=True)
        return sorted({(v, mate[v]) for v in range(n) if v < mate[v]})

    if n <= CAPS.kfactor:
        res = kernels.clique_factor(g.adjacency_masks(), k)
        if res is None:
            raise Infeasible(f"no K_{k}-factor exists (exhaustive)", proved=True)
        return res

    # randomised greedy: cover the most constrained vertex first, restart on
    # failure; dense instances (Hajnal-Szemeredi regime) succeed quickly
    rng = rng_for(seed, "k_factor")
    for _ in range(restarts):
        uncovered = set(range(n))
        parts: list[tuple[int, ...]] = []
        ok = True
        while uncovered:
            v = min(
                uncovered,
                key=lambda u: sum(1 for w in g.neighbors(u) if w in uncovered),
            )
            cands = [w for w in g.neighbors(v) if w in uncovered]
            rng.shuffle(cands)
            part = _grow_clique(g, v, cands, k)
            if part is None:
                ok = False
                break
            parts.append(part)
            uncovered -= set(part)
        if ok:
            _validate_factor(g, k, parts)
            return sorted(tuple(sorted(p)) for p in parts)
    raise BudgetExhausted(
        f"K_{k}-factor search budget exhausted after {restarts} restarts"
    )


def _grow_clique(g, v, cands, k):
    cur = [v]

    def grow(pool):
        if len(cur) == k:
            return True
        for idx, w in enumerate(pool):
            cur.append(w)
            if grow([x for x in pool[idx + 1 :] if g.has_edge(w, x)]):
                return True
            cur.pop()
        return False

    if grow(cands):
        return tuple(sorted(cur))
    return None


def clique_cover_with_defects(
    g: SimpleGraph,
    k: int,
    t: int,
    m: int,
    defects: list[int],
    sigma: float = 0.1,
    seed: int = 0,
) -> MultiHypergraph:
    """Multi-k-graph of cliques with d_H(v) - d_v = (t+1)m +- 1 for all v.

    Iterative levelling: while the excess p(v) = d_H(v) - d_v has spread
    >= 2, add K_k-factors of g minus balancing sets (sizes divisible by k)
    chosen so that high-excess vertices are skipped; finish by adding whole
    factors until the target (t+1)m is met.
    """
    n = g.n
    if n % k != 0:
        raise InputError("k must divide n")
    if len(defects) != n:
        raise InputError("defect vector length != n")
    if any(d < 0 or d > m for d in defects):
        raise InputError("defects must lie in {0..m}")
    if t < 1:
        raise InputError("t must be >= 1")
    if g.min_degree() < (1 - 1 / k + sigma) * n - 1e-9:
        raise InputError(
            f"min degree {g.min_degree()} below (1 - 1/k + sigma) n"
        )

    hyper: list[tuple[int, ...]] = []
    deg = [0] * n

    def p(v: int) -> int:
        return deg[v] - defects[v]

    def add_factor(excluded: set[int], label) -> None:
        keep = sorted(set(range(n)) - excluded)
        sub, idx = g.subgraph(keep)
        inv = {i: v for v, i in idx.items()}
        parts = k_factor(sub, k, seed=rng_for(seed, "ccd", label).u64() & 0xFFFF)
        for q in parts:
            part = tuple(sorted(inv[x] for x in q))
            hyper.append(part)
            for v in part:
                deg[v] += 1

    rounds = 0
    while max(p(v) for v in range(n)) - min(p(v) for v in range(n)) >= 2:
        rounds += 1
        if rounds > (t + 2) * (m + 2) + 4:
            raise InputError("levelling failed to converge; check inputs")
        min_p = min(p(v) for v in range(n))
        a_set = sorted(
            (v for v in range(n) if p(v) > min_p), key=lambda v: -p(v)
        )
        if len(a_set) >= k:
            s = (-len(a_set)) % k
            a_prime = a_set[:s]
            rest = a_set[s:]
            deleted = rest[-(k - s):] if k - s > 0 else []
            a_dbl = a_prime + rest[: len(rest) - len(deleted)]
            # split A'' into t chunks of k-divisible size
            blocks = [a_dbl[i : i + k] for i in range(0, len(a_dbl), k)]
            chunks: list[list[int]] = [[] for _ in range(t)]
            for bi, blk in enumerate(blocks):
                chunks[bi % t].extend(blk)
            last = list(a_prime) + list(deleted)
            balancing = chunks + [last]
            for ci, chunk in enumerate(balancing):
                add_factor(set(chunk), (rounds, ci))
        else:
            pool = [v for v in range(n) if v not in a_set]
            extra = pool[: 2 * k - 2 * len(a_set)]
            b_set = set(a_set) | set(extra[: k - len(a_set)])
            c_set = set(a_set) | set(extra[k - len(a_set) :])
            add_factor(b_set, (rounds, "b"))
            add_factor(c_set, (rounds, "c"))

    top = max(p(v) for v in range(n))
    if top > (t + 1) * m:
        raise InputError("levelling overshot the (t+1)m target; t too small")
    whole = None
    for _ in range((t + 1) * m - top):
        if whole is None:
            whole_parts = k_factor(g, k, seed=rng_for(seed, "ccd-top").u64() & 0xFFFF)
            whole = [tuple(sorted(q)) for q in whole_parts]
        for part in whole:
            hyper.append(part)
            for v in part:
                deg[v] += 1

    target = (t + 1) * m
    for v in range(n):
        if abs(deg[v] - defects[v] - target) > 1:
            raise InputError(
                f"defect cover postcondition failed at vertex {v}: "
                f"{deg[v] - defects[v]} vs {target} +- 1"
            )
    return MultiHypergraph(n, hyper)


def extend_cliques(
    reduced: SimpleGraph, system: CliqueSystem, q: int
) -> CliqueSystem:
    """Extend each (k-1)-clique by one vertex to a k-clique of the reduced
    graph, keeping the per-vertex load at most (k+1)q.

    Matching on the auxiliary bipartite graph between cliques and
    (vertex, slot) pairs with kq slots per vertex; an uncovered clique
    yields a Hall-violator witness.
    """
    k = system.k + 1
    r = reduced.n
    cliques = [tuple(sorted(e)) for e in system.cliques.edges]
    s = len(cliques)
    if s == 0:
        return CliqueSystem(reduced, MultiHypergraph(r, []), k)
    if system.cliques.max_degree() > q:
        raise InputError("input clique system exceeds declared degree bound q")

    slots = k * q
    # bipartite graph: nodes [0..s) are cliques, then (v, j) slots
    n_nodes = s + r * slots
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    common: list[list[int]] = []
    for i, cl in enumerate(cliques):
        comm = [
            v
            for v in range(r)
            if v not in cl and all(reduced.has_edge(v, u) for u in cl)
        ]
        common.append(comm)
        for v in comm:
            for j in range(slots):
                node = s + v * slots + j
                adj[i].append(node)
                adj[node].append(i)
    mate = kernels.max_matching(n_nodes, adj)
    unmatched = [i for i in range(s) if mate[i] == -1]
    if unmatched:
        violator = _hall_violator(s, adj, mate, unmatched)
        raise Infeasible(
            f"clique extension infeasible: {len(violator)} cliques share too "
            f"few common neighbours",
            proved=True,
            witness=[cliques[i] for i in violator],
        )
    out = []
    for i, cl in enumerate(cliques):
        node = mate[i] - s
        v = node // slots
        out.append(tuple(sorted(cl + (v,))))
    result = CliqueSystem(reduced, MultiHypergraph(r, out), k)
    if result.cliques.max_degree() > (k + 1) * q:
        raise InputError("extension exceeded the (k+1)q degree bound")
    result.validate()
    return result


def _hall_violator(s, adj, mate, unmatched):
    """Left vertices reachable by alternating paths from unmatched lefts."""
    reach = set(unmatched)
    frontier = list(unmatched)
    while frontier:
        i = frontier.pop()
        for node in adj[i]:
            j = mate[node]
            if j != -1 and j not in reach:
                reach.add(j)
                frontier.append(j)
    return sorted(reach)


def clique_walk(
    reduced: SimpleGraph, k: int, q1, q2, seed: int = 0
) -> list[int]:
    """Walk z_1..z_t with every k consecutive vertices a clique, starting
    with q1 in order and ending with q2 in order, 3k <= t <= 3k^3, k | t.

    Breadth-first search over ordered clique states; a state can pad
    itself by cycling through its own vertices, so the shortest admissible
    length is found by BFS + padding.  Deterministic: neighbours explored
    in ascending vertex order.
    """
    q1, q2 = tuple(q1), tuple(q2)
    if len(q1) != k or len(q2) != k:
        raise InputError("endpoint cliques must have k vertices")
    for q in (q1, q2):
        for i, u in enumerate(q):
            for v in q[i + 1 :]:
                if not reduced.has_edge(u, v):
                    raise InputError(f"endpoint {q} is not a clique")
    max_t = 3 * k**3
    # BFS over (state, steps mod k); first arrival is the shortest
    start = q1
    dist: dict[tuple[tuple[int, ...], int], int] = {(start, 0): 0}
    parent: dict[tuple[tuple[int, ...], int], tuple] = {}
    frontier = [(start, 0)]
    steps = 0
    explored = 0
    goal_key = None
    if start == q2:
        goal_key = (start, 0)
    while frontier and goal_key is None and steps < max_t - k:
        steps += 1
        nxt = []
        for state, res in frontier:
            window = state[1:]
            cands = set(reduced.neighbors(window[0])) if window else set(
                range(reduced.n)
            )
            for u in window[1:]:
                cands &= reduced.neighbors(u)
            for w in sorted(cands):
                ns = window + (w,)
                key = (ns, steps % k)
                if key not in dist:
                    dist[key] = steps
                    parent[key] = (state, res)
                    explored += 1
                    if ns == q2 and steps % k == 0:
                        goal_key = key
                        break
                    nxt.append(key)
            if goal_key:
                break
        frontier = nxt
    if goal_key is None:
        raise Infeasible(
            f"no clique walk within {max_t} steps ({explored} states explored); "
            "the reduced graph is too sparse",
            witness=explored,
        )
    # reconstruct
    path_states = [goal_key]
    while path_states[-1] in parent:
        path_states.append(parent[path_states[-1]])
    path_states.reverse()
    walk = list(path_states[0][0])
    for st, _ in path_states[1:]:
        walk.append(st[-1])
    # BFS length is divisible by k; if below 3k, prefix whole self-cycles
    # of q1 (appending q1's own vertices in order returns to the same
    # state, so each prefix copy adds exactly k)
    if len(walk) < 3 * k:
        pads = (3 * k - len(walk) + k - 1) // k
        walk = list(q1) * pads + walk
    _validate_walk(reduced, k, q1, q2, walk)
    return walk


def _validate_walk(reduced, k, q1, q2, walk) -> None:
    t = len(walk)
    if not (3 * k <= t <= 3 * k**3) or t % k != 0:
        raise InputError(f"walk length {t} violates (B1)")
    for i in range(t):
        for j in range(i + 1, min(i + k, t)):
            if not reduced.has_edge(walk[i], walk[j]):
                raise InputError(
                    f"walk positions {i},{j} not adjacent: ({walk[i]},{walk[j]})"
                )
    if tuple(walk[:k]) != tuple(q1) or tuple(walk[-k:]) != tuple(q2):
        raise InputError("walk endpoints do not match (B3)")


def k_independent_subset(
    h: SimpleGraph, x_set, k: int, t: int
) -> list[int]:
    """Greedy k-independent subset of X of size exactly t.

    Picks the smallest available vertex and deletes its (k-1)-ball;
    raises if X runs out first (the caller's size precondition failed).
    """
    if t < 0:
        raise InputError("t must be >= 0")
    avail = sorted(set(x_set))
    avail_set = set(avail)
    out: list[int] = []
    for v in avail:
        if v not in avail_set:
            continue
        out.append(v)
        if len(out) == t:
            return out
        avail_set -= h.ball([v], k - 1)
    raise Infeasible(
        f"only {len(out)} of {t} k-independent vertices found in X",
        proved=False,
    )
