"""Structural preprocessing of guests: separators, small-class colourings,
and the randomised ordered partition (X, Y, Z, A) that prepares a guest for
embedding against a clique-factor template."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

from .cliques import clique_cover_with_defects, clique_walk, k_independent_subset
from .core import GuestGraph, MultiHypergraph, SimpleGraph
from .errors import (
    ContractViolation,
    Infeasible,
    InputError,
    PartitionFailure,
)
from .oracle import CAPS
from .rng import Rng, rng_for

log = logging.getLogger("packforge")


# -- separators ---------------------------------------------------------


def find_separator(h: SimpleGraph, eta: float, comp_cap: float | None = None):
    """Vertex set S, |S| <= eta*n, leaving components of size <= eta*n.

    Exact subset search (smallest S first) up to the oracle cap, then a
    recursive balanced-cut heuristic with post-hoc validation.  The
    heuristic can miss separators that exist; that incompleteness is
    reported as Infeasible(proved=False).  ``comp_cap`` optionally asks
    for components smaller than eta*n (the separator budget stays eta*n).
    """
    n = h.n
    limit = eta * n + 1e-9
    if comp_cap is None:
        comp_cap = limit
    comp_cap = min(comp_cap, limit)
    comps = h.components()
    if all(len(c) <= comp_cap for c in comps):
        return [], comps
    if n <= CAPS.separator:
        return _separator_exact(h, eta, comp_cap)
    return _separator_heuristic(h, eta, comp_cap)


def _components_after(h: SimpleGraph, removed: set[int]):
    keep = [v for v in range(h.n) if v not in removed]
    sub, idx = h.subgraph(keep)
    inv = {i: v for v, i in idx.items()}
    return [[inv[x] for x in comp] for comp in sub.components()]


def _separator_exact(h: SimpleGraph, eta: float, comp_cap: float):
    n = h.n
    limit = eta * n + 1e-9
    max_s = int(limit)
    for size in range(0, max_s + 1):
        for cand in itertools.combinations(range(n), size):
            comps = _components_after(h, set(cand))
            if all(len(c) <= comp_cap for c in comps):
                return list(cand), comps
    raise Infeasible(
        f"no separator of size <= {max_s} leaves components <= {comp_cap:.1f} "
        "(exhaustive)",
        proved=True,
    )


def _separator_heuristic(h: SimpleGraph, eta: float, comp_cap: float):
    n = h.n
    limit = eta * n + 1e-9
    sep: set[int] = set()
    work = [c for c in h.components() if len(c) > comp_cap]
    guard = 0
    while work:
        guard += 1
        if guard > 4 * n:
            raise Infeasible("separator heuristic failed to converge")
        comp = work.pop()
        cut = _bfs_level_cut(h, comp, comp_cap)
        if cut is None:
            raise Infeasible(
                "balanced-cut heuristic found no small level cut "
                "(the graph may still be separable)",
            )
        sep |= cut
        if len(sep) > limit:
            raise Infeasible(
                f"accumulated separator {len(sep)} exceeds eta*n = {limit:.1f}"
            )
        remaining = set(comp) - cut
        sub_comps = _components_after_within(h, remaining)
        work.extend(c for c in sub_comps if len(c) > comp_cap)
    comps = _components_after(h, sep)
    return sorted(sep), comps


def _components_after_within(h, vertices: set[int]):
    seen: set[int] = set()
    out = []
    for s in vertices:
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        stack = [s]
        while stack:
            u = stack.pop()
            for w in h.neighbors(u):
                if w in vertices and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        out.append(comp)
    return out


def _bfs_level_cut(h, comp, limit):
    """BFS level cut from an eccentric vertex, placed so the piece below
    it is as large as the cap allows (deep pieces keep their interiors
    usable); falls back to the thinnest balanced level."""
    comp_set = set(comp)
    far = comp[0]
    for _ in range(2):
        dist = _bfs_within(h, far, comp_set)
        far = max(dist, key=dist.get)
    dist = _bfs_within(h, far, comp_set)
    levels: dict[int, list[int]] = {}
    for v, d in dist.items():
        levels.setdefault(d, []).append(v)
    max_d = max(levels)
    if max_d < 2:
        return None
    # largest d whose below-part still fits the cap
    below = 0
    best_d = None
    for d in range(1, max_d):
        below += len(levels[d - 1])
        if below <= limit:
            best_d = d
        else:
            break
    if best_d is not None:
        return set(levels[best_d])
    # level 1 already overflows: cut the thinnest of the first levels
    d = min(range(1, max_d), key=lambda i: len(levels[i]))
    return set(levels[d])


def _bfs_within(h, start, allowed: set[int]):
    dist = {start: 0}
    frontier = [start]
    d = 0
    while frontier:
        nxt = []
        for u in frontier:
            for w in h.neighbors(u):
                if w in allowed and w not in dist:
                    dist[w] = d + 1
                    nxt.append(w)
        frontier = nxt
        d += 1
    return dist


def validate_separator(h: SimpleGraph, sep, eta: float, slack: float = 1.0) -> None:
    if len(set(sep)) > slack * eta * h.n + 1e-9:
        raise InputError("separator too large")
    for comp in _components_after(h, set(sep)):
        if len(comp) > slack * eta * h.n + 1e-9:
            raise InputError(f"component of size {len(comp)} too large")


# -- colourings ---------------------------------------------------------


def small_class_colouring(h: SimpleGraph, k: int, eta: float):
    """Proper (k+1)-colouring of the non-isolated vertices with
    |W_0| <= eta * (non-isolated count).

    Exact branch-and-bound below the cap; DSATUR greedy plus Kempe-chain
    drainage of W_0 above it, validated post hoc.
    """
    non_iso = [v for v in range(h.n) if h.degree(v) > 0]
    if not non_iso:
        return [[] for _ in range(k + 1)]
    budget = eta * len(non_iso) + 1e-9
    if len(non_iso) <= CAPS.colouring:
        classes = _colour_exact(h, non_iso, k, int(budget))
    else:
        classes = _colour_heuristic(h, non_iso, k, budget)
    if classes is None:
        raise Infeasible(
            f"no ({k}+1)-colouring with |W_0| <= {budget:.1f} found",
            proved=len(non_iso) <= CAPS.colouring,
        )
    return classes


def _colour_exact(h, non_iso, k, w0_budget):
    """Backtracking: try to colour with classes 1..k, spilling at most
    w0_budget vertices into class 0 (class 0 must stay independent)."""
    order = sorted(non_iso, key=lambda v: -h.degree(v))
    colour: dict[int, int] = {}
    best: list[list[int]] | None = None

    def spill_count():
        return sum(1 for c in colour.values() if c == 0)

    def feasible(v, c):
        return all(colour.get(w, -1) != c for w in h.neighbors(v))

    import sys

    sys.setrecursionlimit(10000)

    def solve(i):
        nonlocal best
        if best is not None:
            return True
        if i == len(order):
            classes = [[] for _ in range(k + 1)]
            for v, c in colour.items():
                classes[c].append(v)
            best = classes
            return True
        v = order[i]
        for c in range(1, k + 1):
            if feasible(v, c):
                colour[v] = c
                if solve(i + 1):
                    return True
                del colour[v]
        if spill_count() < w0_budget and feasible(v, 0):
            colour[v] = 0
            if solve(i + 1):
                return True
            del colour[v]
        return False

    solve(0)
    return best


def _colour_heuristic(h, non_iso, k, budget):
    # DSATUR on k+1 palette: reserve colour 0 as a last resort
    colour: dict[int, int] = {}
    sat: dict[int, set[int]] = {v: set() for v in non_iso}
    degs = {v: h.degree(v) for v in non_iso}
    unplaced = set(non_iso)
    while unplaced:
        v = max(unplaced, key=lambda u: (len(sat[u]), degs[u]))
        unplaced.discard(v)
        for c in list(range(1, k + 1)) + [0]:
            if c not in sat[v]:
                colour[v] = c
                for w in h.neighbors(v):
                    if w in sat:
                        sat[w].add(c)
                break
        else:
            return None
    # Kempe-chain drainage of class 0
    for _ in range(4):
        w0 = [v for v in non_iso if colour[v] == 0]
        if not w0:
            break
        for v in w0:
            for c in range(1, k + 1):
                if _kempe_recolour(h, colour, v, c, k):
                    break
    classes = [[] for _ in range(k + 1)]
    for v, c in colour.items():
        classes[c].append(v)
    if len(classes[0]) > budget:
        return None
    return classes


def _kempe_recolour(h, colour, v, c, k):
    """Move v to colour c by swapping the (colour[v], c) Kempe chain."""
    old = colour[v]
    chain = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in h.neighbors(u):
            cw = colour.get(w, -1)
            if w not in chain and cw in (old, c):
                chain.add(w)
                stack.append(w)
    # swapping must not recolour any other class-0 vertex into the chain
    if any(colour[u] == 0 and u != v for u in chain):
        return False
    for u in chain:
        colour[u] = c if colour[u] == old else old
    return colour[v] == c


def separator_avoiding_colour_class(
    h: SimpleGraph, eta: float, classes, t: int, separator=None, slack: float = 1.0
):
    """S := (S' + ball_{t+1}(W_0)) - ball_t(W_0); then ball_t(S) misses W_0.

    Exactly the lemma's construction; validates the size, component and
    avoidance conclusions (with a slack factor on the Delta^(t+2) bound).
    """
    if separator is None:
        separator, _ = find_separator(h, eta)
    w0 = set(classes[0])
    delta = max(h.max_degree(), 2)
    s_new = (set(separator) | h.ball(w0, t + 1)) - h.ball(w0, t)
    bound = slack * (delta ** (t + 2)) * eta * h.n + 1e-9
    if len(s_new) > bound:
        raise ContractViolation("constructed separator exceeds Delta^(t+2) eta n")
    if h.ball(s_new, t) & w0:
        raise ContractViolation("ball of separator meets W_0")
    for comp in _components_after(h, s_new):
        if len(comp) > bound:
            raise ContractViolation("component exceeds Delta^(t+2) eta n")
    return sorted(s_new)


def bandwidth_to_separator(h: SimpleGraph, ordering, b: int, target: int | None = None):
    """Cut windows of b consecutive order-positions to bound components.

    Validates the claimed bandwidth first (input error with a witness
    edge).  With no target, one median window: components <= ceil(n/2)+b.
    With a target c >= 2b, windows every c positions."""
    n = h.n
    if sorted(ordering) != list(range(n)):
        raise InputError("ordering is not a permutation of the vertices")
    pos = [0] * n
    for i, v in enumerate(ordering):
        pos[v] = i
    for u, v in h.edges():
        if abs(pos[u] - pos[v]) > b:
            raise InputError(
                f"ordering has bandwidth > {b}: witness edge ({u},{v})"
            )
    if target is None:
        mid = n // 2
        window = [ordering[i] for i in range(mid, min(mid + b, n))]
        return sorted(window)
    if target < 2 * b:
        raise InputError("target component bound must be at least 2b")
    sep = []
    i = target
    while i < n:
        sep.extend(ordering[j] for j in range(i, min(i + b, n)))
        i += target + b
    return sorted(sep)


# -- the randomised guest partition ------------------------------------


@dataclass
class PartitionParams:
    eta: float = 0.2
    eps: float = 0.1
    h: int = 6
    slack: float = 3.0
    retries: int = 8
    short_stitch: bool = True  # allow length-2k stitch walks (desk scale)
    piece_frac: float = 0.9  # pieces sized ~ eta^piece_frac * n
    y_margin: int = 1  # extra per-cluster Y headroom
    defect_rounds: int = 1  # t of the defect cover used for balancing


@dataclass
class GuestPartition:
    """Ordered partition (X_1..X_r, Y_1..Y_r, Z_1..Z_r, A) of a guest."""

    r: int
    k: int
    x_parts: list[list[int]]
    y_parts: list[list[int]]
    z_parts: list[list[int]]
    a_order: list[int]
    meta: dict = field(default_factory=dict)

    @property
    def x_all(self) -> set[int]:
        return set().union(*map(set, self.x_parts)) if self.x_parts else set()

    @property
    def y_all(self) -> set[int]:
        return set().union(*map(set, self.y_parts)) if self.y_parts else set()

    @property
    def z_all(self) -> set[int]:
        return set().union(*map(set, self.z_parts)) if self.z_parts else set()

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "k": self.k,
            "X": [sorted(p) for p in self.x_parts],
            "Y": [sorted(p) for p in self.y_parts],
            "Z": [sorted(p) for p in self.z_parts],
            "A": list(self.a_order),
        }


def _admits_partition(h: SimpleGraph, parts, allowed_pairs, within_empty) -> str | None:
    """None if fine, else a message; allowed_pairs over part indices."""
    index = {}
    for i, p in enumerate(parts):
        for v in p:
            if v in index:
                return f"vertex {v} in two parts"
            index[v] = i
    for u, v in h.edges():
        if u not in index or v not in index:
            continue
        iu, iv = index[u], index[v]
        if iu == iv:
            if within_empty:
                return f"edge ({u},{v}) inside part {iu}"
            continue
        if (min(iu, iv), max(iu, iv)) not in allowed_pairs:
            return f"edge ({u},{v}) crosses parts {iu},{iv} not in the graph"
    return None


def validate_guest_partition(
    guest: GuestGraph,
    part: GuestPartition,
    reduced: SimpleGraph,
    q_cliques: list[tuple[int, ...]],
    c_rows: list[tuple[int, ...]],
    params: PartitionParams,
) -> None:
    """Independent (B1)-(B6) checker; reads only the inputs and output."""
    h = guest.graph
    n, r, k = h.n, part.r, part.k
    m = h.m
    slack = params.slack
    all_parts = part.x_parts + part.y_parts + part.z_parts + [part.a_order]
    covered = sorted(v for p in all_parts for v in p)
    if covered != list(range(n)):
        raise ContractViolation("parts do not partition V(H)")
    if len(part.a_order) != len(c_rows):
        raise ContractViolation("A has the wrong size")
    # A is 3-independent
    for a, b in itertools.combinations(part.a_order, 2):
        if a in h.ball([b], 2):
            raise ContractViolation("(A) not 3-independent")
    # B1: degree bound
    d_cap = 2 * (1 + 1 / params.h) * m / max(n, 1)
    for a in part.a_order:
        if h.degree(a) > d_cap + 1e-9:
            raise ContractViolation(f"(B1) violated at {a}: degree {h.degree(a)}")
    # B2: neighbourhoods of A land in the prescribed Y parts, off N1(Z)
    z_all = part.z_all
    near_z = h.ball(z_all, 1) if z_all else set()
    for ell, a in enumerate(part.a_order):
        allowed = set()
        for i in c_rows[ell]:
            allowed |= set(part.y_parts[i])
        for w in h.neighbors(a):
            if w not in allowed or w in near_z:
                raise ContractViolation(f"(B2) violated at a_{ell}: vertex {w}")
    # B3: H[X] admits (Q, X); H minus E(H[X]) admits (R, X+Y+Z)
    q_pairs = set()
    for cl in q_cliques:
        for u, v in itertools.combinations(sorted(cl), 2):
            q_pairs.add((u, v))
    msg = _admits_partition(h, part.x_parts, q_pairs, within_empty=True)
    if msg:
        raise ContractViolation(f"(B3) X-partition: {msg}")
    r_pairs = set(tuple(sorted(e)) for e in reduced.edges())
    merged = [
        sorted(set(part.x_parts[i]) | set(part.y_parts[i]) | set(part.z_parts[i]))
        for i in range(r)
    ]
    x_index = {}
    for i, p in enumerate(part.x_parts):
        for v in p:
            x_index[v] = i
    rest = SimpleGraph(
        n,
        (
            (u, v)
            for u, v in h.edges()
            if not (u in x_index and v in x_index)
        ),
    )
    # A vertices excluded from the merged partition; edges at A checked by B2
    msg = _admits_partition(rest, merged, r_pairs, within_empty=True)
    if msg:
        raise ContractViolation(f"(B3) R-partition: {msg}")
    # B4: per-Q-edge balance of X edges
    tol = slack * (params.eps ** (1 / 5)) * n / ((k - 1) * r)
    centre = 2 * m / ((k - 1) * r)
    for cl in q_cliques:
        for i, j in itertools.combinations(sorted(cl), 2):
            xi, xj = set(part.x_parts[i]), set(part.x_parts[j])
            e_ij = sum(1 for u in xi for w in h.neighbors(u) if w in xj)
            if abs(e_ij - centre) > tol:
                raise ContractViolation(
                    f"(B4) violated at ({i},{j}): {e_ij} vs {centre:.1f} +- {tol:.1f}"
                )
    # B5: size control
    n_targets = part.meta.get("n_targets")
    if n_targets:
        tol5 = slack * (params.eta ** 0.25) * n
        for i in range(r):
            tot = len(part.x_parts[i]) + len(part.y_parts[i]) + len(part.z_parts[i])
            if abs(tot - n_targets[i]) > tol5:
                raise ContractViolation(f"(B5) size violated at cluster {i}")
        y_cap = slack * 2 * params.eps ** (1 / 3) * n / r
        for i in range(r):
            if len(part.y_parts[i]) > y_cap + part.meta.get("y_cap_extra", 0):
                raise ContractViolation(f"(B5) |Y_{i}| too large")
    # B6: the X hull sits inside Z
    x_all = part.x_all
    hull = h.ball(x_all, 1) - x_all if x_all else set()
    if not hull <= z_all:
        raise ContractViolation("(B6) violated: N1(X) leaks outside Z")
    z_cap = slack * 4 * (guest.max_degree_bound ** min(3 * k**3, 12)) * (
        params.eta ** 0.9
    ) * n
    if len(z_all) > z_cap:
        raise ContractViolation("(B6) |Z| above its bound")


def partition_guest(
    guest: GuestGraph,
    reduced: SimpleGraph,
    q_cliques: list[tuple[int, ...]],
    c_rows: list[tuple[int, ...]],
    c_star_rows: list[tuple[int, ...]],
    n_targets: list[int],
    params: PartitionParams,
    seed: int,
) -> GuestPartition:
    """Randomised ordered partition (X, Y, Z, A) of the guest.

    Follows the proof pipeline: colour-avoiding separation into pieces,
    random piece classification with low-degree exceptional picks,
    permutation balancing, clique walks stitching pieces to the separator
    clique, iterative layer assignment, and W_0 placement.  Concentration
    claims are validated at desk tolerances and the whole construction is
    retried with a fresh sub-seed on failure.
    """
    _check_hypotheses(guest, reduced, q_cliques, c_rows, c_star_rows, n_targets, params)
    last = None
    for attempt in range(params.retries):
        rng = rng_for(seed, "guest-partition", attempt)
        try:
            part = _partition_once(
                guest, reduced, q_cliques, c_rows, c_star_rows,
                n_targets, params, rng,
            )
            validate_guest_partition(guest, part, reduced, q_cliques, c_rows, params)
            part.meta["attempt"] = attempt
            return part
        except (ContractViolation, Infeasible) as exc:
            last = exc
            log.debug("partition attempt %d failed: %s", attempt, exc)
    raise PartitionFailure(f"guest partition failed after retries: {last}")


def _check_hypotheses(guest, reduced, q_cliques, c_rows, c_star_rows, n_targets, params):
    h = guest.graph
    n, r, k = h.n, reduced.n, guest.k
    if r % k != 0:
        raise InputError("k must divide r")
    if reduced.min_degree() < (1 - 1 / k) * r - 1e-9:
        raise InputError("(A1): reduced graph min degree below (1 - 1/k) r")
    seen = set()
    for cl in q_cliques:
        if len(cl) != k:
            raise InputError("Q clique of wrong size")
        seen |= set(cl)
        for u, v in itertools.combinations(cl, 2):
            if not reduced.has_edge(u, v):
                raise InputError("Q is not a clique factor of R")
    if seen != set(range(r)):
        raise InputError("Q does not cover [r]")
    if len(c_rows) != len(c_star_rows):
        raise InputError("C and C* rows disagree in length")
    for c, cs in zip(c_rows, c_star_rows):
        if len(c) != k - 1 or len(cs) != k:
            raise InputError("(A2): row sizes must be k-1 and k")
        if not set(c) <= set(cs):
            raise InputError("(A2): C not inside C*")
        for u, v in itertools.combinations(sorted(cs), 2):
            if not reduced.has_edge(u, v):
                raise InputError("(A2): C* is not a clique of R")
    load = [0] * r
    for cs in c_star_rows:
        for i in cs:
            load[i] += 1
    cap = params.slack * (params.eps ** (2 / 3)) * n / r + k
    if max(load, default=0) > cap:
        raise InputError("(A3): C* rows concentrate too much on one cluster")
    if len(n_targets) != r:
        raise InputError("need one size target per cluster")
    if len(c_rows) + sum(n_targets) != n:
        raise InputError("(A4): targets plus |A| must sum to n")
    dev = params.slack * (params.eps ** 0.5) * n / r
    for t in n_targets:
        if abs(t - n / r) > dev + 1:
            raise InputError("(A4): size target too far from n/r")


def _partition_once(guest, reduced, q_cliques, c_rows, c_star_rows,
                    n_targets, params, rng: Rng) -> GuestPartition:
    h = guest.graph
    n, r, k = h.n, reduced.n, guest.k
    m = h.m
    n_exc = len(c_rows)
    eta, eps = params.eta, params.eps

    # exceptional demand per (clique, missing-slot) group
    all_cliques = sorted(_r_cliques(reduced, k))
    if not all_cliques:
        raise InputError("reduced graph has no k-cliques")
    clique_index = {cl: s for s, cl in enumerate(all_cliques)}
    d_sk: dict[tuple[int, int], int] = {}
    for c_row, cs_row in zip(c_rows, c_star_rows):
        cs = tuple(sorted(cs_row))
        missing = (set(cs_row) - set(c_row)).pop()
        kk = cs.index(missing)
        d_sk[(clique_index[cs], kk)] = d_sk.get((clique_index[cs], kk), 0) + 1

    # Step 1: colouring, separator, pieces
    classes = _get_colouring(guest, k, eta, rng)
    stitch_b = 2 if params.short_stitch else 3
    avoid_t = stitch_b * k + 2
    min_pieces = r // k + len(d_sk) + 3
    comp_cap = max(3.0, min((eta ** params.piece_frac) * n, 0.9 * n / min_pieces))
    if d_sk:
        # exceptional pieces need an interior beyond the avoidance radius
        comp_cap = max(comp_cap, 2.0 * avoid_t + 4)
    sep_w = guest.separator
    if sep_w is not None:
        comps_w = _components_after(h, set(sep_w))
        if any(len(c) > 2 * comp_cap for c in comps_w):
            sep_w = None  # witness too coarse for the piece plan
    if sep_w is None:
        sep_w, _ = find_separator(h, eta, comp_cap=comp_cap)
    v0 = separator_avoiding_colour_class(
        h, eta, classes, avoid_t, separator=sep_w, slack=params.slack * 10
    )
    v0_set = set(v0)
    w0_set = set(classes[0])
    colour_of = {}
    for c in range(1, k + 1):
        for v in classes[c]:
            colour_of[v] = c
    pieces = _build_pieces(h, v0_set, w0_set, 2 * comp_cap)
    t_pieces = len(pieces)

    low_cap = 2 * (1 + 1 / params.h) * m / max(n, 1)
    low = {v for v in range(n) if h.degree(v) <= low_cap}
    forbidden_ball = h.ball(v0_set | w0_set, avoid_t)

    piece_colour_sets = []
    piece_kt = []
    for pv in pieces:
        by_c = {c: [] for c in range(1, k + 1)}
        for v in pv:
            by_c[colour_of[v]].append(v)
        piece_colour_sets.append(by_c)
        piece_kt.append(
            max(by_c, key=lambda c: sum(1 for v in by_c[c] if v in low))
        )

    exceptional_of, stock = _classify_exceptional(
        pieces, piece_colour_sets, piece_kt, d_sk, low, forbidden_ball, rng, h
    )

    a_vertices: dict[tuple[int, int], list[int]] = {}
    for key, need in d_sk.items():
        pool = sorted(stock[key])
        picked = k_independent_subset(h, pool, 3, need)
        a_vertices[key] = picked
    a_order: list[int] = [0] * n_exc
    used_by_key = {key: list(vs) for key, vs in a_vertices.items()}
    for ell, (c_row, cs_row) in enumerate(zip(c_rows, c_star_rows)):
        cs = tuple(sorted(cs_row))
        missing = (set(cs_row) - set(c_row)).pop()
        key = (clique_index[cs], cs.index(missing))
        a_order[ell] = used_by_key[key].pop()
    a_set = set(a_order)

    # Step 3/4: permutations and bin assignment
    q1 = q_cliques[0]
    q1_sorted = tuple(sorted(q1))
    plain = [t for t in range(t_pieces) if t not in exceptional_of]

    y_shadow = [0] * r  # projected Y volume per cluster from exceptional pieces
    pi_of: dict[int, tuple[int, ...]] = {}
    target_of: dict[int, tuple[int, ...]] = {}
    for t, key in exceptional_of.items():
        s, kk = key
        cs = all_cliques[s]
        kt = piece_kt[t]
        # uniform random permutation with pi(kk) = kt (the only randomness
        # feeding the exceptional neighbourhood distribution)
        others = [c for c in range(1, k + 1) if c != kt]
        rng.shuffle(others)
        pi = [0] * k
        pi[kk] = kt
        oi = 0
        for slot in range(k):
            if slot != kk:
                pi[slot] = others[oi]
                oi += 1
        pi_of[t] = tuple(pi)
        target_of[t] = cs
        for slot in range(k):
            y_shadow[cs[slot]] += len(piece_colour_sets[t][pi[slot]])

    # size bookkeeping for the plain pieces
    x_target = min(n_targets[i] - y_shadow[i] for i in range(r))
    n_tilde = [n_targets[i] - x_target - y_shadow[i] for i in range(r)]
    spread = max(n_tilde) - min(n_tilde)
    use_cover = max(n_tilde) > 0
    mult_sharp: dict[tuple[int, ...], int] = {}
    top_up = 0
    if use_cover:
        m_def = max(max(n_tilde), 1)
        cover = clique_cover_with_defects(
            reduced, k, params.defect_rounds, m_def, n_tilde,
            sigma=min(0.1, max(0.01, reduced.min_degree() / r - (1 - 1 / k))),
            seed=rng.u64() & 0xFFFF,
        )
        top_up = (params.defect_rounds + 1) * m_def
        for e in cover.edges:
            key = tuple(sorted(e))
            mult_sharp[key] = mult_sharp.get(key, 0) + 1
    x_per = x_target - top_up
    if x_per <= 0:
        raise ContractViolation("no room for X after balancing; targets too tight")

    r_prime = r // k
    bins: list[dict] = []
    for i in range(r_prime):
        bins.append({"kind": "x", "which": i, "target_v": k * x_per,
                     "target_e": 2 * m / r_prime, "cliq": tuple(sorted(q_cliques[i]))})
    for cl, mult in sorted(mult_sharp.items()):
        bins.append({"kind": "y#", "which": cl, "target_v": k * mult, "cliq": cl})
    _assign_pieces_to_bins(pieces, plain, bins, rng)

    # permutations for plain pieces: greedy balancing of per-slot volume
    for b in bins:
        _balance_bin_permutations(b, pieces, piece_colour_sets, pi_of, target_of, rng, k)

    # Step 5: stitch walks
    walk_of: dict[int, list[int]] = {}
    for t in range(t_pieces):
        pi = pi_of[t]
        start = tuple(q1_sorted[c - 1] for c in pi)
        goal = target_of[t]
        walk = _stitch_walk(reduced, k, start, goal, stitch_b)
        if t in exceptional_of and len(walk) > (stitch_b + 1) * k:
            # a long stitch would drag the exceptional picks' neighbours
            # into the Z layers and break (B2)
            raise ContractViolation(
                f"stitch for exceptional piece {t} too long ({len(walk)})"
            )
        walk_of[t] = walk

    # Step 6: layered assignment
    dist = _distances_from(h, v0_set, w0_set)
    kind_of: dict[int, str] = {}
    for b in bins:
        for t in b["pieces"]:
            kind_of[t] = b["kind"]
    x_parts: list[list[int]] = [[] for _ in range(r)]
    y_parts: list[list[int]] = [[] for _ in range(r)]
    z_parts: list[list[int]] = [[] for _ in range(r)]
    for v in sorted(v0_set):
        c = colour_of[v]
        z_parts[q1_sorted[c - 1]].append(v)
    for t, pv in enumerate(pieces):
        pi = pi_of[t]
        walk = walk_of[t]
        b_t = len(walk) // k
        to_x = kind_of.get(t) == "x"
        goal = target_of[t]
        for v in pv:
            if v in a_set:
                continue
            c = colour_of[v]
            slot = pi.index(c)  # 0-based slot with pi[slot] = c
            kp = slot + 1
            d = dist[v]
            threshold = (b_t - 2) * k + kp
            if d > threshold:
                idx = goal[slot]
                (x_parts if to_x else y_parts)[idx].append(v)
            else:
                bprime = max(1, math.ceil((d - kp) / k) + 1)
                pos = (bprime - 1) * k + kp
                z_parts[walk[pos - 1]].append(v)

    # W_0 placement
    for w in sorted(w0_set):
        nbr_idx = set()
        for i in range(r):
            xi = set(x_parts[i]) | set(y_parts[i])
            if any(u in xi for u in h.neighbors(w)):
                nbr_idx.add(i)
        cands = [
            i
            for i in range(r)
            if i not in nbr_idx and all(reduced.has_edge(i, j) for j in nbr_idx)
        ]
        if not cands:
            raise ContractViolation(f"no placement for W_0 vertex {w}")
        z_parts[cands[0]].append(w)

    part = GuestPartition(
        r=r, k=k,
        x_parts=[sorted(p) for p in x_parts],
        y_parts=[sorted(p) for p in y_parts],
        z_parts=[sorted(p) for p in z_parts],
        a_order=a_order,
        meta={
            "n_targets": list(n_targets),
            "x_target": x_per,
            "walk_b": {t: len(w) // k for t, w in walk_of.items()},
            "y_cap_extra": max(y_shadow) + top_up + spread,
        },
    )
    return part


def _get_colouring(guest, k, eta, rng):
    if guest.colouring is not None:
        classes = [list(c) for c in guest.colouring]
    else:
        classes = small_class_colouring(guest.graph, k, eta)
    coloured = set().union(*map(set, classes)) if classes else set()
    iso = [v for v in range(guest.graph.n) if v not in coloured]
    for i, v in enumerate(iso):  # isolated vertices: spread over W_1..W_k
        classes[1 + (i % k)].append(v)
    return classes


def _r_cliques(reduced, k):
    from .cliques import enumerate_cliques

    return enumerate_cliques(reduced, k)


def _build_pieces(h, v0_set, w0_set, piece_cap):
    remaining = set(range(h.n)) - v0_set - w0_set
    comps = _components_after_within(h, remaining)
    piece_cap = max(2.0, piece_cap)
    comps.sort(key=len, reverse=True)
    pieces: list[list[int]] = []
    open_piece: list[int] = []
    for comp in comps:
        if len(comp) > piece_cap:
            log.debug("oversized component of %d vertices kept whole", len(comp))
            pieces.append(comp)
            continue
        if len(open_piece) + len(comp) > piece_cap and open_piece:
            pieces.append(open_piece)
            open_piece = []
        open_piece = open_piece + comp
    if open_piece:
        pieces.append(open_piece)
    return pieces


def _classify_exceptional(pieces, piece_colour_sets, piece_kt, d_sk, low,
                          forbidden_ball, rng, h):
    """Assign pieces to the (s, k') groups that need exceptional picks.

    Greedy with randomised order: each group gets pieces until it holds
    enough low-degree, far-from-separator, 3-independent candidates."""
    exceptional_of: dict[int, tuple[int, int]] = {}
    stock: dict[tuple[int, int], list[int]] = {key: [] for key in d_sk}
    if not d_sk:
        return exceptional_of, stock
    # smallest pieces first (they cost the least X volume), random tie-break
    order = list(range(len(pieces)))
    rng.shuffle(order)
    order.sort(key=lambda t: len(pieces[t]))

    def usable(t):
        # pick the colour class with the most usable candidates; any class
        # holding >= 1/k of the piece's low-degree vertices qualifies
        best_c, best = None, []
        for c, verts in piece_colour_sets[t].items():
            cand = [v for v in verts if v in low and v not in forbidden_ball]
            if len(cand) > len(best):
                best_c, best = c, cand
        if best_c is not None:
            piece_kt[t] = best_c
        return best

    needs = dict(d_sk)
    for key in sorted(needs, key=lambda kk: -needs[kk]):
        for t in order:
            if t in exceptional_of:
                continue
            cand = usable(t)
            if not cand:
                continue
            # count a 3-independent subset greedily
            got = []
            blocked: set[int] = set()
            for v in sorted(cand):
                if v not in blocked:
                    got.append(v)
                    blocked |= h.ball([v], 2)
            exceptional_of[t] = key
            stock[key].extend(got)
            if len(stock[key]) >= needs[key]:
                break
        if len(stock[key]) < needs[key]:
            raise ContractViolation(
                f"not enough exceptional candidates for group {key}: "
                f"{len(stock[key])} of {needs[key]}"
            )
    return exceptional_of, stock


def _assign_pieces_to_bins(pieces, plain, bins, rng):
    """Largest pieces first into the most deficient bin (by volume)."""
    for b in bins:
        b["pieces"] = []
        b["vol"] = 0
    order = sorted(plain, key=lambda t: -len(pieces[t]))
    for t in order:
        deficits = [(b["target_v"] - b["vol"], idx) for idx, b in enumerate(bins)]
        deficits.sort(key=lambda p: (-p[0], p[1]))
        # random tie-break among near-equal deficits
        top = [idx for d, idx in deficits if d >= deficits[0][0] - 1]
        choice = top[rng.randrange(len(top))]
        bins[choice]["pieces"].append(t)
        bins[choice]["vol"] += len(pieces[t])


def _bin_kind_of(bins, t):
    for b in bins:
        if t in b["pieces"]:
            return b["kind"]
    return None


def _balance_bin_permutations(b, pieces, piece_colour_sets, pi_of, target_of, rng, k):
    """Choose per-piece colour permutations minimising slot imbalance."""
    slot_load = [0] * k
    for t in b["pieces"]:
        by_c = piece_colour_sets[t]
        perms = list(itertools.permutations(range(1, k + 1)))
        rng.shuffle(perms)
        best, best_score = None, None
        for perm in perms:
            trial = list(slot_load)
            for slot in range(k):
                trial[slot] += len(by_c[perm[slot]])
            score = max(trial) - min(trial)
            if best_score is None or score < best_score:
                best, best_score = perm, score
        pi_of[t] = tuple(best)
        for slot in range(k):
            slot_load[slot] += len(by_c[best[slot]])
        target_of[t] = b["cliq"]


def _stitch_walk(reduced, k, start, goal, stitch_b):
    """Walk from the separator clique to the piece's clique.

    With short stitches enabled, a direct 2k walk is used when its windows
    are cliques; otherwise fall back to the 3k..3k^3 walk."""
    if stitch_b == 2:
        walk = list(start) + list(goal)
        ok = True
        for i in range(len(walk)):
            for j in range(i + 1, min(i + k, len(walk))):
                if walk[i] == walk[j] or not reduced.has_edge(walk[i], walk[j]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return walk
    return clique_walk(reduced, k, start, goal)


def _distances_from(h, v0_set, w0_set):
    """BFS distances from the separator in H minus W_0."""
    dist = [-1] * h.n
    frontier = []
    for v in v0_set:
        dist[v] = 0
        frontier.append(v)
    d = 0
    while frontier:
        nxt = []
        for u in frontier:
            for w in h.neighbors(u):
                if dist[w] == -1 and w not in w0_set:
                    dist[w] = d + 1
                    nxt.append(w)
        frontier = nxt
        d += 1
    big = 10 * (h.n + 1)
    return [d if d != -1 else big for d in dist]
