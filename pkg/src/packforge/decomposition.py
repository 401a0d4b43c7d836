"""Approximate decomposition machinery: fractional clique packing and
rounding, spanning regular subgraphs, hypergraph matching partitions, and
the factor-group decomposition of reduced multigraphs."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .cliques import enumerate_cliques
from .core import MultiGraph, MultiHypergraph, SimpleGraph, norm_edge
from .errors import BudgetExhausted, Infeasible, InputError, StagedError
from .rng import Rng, rng_for

log = logging.getLogger("packforge")

EXACT_LP_CLIQUE_CAP = 200


@dataclass
class FractionalPacking:
    """Weights on clique copies with per-edge load at most one."""

    k: int
    weights: dict[tuple[int, ...], object]  # Fraction in exact mode, float otherwise
    value: object
    exact: bool
    duality_gap: float = 0.0

    def validate(self, g: SimpleGraph, tol: float = 1e-9) -> None:
        load: dict[tuple[int, int], object] = {}
        for clique, w in self.weights.items():
            if w < 0 or w > 1 + tol:
                raise InputError(f"weight {w} outside [0,1]")
            for u, v in itertools.combinations(clique, 2):
                if not g.has_edge(u, v):
                    raise InputError(f"clique {clique} not in graph")
                e = norm_edge(u, v)
                load[e] = load.get(e, 0) + w
        limit = 1 if self.exact else 1 + tol
        for e, x in load.items():
            if x > limit:
                raise InputError(f"edge {e} overloaded: {x}")
        cap = Fraction(g.m, math.comb(self.k, 2)) if self.exact else (
            g.m / math.comb(self.k, 2) + tol
        )
        if self.value > cap:
            raise InputError("packing value exceeds e(G)/e(K_k)")


def _simplex_max(c: list[Fraction], rows: list[list[Fraction]], rhs: list[Fraction]):
    """Exact primal simplex for max c.x, Ax <= b, x >= 0, b >= 0.

    Dense tableau, Bland's rule.  Returns (value, x)."""
    m, n = len(rows), len(c)
    # tableau: m constraint rows + objective row; columns: n vars, m slacks, rhs
    tab = [
        [rows[i][j] for j in range(n)]
        + [Fraction(1) if t == i else Fraction(0) for t in range(m)]
        + [rhs[i]]
        for i in range(m)
    ]
    obj = [-cj for cj in c] + [Fraction(0)] * (m + 1)
    basis = [n + i for i in range(m)]
    total = n + m
    while True:
        enter = next((j for j in range(total) if obj[j] < 0), None)
        if enter is None:
            break
        best_ratio = None
        leave = None
        for i in range(m):
            if tab[i][enter] > 0:
                ratio = tab[i][total] / tab[i][enter]
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave is None:
            raise InputError("unbounded LP (cannot happen for packing)")
        piv = tab[leave][enter]
        tab[leave] = [x / piv for x in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter]:
                f = tab[i][enter]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[leave])]
        if obj[enter]:
            f = obj[enter]
            obj = [a - f * b for a, b in zip(obj, tab[leave])]
        basis[leave] = enter
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i][total]
    return obj[total], x


def fractional_clique_packing(
    g: SimpleGraph, k: int, tolerance: float = 1e-9
) -> FractionalPacking:
    """Optimal fractional K_k-packing.

    Exact rational simplex when at most 200 clique copies exist; otherwise
    scipy's LP solver with the reported duality gap.  Feasible by
    construction; value within tolerance of the LP optimum.
    """
    cliques = enumerate_cliques(g, k)
    if not cliques:
        return FractionalPacking(k, {}, Fraction(0), exact=True)
    # edges that appear in at least one clique constrain the LP
    edge_ids: dict[tuple[int, int], int] = {}
    for cl in cliques:
        for u, v in itertools.combinations(cl, 2):
            edge_ids.setdefault(norm_edge(u, v), len(edge_ids))
    m, n = len(edge_ids), len(cliques)
    if n <= EXACT_LP_CLIQUE_CAP:
        rows = [[Fraction(0)] * n for _ in range(m)]
        for j, cl in enumerate(cliques):
            for u, v in itertools.combinations(cl, 2):
                rows[edge_ids[norm_edge(u, v)]][j] = Fraction(1)
        value, x = _simplex_max(
            [Fraction(1)] * n, rows, [Fraction(1)] * m
        )
        weights = {cl: x[j] for j, cl in enumerate(cliques) if x[j] > 0}
        pack = FractionalPacking(k, weights, value, exact=True)
        pack.validate(g)
        return pack

    import numpy as np
    from scipy import optimize, sparse

    data, ri, ci = [], [], []
    for j, cl in enumerate(cliques):
        for u, v in itertools.combinations(cl, 2):
            ri.append(edge_ids[norm_edge(u, v)])
            ci.append(j)
            data.append(1.0)
    a_ub = sparse.coo_matrix((data, (ri, ci)), shape=(m, n))
    res = optimize.linprog(
        c=-np.ones(n), A_ub=a_ub.tocsr(), b_ub=np.ones(m),
        bounds=(0, 1), method="highs",
    )
    if not res.success:
        raise InputError(f"LP solver failed: {res.message}")
    # dual bound from the equilibrated marginals certifies the gap
    duals = np.maximum(-res.ineqlin.marginals, 0.0)
    dual_value = float(duals.sum())
    x = np.clip(res.x, 0.0, 1.0)
    # repair tiny overloads from floating error so feasibility is strict
    loads = a_ub.tocsr() @ x
    over = loads > 1.0
    if over.any():
        scale = 1.0 / float(loads.max())
        x = x * scale
    weights = {
        cl: float(x[j]) for j, cl in enumerate(cliques) if x[j] > tolerance
    }
    value = float(sum(weights.values()))
    pack = FractionalPacking(
        k, weights, value, exact=False,
        duality_gap=abs(dual_value - float(-res.fun)),
    )
    pack.validate(g, tol=max(tolerance, 1e-7))
    return pack


@dataclass
class IntegralPacking:
    cliques: list[tuple[int, ...]]
    shortfall: float  # fractional value minus achieved count


def integral_from_fractional(
    g: SimpleGraph,
    k: int,
    frac: FractionalPacking,
    seed: int = 0,
    swap_passes: int = 12,
) -> IntegralPacking:
    """Edge-disjoint clique copies rounded from a fractional packing.

    Weight-proportional randomised greedy followed by local augmentation
    (re-add after single removal when it gains).  The shortfall against
    the fractional value is measured, not guaranteed.
    """
    all_cliques = enumerate_cliques(g, k)
    if not all_cliques:
        return IntegralPacking([], float(frac.value))
    rng = rng_for(seed, "rounding")
    weights = {cl: float(frac.weights.get(cl, 0.0)) for cl in all_cliques}

    # weighted random order (Efraimidis-Spirakis keys), zero weights last
    def sort_key(cl):
        w = weights[cl]
        u = max(rng.random(), 1e-300)
        if w <= 0:
            return (1, -u)
        return (0, -(u ** (1.0 / w)))

    order = sorted(all_cliques, key=sort_key)
    edge_of = {
        cl: [norm_edge(u, v) for u, v in itertools.combinations(cl, 2)]
        for cl in all_cliques
    }
    used: set[tuple[int, int]] = set()
    packed: list[tuple[int, ...]] = []

    def addable(cl, skip=()):
        return all(e not in used or e in skip for e in edge_of[cl])

    def add(cl):
        packed.append(cl)
        used.update(edge_of[cl])

    for cl in order:
        if addable(cl):
            add(cl)

    for _ in range(swap_passes):
        improved = False
        # plain additions first
        for cl in all_cliques:
            if addable(cl):
                add(cl)
                improved = True
        # remove one, try to add two
        idx = 0
        while idx < len(packed):
            victim = packed[idx]
            freed = set(edge_of[victim])
            gains = []
            tentative_used: set[tuple[int, int]] = set()
            for cl in all_cliques:
                if cl == victim:
                    continue
                es = edge_of[cl]
                if all(
                    (e not in used or e in freed) and e not in tentative_used
                    for e in es
                ):
                    gains.append(cl)
                    tentative_used.update(es)
                    if len(gains) == 2:
                        break
            if len(gains) >= 2:
                used.difference_update(freed)
                packed.pop(idx)
                for cl in gains:
                    add(cl)
                improved = True
            else:
                idx += 1
        if not improved:
            break
    return IntegralPacking(packed, float(frac.value) - len(packed))


def regular_spanning_subgraph(g: SimpleGraph, r: int) -> SimpleGraph:
    """Spanning r-regular subgraph via the degree-constrained matching gadget.

    Each vertex v becomes d(v) edge-end nodes plus d(v)-r core nodes joined
    to all its edge-ends; each graph edge joins one edge-end of each
    endpoint.  Perfect matchings of the gadget correspond exactly to
    r-factors (matched cross edges = factor edges), so infeasibility is a
    proof.  The CKO-style degree conditions are only a feasibility hint
    and are logged, never enforced.
    """
    if r < 0 or r % 2 != 0:
        raise InputError("degree r must be even and nonnegative")
    n = g.n
    if r == 0:
        return SimpleGraph(n)
    if any(g.degree(v) < r for v in range(n)):
        raise Infeasible(
            f"a vertex has degree below r={r}; no r-factor exists", proved=True
        )
    if g.min_degree() < 0.5 * n:
        log.warning(
            "regular_spanning_subgraph: min degree %d below n/2; existence "
            "is not guaranteed by the degree condition", g.min_degree(),
        )
    if g.max_degree() > g.min_degree() + max(1, 0.01 * n) and r > g.min_degree() - 0.1 * n:
        log.warning("regular_spanning_subgraph: graph far from regular")

    # gadget layout
    end_base = [0] * n
    core_base = [0] * n
    total = 0
    for v in range(n):
        end_base[v] = total
        total += g.degree(v)
        core_base[v] = total
        total += g.degree(v) - r
    adj: list[list[int]] = [[] for _ in range(total)]
    end_slot = [0] * n
    cross: list[tuple[int, int, int, int]] = []  # (u, v, end_u, end_v)
    for u, v in sorted(g.edges()):
        eu = end_base[u] + end_slot[u]
        ev = end_base[v] + end_slot[v]
        end_slot[u] += 1
        end_slot[v] += 1
        adj[eu].append(ev)
        adj[ev].append(eu)
        cross.append((u, v, eu, ev))
    for v in range(n):
        for c in range(core_base[v], core_base[v] + g.degree(v) - r):
            for e in range(end_base[v], end_base[v] + g.degree(v)):
                adj[c].append(e)
                adj[e].append(c)
    mate = kernels.max_matching(total, adj)
    if any(m == -1 for m in mate):
        raise Infeasible(f"no spanning {r}-regular subgraph exists", proved=True)
    chosen = [(u, v) for u, v, eu, ev in cross if mate[eu] == ev]
    out = SimpleGraph(n, chosen)
    bad = [v for v in range(n) if out.degree(v) != r]
    if bad:
        raise InputError(f"gadget postcondition failed at vertices {bad[:4]}")
    return out


# -- hypergraph matching partitions ------------------------------------


def validate_matching_partition(h: MultiHypergraph, classes: list[list[int]]) -> None:
    seen: list[int] = []
    for cls in classes:
        occupied: set[int] = set()
        for ei in cls:
            e = h.edges[ei]
            if occupied & e:
                raise InputError("class is not a matching")
            occupied |= e
        seen.extend(cls)
    if sorted(seen) != list(range(len(h.edges))):
        raise InputError("classes do not partition the edge set")


def hypergraph_matching_partition(
    h: MultiHypergraph,
    gamma: float,
    seed: int = 0,
    nibble_rounds: int = 20,
    theta: float = 1.0,
    compress_passes: int = 40,
) -> list[list[int]]:
    """Partition E(H) into matchings, aiming for (1+gamma) * max degree.

    Semi-random nibble (rounds of independent activation at rate theta
    per unit degree with conflict resolution), greedy completion, then
    iterated-greedy compression with one-level repair moves.  Validity is
    exact always; the class count is attempted, never asserted here.
    """
    m = len(h.edges)
    if m == 0:
        return []
    delta = max(h.max_degree(), 1)
    mu = h.max_codegree() / delta
    if mu > 0.5:
        log.info("matching partition: codegree ratio %.2f is large", mu)
    target = max(1, math.ceil((1 + gamma) * delta))
    rng = rng_for(seed, "nibble")

    assign = [-1] * m  # edge -> class
    class_vertices: list[set[int]] = [set() for _ in range(target)]
    class_edges: list[set[int]] = [set() for _ in range(target)]

    def fits(ei: int, c: int) -> bool:
        return not (class_vertices[c] & h.edges[ei])

    def place(ei: int, c: int) -> None:
        while c >= len(class_vertices):
            class_vertices.append(set())
            class_edges.append(set())
        assign[ei] = c
        class_vertices[c] |= h.edges[ei]
        class_edges[c].add(ei)

    def unplace(ei: int) -> None:
        c = assign[ei]
        assign[ei] = -1
        class_edges[c].discard(ei)
        class_vertices[c] -= h.edges[ei]  # matchings: vertices not shared

    # nibble rounds: each uncoloured edge activates and proposes a class;
    # a proposal survives if nothing it meets proposed the same class
    uncoloured = list(range(m))
    for _ in range(nibble_rounds):
        if not uncoloured:
            break
        p = min(1.0, theta / max(1, delta))
        proposals: dict[int, list[int]] = {}
        for ei in uncoloured:
            if rng.coin(p):
                proposals.setdefault(rng.randrange(target), []).append(ei)
        newly: set[int] = set()
        for c, eis in proposals.items():
            counts: dict[int, int] = {}
            for ei in eis:
                for v in h.edges[ei]:
                    counts[v] = counts.get(v, 0) + 1
            for ei in eis:
                if all(counts[v] == 1 for v in h.edges[ei]) and fits(ei, c):
                    place(ei, c)
                    newly.add(ei)
        uncoloured = [ei for ei in uncoloured if ei not in newly]

    # greedy completion: first fit, growing beyond target when forced
    for ei in uncoloured:
        for c in range(len(class_vertices) + 1):
            if c == len(class_vertices):
                class_vertices.append(set())
                class_edges.append(set())
            if fits(ei, c):
                place(ei, c)
                break

    classes = [sorted(es) for es in class_edges if es]

    # iterated-greedy compression: reinsert whole classes by first fit.
    # Grouped reinsertion never increases the class count; varied orders
    # let classes merge.  Aim at the lower bound Delta itself.
    def first_fit(ordered: list[list[int]]) -> list[list[int]]:
        cv: list[set[int]] = []
        ce: list[list[int]] = []
        for cls in ordered:
            for ei in cls:
                for c in range(len(cv) + 1):
                    if c == len(cv):
                        cv.append(set())
                        ce.append([])
                    if not (cv[c] & h.edges[ei]):
                        cv[c] |= h.edges[ei]
                        ce[c].append(ei)
                        break
        return ce

    aim = delta
    for it in range(compress_passes):
        if len(classes) <= aim:
            break
        order = [list(cls) for cls in classes]
        for cls in order:
            rng.shuffle(cls)
        if it % 3 == 0:
            order.sort(key=len, reverse=True)
        elif it % 3 == 1:
            keys = [rng.random() for _ in order]
            order = [c for _, c in sorted(zip(keys, order), key=lambda p: p[0])]
            order.sort(key=len)
        else:
            keys = [rng.random() for _ in order]
            order = [c for _, c in sorted(zip(keys, order), key=lambda p: p[0])]
        new = first_fit(order)
        if len(new) <= len(classes):
            classes = new

    # final polish: drain the smallest classes with one repair level
    cv = [set().union(*(h.edges[ei] for ei in cls)) for cls in classes]
    ce = [set(cls) for cls in classes]
    for _ in range(4):
        if len(ce) <= aim:
            break
        sizes = sorted(range(len(ce)), key=lambda c: len(ce[c]))
        victims = set(sizes[: len(ce) - aim])
        progress = False
        for vic in victims:
            for ei in list(ce[vic]):
                moved = False
                for c in range(len(ce)):
                    if c in victims or cv[c] & h.edges[ei]:
                        continue
                    ce[vic].discard(ei)
                    cv[vic] -= h.edges[ei]
                    ce[c].add(ei)
                    cv[c] |= h.edges[ei]
                    moved = progress = True
                    break
                if moved:
                    continue
                for c in range(len(ce)):
                    if c in victims:
                        continue
                    conf = [ej for ej in ce[c] if h.edges[ej] & h.edges[ei]]
                    if len(conf) != 1:
                        continue
                    ej = conf[0]
                    dest = next(
                        (
                            c2
                            for c2 in range(len(ce))
                            if c2 not in victims
                            and c2 != c
                            and not (cv[c2] & h.edges[ej])
                        ),
                        None,
                    )
                    if dest is not None:
                        ce[c].discard(ej)
                        cv[c] -= h.edges[ej]
                        ce[dest].add(ej)
                        cv[dest] |= h.edges[ej]
                        ce[vic].discard(ei)
                        cv[vic] -= h.edges[ei]
                        ce[c].add(ei)
                        cv[c] |= h.edges[ei]
                        progress = True
                        break
        live = [c for c in range(len(ce)) if ce[c]]
        ce = [ce[c] for c in live]
        cv = [cv[c] for c in live]
        if not progress:
            break
    classes = [sorted(es) for es in ce if es]
    validate_matching_partition(h, classes)
    return classes


# -- factor groups ------------------------------------------------------


@dataclass
class FactorGroups:
    """T groups of kappa edge-disjoint near-K_k-factors, avoiding V'."""

    k: int
    groups: list[list[list[tuple[int, ...]]]]  # [T][kappa][clique]
    excluded: list[int]
    kappa: int
    kappa_claimed: float = 0.0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "excluded": sorted(self.excluded),
            "kappa": self.kappa,
            "groups": [
                [[list(cl) for cl in factor] for factor in group]
                for group in self.groups
            ],
        }


def validate_factor_groups(
    g: MultiGraph, k: int, fg: FactorGroups, eps: float, slack: float = 1.0
) -> None:
    """Independent (B1)-(B3) check plus the multiplicity budget."""
    n = g.n
    excluded = set(fg.excluded)
    usage: dict[tuple[int, int], int] = {}
    support = g.support()
    cover_count = [0] * n
    for t, group in enumerate(fg.groups):
        pair_seen: set[tuple[int, int]] = set()
        for factor in group:
            verts: set[int] = set()
            for cl in factor:
                if len(cl) != k:
                    raise InputError("factor clique of wrong size")
                for u, v in itertools.combinations(cl, 2):
                    if not support.has_edge(u, v):
                        raise InputError(f"({u},{v}) not an edge of the multigraph")
                    e = norm_edge(u, v)
                    if e in pair_seen:
                        raise InputError(f"(B3) violated: pair {e} twice in group {t}")
                    pair_seen.add(e)
                    usage[e] = usage.get(e, 0) + 1
                for v in cl:
                    if v in excluded:
                        raise InputError("factor touches the excluded set")
                    if v in verts:
                        raise InputError("factor cliques overlap")
                    verts.add(v)
                    cover_count[v] += 1
            if len(factor) < (1 - eps) * n / k - 1e-9:
                raise InputError(
                    f"(B1) violated: factor has {len(factor)} < (1-eps)n/k cliques"
                )
    for e, c in usage.items():
        if c > g.multiplicity(*e):
            raise InputError(f"edge {e} used {c} times, multiplicity {g.multiplicity(*e)}")
    total = fg.kappa * len(fg.groups)
    for v in range(n):
        if v not in excluded and cover_count[v] < total - slack * eps * n:
            raise InputError(
                f"(B2) violated at vertex {v}: covered {cover_count[v]} of {total}"
            )
    if len(excluded) > slack * eps * n + k:
        raise InputError("excluded set larger than eps*n")


def _even_floor(x: float) -> int:
    r = int(math.floor(x))
    return r if r % 2 == 0 else r - 1


def _colour_split(g: MultiGraph, q: int, rng: Rng) -> list[SimpleGraph]:
    """Assign the parallel copies of each pair to distinct colours."""
    per_colour: list[list[tuple[int, int]]] = [[] for _ in range(q)]
    for (u, v), c in sorted(g.pairs()):
        if c > q:
            raise InputError("multiplicity exceeds q")
        for col in rng.sample(range(q), c):
            per_colour[col].append((u, v))
    return [SimpleGraph(g.n, edges) for edges in per_colour]


def factor_group_decomposition(
    g: MultiGraph,
    k: int,
    q: int,
    t_groups: int,
    nu: float,
    eps: float,
    seed: int,
    retries: int = 5,
) -> FactorGroups:
    """Edge-disjoint near-K_k-factor groups of a near-regular multigraph.

    Pipeline: random q-colour split of parallel edges, per-colour spanning
    regular subgraph, per-colour near-optimal K_k-packing (edges for k=2,
    fractional + rounding otherwise), matching partition of the resulting
    k-graph, discard small factors, balance the count across colours and
    relabel into T groups.  The asymptotic kappa is reported as claimed;
    the achieved kappa is what the output carries.
    """
    if t_groups % q != 0:
        raise InputError("q must divide T")
    n = g.n
    if n == 0 or k < 2:
        raise InputError("need n > 0 and k >= 2")
    degs = [g.degree(v) for v in range(n)]
    delta_frac = min(degs) / (q * n)
    last_err: Exception | None = None
    for attempt in range(retries):
        rng = rng_for(seed, "factor-groups", attempt)
        try:
            return _factor_groups_once(g, k, q, t_groups, nu, eps, rng, delta_frac)
        except (Infeasible, InputError, BudgetExhausted) as exc:
            last_err = exc
            log.info("factor groups attempt %d failed: %s", attempt, exc)
    raise StagedError("factor_group_decomposition", last_err)


def _factor_groups_once(g, k, q, t_groups, nu, eps, rng, delta_frac):
    n = g.n
    colours = _colour_split(g, q, rng)
    for c, gc in enumerate(colours):
        lo = (delta_frac - 2 * nu) * n
        if gc.min_degree() < lo - 1:
            raise Infeasible(f"colour {c} under-regular: {gc.min_degree()} < {lo}")

    target_r = _even_floor((delta_frac - nu) * n)
    per_colour_factors: list[list[list[tuple[int, ...]]]] = []
    v_bad: set[int] = set()
    for c, gc in enumerate(colours):
        r_c = min(target_r, _even_floor(gc.min_degree() - max(1.0, nu * n / 2)))
        r_c = max(r_c, 2 if k == 2 else 2)
        sub = None
        while r_c >= 2:
            try:
                sub = regular_spanning_subgraph(gc, r_c)
                break
            except Infeasible:
                r_c -= 2
        if sub is None:
            raise Infeasible(f"colour {c} has no even-regular spanning subgraph")

        if k == 2:
            cliques = [tuple(e) for e in sorted(sub.edges())]
        else:
            frac = fractional_clique_packing(sub, k)
            cliques = integral_from_fractional(
                sub, k, frac, seed=rng.u64() & 0xFFFFFF
            ).cliques
        # coverage: drop rarely covered vertices
        cover = [0] * n
        for cl in cliques:
            for v in cl:
                cover[v] += 1
        thr = (1 - eps) * r_c / (k - 1)
        v_bad |= {v for v in range(n) if cover[v] < thr}
        per_colour_factors.append(cliques)

    # pad the excluded set so k divides the remainder
    v_prime = sorted(v_bad)
    pool = [v for v in range(n) if v not in v_bad]
    while (n - len(v_prime)) % k != 0:
        v_prime.append(pool.pop())
    v_prime_set = set(v_prime)
    if len(v_prime) > eps * n + k:
        raise Infeasible(
            f"excluded set has {len(v_prime)} vertices, above eps*n"
        )

    kept_n = n - len(v_prime)
    min_factor = math.ceil((1 - eps) * n / k - 1e-9)
    per_colour_matchings: list[list[list[tuple[int, ...]]]] = []
    for c, cliques in enumerate(per_colour_factors):
        kept = [cl for cl in cliques if not (set(cl) & v_prime_set)]
        hyper = MultiHypergraph(n, kept)
        classes = hypergraph_matching_partition(
            hyper, gamma=eps, seed=rng.u64() & 0xFFFFFF
        )
        factors = [
            [kept[ei] for ei in cls] for cls in classes
        ]
        factors = [f for f in factors if len(f) >= min_factor]
        factors.sort(key=len, reverse=True)
        per_colour_matchings.append(factors)

    kappa_per_colour = min(len(f) for f in per_colour_matchings)
    groups_per_colour = t_groups // q
    kappa = (kappa_per_colour * q) // t_groups
    if kappa < 1:
        raise Infeasible(
            f"only {kappa_per_colour} usable factors per colour; "
            f"cannot fill {t_groups} groups"
        )
    groups: list[list[list[tuple[int, ...]]]] = []
    for c in range(q):
        factors = per_colour_matchings[c][: kappa * groups_per_colour]
        for gi in range(groups_per_colour):
            groups.append(factors[gi * kappa : (gi + 1) * kappa])
    claimed = (delta_frac - nu) * q * n / (t_groups * (k - 1))
    fg = FactorGroups(
        k=k, groups=groups, excluded=v_prime, kappa=kappa, kappa_claimed=claimed
    )
    validate_factor_groups(g, k, fg, eps, slack=3.0)
    if kept_n % k != 0:
        raise InputError("excluded-set padding failed")
    return fg


# -- k = 2 spanning variant (matching groups) ---------------------------


def _hamilton_cycle(g: SimpleGraph, verts: list[int], rng: Rng, tries: int = 60):
    """Hamilton cycle on the given vertex set by rotation-extension."""
    vs = list(verts)
    nv = len(vs)
    if nv < 3:
        return None
    vset = set(vs)
    for _ in range(tries):
        start = vs[rng.randrange(nv)]
        path = [start]
        on_path = {start}
        stuck = 0
        while len(path) < nv and stuck < 4 * nv:
            end = path[-1]
            ext = [w for w in g.neighbors(end) if w in vset and w not in on_path]
            if ext:
                w = ext[rng.randrange(len(ext))]
                path.append(w)
                on_path.add(w)
                continue
            # rotate: end's neighbour inside the path flips a suffix
            nbrs = [w for w in g.neighbors(end) if w in on_path]
            if len(nbrs) <= 1:
                break
            pos = {v: i for i, v in enumerate(path)}
            w = nbrs[rng.randrange(len(nbrs))]
            i = pos[w]
            path[i + 1 :] = reversed(path[i + 1 :])
            stuck += 1
        if len(path) == nv and g.has_edge(path[-1], path[0]):
            return path
        if len(path) == nv:
            # close the cycle with one more rotation round
            for _ in range(4 * nv):
                end = path[-1]
                if g.has_edge(end, path[0]):
                    return path
                nbrs = [w for w in g.neighbors(end) if w != path[-2] and w in set(path)]
                if not nbrs:
                    break
                pos = {v: i for i, v in enumerate(path)}
                w = nbrs[rng.randrange(len(nbrs))]
                path[pos[w] + 1 :] = reversed(path[pos[w] + 1 :])
    return None


def _perfect_matching_on(g: SimpleGraph, verts) -> list[tuple[int, int]] | None:
    vs = sorted(verts)
    idx = {v: i for i, v in enumerate(vs)}
    adj = [[] for _ in vs]
    for u in vs:
        for w in g.neighbors(u):
            if w in idx:
                adj[idx[u]].append(idx[w])
    mate = kernels.max_matching(len(vs), adj)
    if any(m == -1 for m in mate):
        return None
    return sorted(
        norm_edge(vs[i], vs[mate[i]]) for i in range(len(vs)) if i < mate[i]
    )


def matching_group_decomposition(
    g: MultiGraph,
    q: int,
    t_groups: int,
    nu: float,
    seed: int,
    retries: int = 6,
) -> FactorGroups:
    """Perfect-matching groups for the bipartite-capacity regime.

    Per colour, Hamilton cycles are pulled out by rotation-extension and
    split into two perfect matchings each; at most one vertex is set aside
    for parity.  The target count per group follows the closed-form
    (delta + sqrt(2 delta - 1) - nu) q n / (2T); the achieved count is
    reported honestly and is what the output carries.
    """
    if t_groups % q != 0:
        raise InputError("q must divide T")
    n = g.n
    degs = [g.degree(v) for v in range(n)]
    delta_frac = min(degs) / (q * n)
    if delta_frac <= 0.5:
        log.warning("matching groups: delta = %.3f not above 1/2", delta_frac)
    v_prime = [] if n % 2 == 0 else [n - 1]
    kept = [v for v in range(n) if v not in v_prime]
    claimed = (delta_frac + math.sqrt(max(2 * delta_frac - 1, 0.0)) - nu) * q * n / (
        2 * t_groups
    )
    kappa_target = max(1, math.floor(claimed))
    per_colour_target = math.ceil(kappa_target * t_groups / q)
    last: Exception | None = None
    for attempt in range(retries):
        rng = rng_for(seed, "matching-groups", attempt)
        try:
            colours = _colour_split(g, q, rng)
            per_colour: list[list[list[tuple[int, ...]]]] = []
            for c, gc in enumerate(colours):
                matchings: list[list[tuple[int, ...]]] = []
                work_edges = set(gc.edges())
                work = SimpleGraph(n, work_edges)
                while len(matchings) < per_colour_target:
                    cyc = _hamilton_cycle(work, kept, rng)
                    if cyc is None:
                        # residual may still hold a perfect matching (the
                        # classic decomposition is Hamilton cycles plus at
                        # most one perfect matching)
                        pm = _perfect_matching_on(work, kept)
                        if pm is not None:
                            matchings.append(pm)
                            work_edges -= set(pm)
                            work = SimpleGraph(n, work_edges)
                            continue
                        raise Infeasible(
                            f"colour {c}: Hamilton extraction stalled at "
                            f"{len(matchings)} of {per_colour_target} matchings"
                        )
                    m1 = [
                        norm_edge(cyc[i], cyc[i + 1])
                        for i in range(0, len(cyc) - 1, 2)
                    ]
                    m2 = [
                        norm_edge(cyc[i], cyc[(i + 1) % len(cyc)])
                        for i in range(1, len(cyc), 2)
                    ]
                    matchings.append([tuple(e) for e in m1])
                    if len(matchings) < per_colour_target:
                        matchings.append([tuple(e) for e in m2])
                    cyc_edges = {
                        norm_edge(cyc[i], cyc[(i + 1) % len(cyc)])
                        for i in range(len(cyc))
                    }
                    work_edges -= cyc_edges
                    work = SimpleGraph(n, work_edges)
                per_colour.append(matchings)
            groups = []
            gpc = t_groups // q
            kappa = min(
                kappa_target, min(len(m) for m in per_colour) * q // t_groups
            )
            for c in range(q):
                ms = per_colour[c][: kappa * gpc]
                for gi in range(gpc):
                    groups.append(ms[gi * kappa : (gi + 1) * kappa])
            fg = FactorGroups(
                k=2, groups=groups, excluded=v_prime, kappa=kappa,
                kappa_claimed=claimed,
            )
            _validate_matching_groups(g, fg, kept)
            return fg
        except Infeasible as exc:
            last = exc
            log.info("matching groups attempt %d failed: %s", attempt, exc)
    raise StagedError("matching_group_decomposition", last)


def _validate_matching_groups(g: MultiGraph, fg: FactorGroups, kept) -> None:
    support = g.support()
    usage: dict[tuple[int, int], int] = {}
    kept_set = set(kept)
    for t, group in enumerate(fg.groups):
        seen_pairs: set[tuple[int, int]] = set()
        for matching in group:
            verts: set[int] = set()
            for e in matching:
                u, v = e
                if not support.has_edge(u, v):
                    raise InputError(f"pair {e} not in multigraph")
                pe = norm_edge(u, v)
                if pe in seen_pairs:
                    raise InputError(f"pair {pe} reused within group {t}")
                seen_pairs.add(pe)
                usage[pe] = usage.get(pe, 0) + 1
                if u in verts or v in verts:
                    raise InputError("matching not vertex-disjoint")
                verts |= {u, v}
            if verts != kept_set:
                raise InputError("matching not perfect on V minus V'")
    for e, c in usage.items():
        if c > g.multiplicity(*e):
            raise InputError(f"pair {e} over multiplicity")
