"""Regular-pair machinery: checkers, trimming, synthetic blow-up generation.

A bipartite pair (A, B) is (eps, d)-regular when every subpair (A', B')
with |A'| >= eps|A|, |B'| >= eps|B| has density within eps of d
(strictly).  The exact checker enumerates all qualifying subpairs, so it
is capped; above the cap a randomised witness search can refute but never
certify.  Full Szemeredi partitions of arbitrary hosts are out of scope:
pipeline instances either come with a ClusterTemplate or are generated
from one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import SimpleGraph, norm_edge
from .errors import InputError, OracleScaleError, RegularityAssumptionViolated
from .rng import rng_for

EXACT_SIDE_CAP = 12
_FLOAT_SLOP = 1e-12


@dataclass
class PairVerdict:
    verdict: str  # "pass" | "fail" | "inconclusive"
    witness: tuple[list[int], list[int]] | None = None
    deviation: float = 0.0


def pair_density(host: SimpleGraph, a_side, b_side) -> float:
    a_side, b_side = list(a_side), list(b_side)
    if not a_side or not b_side:
        return 0.0
    bs = set(b_side)
    e = sum(1 for u in a_side for v in host.neighbors(u) if v in bs)
    return e / (len(a_side) * len(b_side))


def _biadjacency(host: SimpleGraph, a_side, b_side) -> np.ndarray:
    mat = np.zeros((len(a_side), len(b_side)), dtype=np.int64)
    b_index = {v: j for j, v in enumerate(b_side)}
    for i, u in enumerate(a_side):
        for v in host.neighbors(u):
            j = b_index.get(v)
            if j is not None:
                mat[i, j] = 1
    return mat


def check_regular_pair(
    host: SimpleGraph,
    a_side,
    b_side,
    eps: float,
    d: float,
    mode: str = "exact",
    seed: int = 0,
    budget: int = 4000,
) -> PairVerdict:
    """Verdict on (eps, d)-regularity of the pair (a_side, b_side).

    exact mode (sides up to 12): enumerate every qualifying subpair; the
    verdict is a proof either way.  witness-search mode: randomised greedy
    ascent on |density - d|; "fail" comes with a violating subpair,
    otherwise "inconclusive" after the budget.
    """
    a_side, b_side = sorted(set(a_side)), sorted(set(b_side))
    if not a_side or not b_side:
        raise InputError("regular-pair sides must be nonempty")
    if set(a_side) & set(b_side):
        raise InputError("regular-pair sides must be disjoint")
    if not (0 < eps <= 1):
        raise InputError("eps must lie in (0, 1]")
    if mode == "exact":
        if len(a_side) > EXACT_SIDE_CAP or len(b_side) > EXACT_SIDE_CAP:
            raise OracleScaleError(
                f"exact regularity check capped at {EXACT_SIDE_CAP} per side"
            )
        return _check_exact(host, a_side, b_side, eps, d)
    if mode == "witness-search":
        return _witness_search(host, a_side, b_side, eps, d, seed, budget)
    raise InputError(f"unknown mode {mode!r}")


def _check_exact(host, a_side, b_side, eps, d) -> PairVerdict:
    na, nb = len(a_side), len(b_side)
    mat = _biadjacency(host, a_side, b_side)
    sub_a = ((np.arange(1 << na)[:, None] >> np.arange(na)) & 1).astype(np.int64)
    sub_b = ((np.arange(1 << nb)[:, None] >> np.arange(nb)) & 1).astype(np.int64)
    size_a = sub_a.sum(axis=1)
    size_b = sub_b.sum(axis=1)
    ok_a = np.nonzero(size_a >= eps * na - _FLOAT_SLOP)[0]
    ok_b = np.nonzero(size_b >= eps * nb - _FLOAT_SLOP)[0]
    cnt = sub_a[ok_a] @ mat  # (len(ok_a), nb)
    e_all = cnt @ sub_b[ok_b].T  # rows: A' choices, cols: B' choices
    prod = np.outer(size_a[ok_a], size_b[ok_b]).astype(np.float64)
    dev = np.abs(e_all / prod - d)
    worst_flat = int(np.argmax(dev))
    worst = float(dev.flat[worst_flat])
    if worst < eps - _FLOAT_SLOP:
        return PairVerdict("pass", deviation=worst)
    i, j = divmod(worst_flat, len(ok_b))
    wa = [a_side[t] for t in range(na) if sub_a[ok_a[i], t]]
    wb = [b_side[t] for t in range(nb) if sub_b[ok_b[j], t]]
    return PairVerdict("fail", witness=(wa, wb), deviation=worst)


def _witness_search(host, a_side, b_side, eps, d, seed, budget) -> PairVerdict:
    na, nb = len(a_side), len(b_side)
    mat = _biadjacency(host, a_side, b_side)
    min_a = max(1, int(np.ceil(eps * na - _FLOAT_SLOP)))
    min_b = max(1, int(np.ceil(eps * nb - _FLOAT_SLOP)))
    rng = rng_for(seed, "regpair-witness")
    best = PairVerdict("inconclusive", deviation=0.0)
    restarts = max(4, budget // 200)
    iters = max(40, budget // restarts)
    row_sums_cache = mat.sum(axis=1)

    def deviation(sel_a, sel_b):
        e = int(mat[np.ix_(sel_a, sel_b)].sum())
        return abs(e / (len(sel_a) * len(sel_b)) - d)

    for _ in range(restarts):
        # seed with extreme rows: high- or low-degree vertices first
        direction = rng.coin(0.5)
        order = np.argsort(row_sums_cache)
        if direction:
            order = order[::-1]
        sel_a = list(order[:min_a])
        col = mat[sel_a].sum(axis=0)
        corder = np.argsort(col)
        if direction:
            corder = corder[::-1]
        sel_b = list(corder[:min_b])
        cur = deviation(sel_a, sel_b)
        for _ in range(iters):
            improved = False
            # try swapping one element of each side (random probes)
            for _ in range(8):
                if rng.coin(0.5) and len(sel_a) < na:
                    outside = [i for i in range(na) if i not in sel_a]
                    if not outside:
                        continue
                    cand = sel_a + [rng.choice(outside)]
                    val = deviation(cand, sel_b)
                    if val > cur:
                        sel_a, cur, improved = cand, val, True
                else:
                    i_pos = rng.randrange(len(sel_a))
                    outside = [i for i in range(na) if i not in sel_a]
                    if not outside:
                        continue
                    cand = list(sel_a)
                    cand[i_pos] = rng.choice(outside)
                    val = deviation(cand, sel_b)
                    if val > cur:
                        sel_a, cur, improved = cand, val, True
                if rng.coin(0.5) and len(sel_b) < nb:
                    outside = [j for j in range(nb) if j not in sel_b]
                    if not outside:
                        continue
                    cand = sel_b + [rng.choice(outside)]
                    val = deviation(sel_a, cand)
                    if val > cur:
                        sel_b, cur, improved = cand, val, True
                else:
                    j_pos = rng.randrange(len(sel_b))
                    outside = [j for j in range(nb) if j not in sel_b]
                    if not outside:
                        continue
                    cand = list(sel_b)
                    cand[j_pos] = rng.choice(outside)
                    val = deviation(sel_a, cand)
                    if val > cur:
                        sel_b, cur, improved = cand, val, True
            if cur >= eps + _FLOAT_SLOP:
                wa = [a_side[i] for i in sel_a]
                wb = [b_side[j] for j in sel_b]
                return PairVerdict("fail", witness=(wa, wb), deviation=cur)
            if not improved:
                break
        if cur > best.deviation:
            best = PairVerdict("inconclusive", deviation=cur)
    return best


def trim_to_superregular(
    host: SimpleGraph, a_side, b_side, eps: float, d: float
) -> tuple[list[int], list[int]]:
    """Drop the atypical-degree vertices of a regular pair.

    Removes exactly the vertices whose degree into the opposite (full)
    side is not (d +- eps) times that side's size.  If the pair really is
    (eps, d)-regular, at most 2*eps of each side goes; more than that
    signals a violated regularity assumption.
    """
    a_side, b_side = sorted(set(a_side)), sorted(set(b_side))
    na, nb = len(a_side), len(b_side)
    bs, as_ = set(b_side), set(a_side)
    bad_a = [
        u
        for u in a_side
        if not _within(d, eps, sum(1 for w in host.neighbors(u) if w in bs) / nb)
    ]
    bad_b = [
        v
        for v in b_side
        if not _within(d, eps, sum(1 for w in host.neighbors(v) if w in as_) / na)
    ]
    if len(bad_a) > 2 * eps * na + _FLOAT_SLOP or len(bad_b) > 2 * eps * nb + _FLOAT_SLOP:
        raise RegularityAssumptionViolated(
            f"trimming removed {len(bad_a)}/{na} and {len(bad_b)}/{nb} vertices, "
            f"more than the 2*eps bound; pair was not (eps,d)-regular"
        )
    bad_a_set, bad_b_set = set(bad_a), set(bad_b)
    return (
        [u for u in a_side if u not in bad_a_set],
        [v for v in b_side if v not in bad_b_set],
    )


def _within(d: float, eps: float, x: float) -> bool:
    return d - eps - _FLOAT_SLOP <= x <= d + eps + _FLOAT_SLOP


def check_slicing(
    host: SimpleGraph,
    a_side,
    b_side,
    a_sub,
    b_sub,
    eps: float,
    delta_frac: float,
    d: float,
    mode: str = "exact",
    seed: int = 0,
) -> PairVerdict:
    """Regularity of a sliced pair, checked at parameter eps/delta_frac.

    Requires |A'|/|A|, |B'|/|B| >= delta_frac >= eps.
    """
    a_side, b_side = list(set(a_side)), list(set(b_side))
    a_sub, b_sub = list(set(a_sub)), list(set(b_sub))
    if not set(a_sub) <= set(a_side) or not set(b_sub) <= set(b_side):
        raise InputError("slices must be subsets of their sides")
    if delta_frac < eps:
        raise InputError("slice fraction below eps")
    if (
        len(a_sub) + _FLOAT_SLOP < delta_frac * len(a_side)
        or len(b_sub) + _FLOAT_SLOP < delta_frac * len(b_side)
    ):
        raise InputError("slice smaller than the declared fraction")
    return check_regular_pair(host, a_sub, b_sub, eps / delta_frac, d, mode, seed)


def check_subgraph_regular(
    sub: SimpleGraph,
    a_side,
    b_side,
    eps: float,
    delta: float,
    d: float,
    mode: str = "exact",
    seed: int = 0,
) -> PairVerdict:
    """Variant for spanning subgraphs keeping >= (1-delta) of the edges:
    the pair stays regular at parameter eps + delta^(1/3)."""
    return check_regular_pair(
        sub, a_side, b_side, eps + delta ** (1 / 3), d, mode, seed
    )


# -- cluster templates ------------------------------------------------


@dataclass
class ClusterTemplate:
    """Reduced graph R, clique factor Q, cluster layout and densities."""

    r: int
    k: int
    reduced: SimpleGraph  # on [r]
    factor_cliques: list[tuple[int, ...]]  # vertex-disjoint K_k's of reduced
    clusters: list[list[int]]  # host vertex ids per cluster
    exceptional: list[int] = field(default_factory=list)
    densities: dict[tuple[int, int], float] = field(default_factory=dict)

    def validate(self, require_cover: bool = True) -> None:
        if self.reduced.n != self.r:
            raise InputError("reduced graph order != r")
        seen: set[int] = set()
        for q in self.factor_cliques:
            if len(q) != self.k:
                raise InputError("factor clique of wrong size")
            for u in q:
                if u in seen:
                    raise InputError("factor cliques overlap")
                seen.add(u)
            for i, u in enumerate(q):
                for v in q[i + 1 :]:
                    if not self.reduced.has_edge(u, v):
                        raise InputError(f"factor clique {q} not a clique of R")
        if require_cover and seen != set(range(self.r)):
            raise InputError("factor cliques do not cover the reduced graph")
        used: set[int] = set()
        for cl in self.clusters:
            for v in cl:
                if v in used:
                    raise InputError("clusters overlap")
                used.add(v)
        if used & set(self.exceptional):
            raise InputError("exceptional set meets a cluster")
        sizes = [len(c) for c in self.clusters]
        if sizes and max(sizes) - min(sizes) > 1:
            raise InputError("cluster sizes differ by more than 1")

    def density(self, i: int, j: int, default: float | None = None) -> float:
        e = norm_edge(i, j)
        if e in self.densities:
            return self.densities[e]
        if default is None:
            raise InputError(f"no density recorded for reduced edge {e}")
        return default

    def to_json(self) -> dict:
        sizes = {len(c) for c in self.clusters}
        obj = {
            "r": self.r,
            "k": self.k,
            "R_edges": sorted([u, v] for u, v in self.reduced.edges()),
            "Q_cliques": [list(q) for q in self.factor_cliques],
            "densities": {
                f"{i},{j}": d for (i, j), d in sorted(self.densities.items())
            },
        }
        contiguous = self.clusters and sizes == {len(self.clusters[0])} and all(
            self.clusters[i] == list(range(i * len(self.clusters[0]),
                                           (i + 1) * len(self.clusters[0])))
            for i in range(len(self.clusters))
        )
        if contiguous:
            obj["cluster_size"] = len(self.clusters[0])
        else:
            obj["clusters"] = [list(c) for c in self.clusters]
            obj["exceptional"] = list(self.exceptional)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "ClusterTemplate":
        r = obj["r"]
        reduced = SimpleGraph(r, ((int(u), int(v)) for u, v in obj["R_edges"]))
        densities = {}
        for key, dv in obj.get("densities", {}).items():
            i, j = (int(x) for x in key.split(","))
            densities[norm_edge(i, j)] = float(dv)
        if "clusters" in obj:
            clusters = [list(c) for c in obj["clusters"]]
            exceptional = list(obj.get("exceptional", []))
        else:
            cs = obj["cluster_size"]
            clusters = [list(range(i * cs, (i + 1) * cs)) for i in range(r)]
            exceptional = []
        return cls(
            r=r,
            k=obj["k"],
            reduced=reduced,
            factor_cliques=[tuple(q) for q in obj["Q_cliques"]],
            clusters=clusters,
            exceptional=exceptional,
            densities=densities,
        )


def uniform_template(
    r: int, k: int, cluster_size: int, density: float, reduced: SimpleGraph | None = None
) -> ClusterTemplate:
    """Contiguous-cluster template; R defaults to the complete graph."""
    if r % k != 0:
        raise InputError("k must divide r")
    if reduced is None:
        reduced = SimpleGraph(r, ((i, j) for i in range(r) for j in range(i + 1, r)))
    cliques = [tuple(range(i, i + k)) for i in range(0, r, k)]
    clusters = [list(range(i * cluster_size, (i + 1) * cluster_size)) for i in range(r)]
    dens = {e: density for e in reduced.edges()}
    return ClusterTemplate(
        r=r, k=k, reduced=reduced, factor_cliques=cliques,
        clusters=clusters, densities=dens,
    )


def generate_regular_blowup(
    template: ClusterTemplate,
    cluster_size: int,
    density: float,
    seed: int,
) -> SimpleGraph:
    """Random blow-up of the template's reduced graph.

    One independent coin per cross pair, in (i<j, lexicographic) order from
    the documented seeded generator, so regeneration with the same seed is
    bit-identical; no edges inside clusters.  Per-edge density defaults to
    ``density`` unless the template records one.
    """
    if not (0 < density <= 1):
        raise InputError("density must lie in (0, 1]")
    if cluster_size < 1:
        raise InputError("cluster_size must be >= 1")
    r = template.r
    n = r * cluster_size
    clusters = [list(range(i * cluster_size, (i + 1) * cluster_size)) for i in range(r)]
    edges = []
    for i, j in sorted(template.reduced.edges()):
        d_ij = template.density(i, j, default=density)
        rng = rng_for(seed, "blowup", i, j)
        if d_ij >= 1.0:
            edges.extend((u, v) for u in clusters[i] for v in clusters[j])
            continue
        for u in clusters[i]:
            for v in clusters[j]:
                if rng.coin(d_ij):
                    edges.append((u, v))
    return SimpleGraph(n, edges)
