"""Graph, multigraph and hypergraph carriers plus exact small-scale stats.

Vertices are dense integers ``0..n-1``.  Guests and hosts have independent
index spaces; only certificates tie them together.  All types are frozen
after construction and safe to share between threads.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import InputError


def norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class SimpleGraph:
    """Undirected simple graph on {0..n-1}; no loops, symmetric adjacency."""

    __slots__ = ("n", "_adj", "_m")

    def __init__(self, n: int, edges=()):
        if n < 0:
            raise InputError("negative vertex count")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n)]
        m = 0
        for u, v in edges:
            if u == v:
                raise InputError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if v not in self._adj[u]:
                self._adj[u].add(v)
                self._adj[v].add(u)
                m += 1
        self._m = m

    # -- queries ------------------------------------------------------

    @property
    def m(self) -> int:
        return self._m

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: int) -> set[int]:
        """Neighbour set (do not mutate)."""
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self._adj]

    def min_degree(self) -> int:
        return min((len(a) for a in self._adj), default=0)

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def edges(self):
        for u in range(self.n):
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edges())

    def __eq__(self, other):
        return (
            isinstance(other, SimpleGraph)
            and self.n == other.n
            and self._adj == other._adj
        )

    def __hash__(self):
        return hash((self.n, tuple(tuple(sorted(a)) for a in self._adj)))

    def __repr__(self):
        return f"SimpleGraph(n={self.n}, m={self._m})"

    # -- derived graphs -----------------------------------------------

    def subgraph(self, vertices) -> tuple["SimpleGraph", dict[int, int]]:
        """Induced subgraph; returns (graph, old->new index map)."""
        vs = sorted(set(vertices))
        idx = {v: i for i, v in enumerate(vs)}
        edges = [
            (idx[u], idx[v])
            for u in vs
            for v in self._adj[u]
            if u < v and v in idx
        ]
        return SimpleGraph(len(vs), edges), idx

    def without_edges(self, drop) -> "SimpleGraph":
        dropped = {norm_edge(*e) for e in drop}
        return SimpleGraph(
            self.n, (e for e in self.edges() if e not in dropped)
        )

    def restrict_edges(self, keep) -> "SimpleGraph":
        """Spanning subgraph with exactly the given edges (must exist)."""
        keep = list(keep)
        for u, v in keep:
            if not self.has_edge(u, v):
                raise InputError(f"edge ({u},{v}) not in graph")
        return SimpleGraph(self.n, keep)

    def adjacency_masks(self) -> list[int]:
        """Bitmask adjacency rows; only sensible for n <= 63."""
        masks = [0] * self.n
        for u, v in self.edges():
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return masks

    def bfs_distances(self, sources) -> list[int]:
        """Distance from the nearest source; -1 for unreachable."""
        dist = [-1] * self.n
        frontier = []
        for s in sources:
            if dist[s] == -1:
                dist[s] = 0
                frontier.append(s)
        d = 0
        while frontier:
            nxt = []
            for u in frontier:
                for w in self._adj[u]:
                    if dist[w] == -1:
                        dist[w] = d + 1
                        nxt.append(w)
            frontier = nxt
            d += 1
        return dist

    def ball(self, sources, radius: int) -> set[int]:
        """All vertices within the given distance of the source set."""
        if radius < 0:
            return set()
        seen = set(sources)
        frontier = set(sources)
        for _ in range(radius):
            nxt = set()
            for u in frontier:
                nxt |= self._adj[u]
            nxt -= seen
            if not nxt:
                break
            seen |= nxt
            frontier = nxt
        return seen

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self._adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(comp)
        return comps


def graph_union(n: int, *graphs: SimpleGraph) -> SimpleGraph:
    edges = []
    for g in graphs:
        edges.extend(g.edges())
    return SimpleGraph(n, edges)


class MultiGraph:
    """Loopless multigraph; multiplicity map over unordered pairs."""

    __slots__ = ("n", "mult", "cap")

    def __init__(self, n: int, multiplicities=None, cap: int | None = None):
        self.n = n
        self.cap = cap
        self.mult: dict[tuple[int, int], int] = {}
        if multiplicities:
            for (u, v), c in dict(multiplicities).items():
                if u == v:
                    raise InputError("loop in multigraph")
                if not (0 <= u < n and 0 <= v < n):
                    raise InputError("multigraph edge out of range")
                if c < 0:
                    raise InputError("negative multiplicity")
                if cap is not None and c > cap:
                    raise InputError(f"multiplicity {c} exceeds cap {cap}")
                if c:
                    self.mult[norm_edge(u, v)] = c

    def multiplicity(self, u: int, v: int) -> int:
        return self.mult.get(norm_edge(u, v), 0)

    def degree(self, v: int) -> int:
        return sum(c for (a, b), c in self.mult.items() if v in (a, b))

    def edge_count(self) -> int:
        return sum(self.mult.values())

    def support(self) -> SimpleGraph:
        return SimpleGraph(self.n, self.mult.keys())

    def pairs(self):
        return self.mult.items()


class MultiHypergraph:
    """Rank-bounded hypergraph with parallel edges (stored as a list)."""

    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges=()):
        self.n = n
        self.edges: list[frozenset[int]] = []
        for e in edges:
            fe = frozenset(e)
            if not fe:
                raise InputError("empty hyperedge")
            if not all(0 <= v < n for v in fe):
                raise InputError("hyperedge vertex out of range")
            self.edges.append(fe)

    @property
    def rank(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def degrees(self) -> list[int]:
        d = [0] * self.n
        for e in self.edges:
            for v in e:
                d[v] += 1
        return d

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def codegree(self, u: int, v: int) -> int:
        return sum(1 for e in self.edges if u in e and v in e)

    def max_codegree(self) -> int:
        c = Counter()
        for e in self.edges:
            es = sorted(e)
            for i, u in enumerate(es):
                for v in es[i + 1 :]:
                    c[(u, v)] += 1
        return max(c.values(), default=0)

    def mult(self, q) -> int:
        fq = frozenset(q)
        return sum(1 for e in self.edges if e == fq)

    def __len__(self):
        return len(self.edges)


@dataclass
class GuestGraph:
    """A guest with its degree, separability and colourability context.

    ``colouring`` is the class list ``[W_0, ..., W_k]`` of a proper
    (k+1)-colouring of the non-isolated vertices with W_0 small;
    ``separator`` is a vertex set whose removal leaves components of size
    at most eta*n.  Both witnesses are optional and validated on demand.
    """

    id: str
    graph: SimpleGraph
    max_degree_bound: int
    eta: float
    k: int
    colouring: list[list[int]] | None = None
    separator: list[int] | None = None
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        g = self.graph
        if g.max_degree() > self.max_degree_bound:
            raise InputError(
                f"guest {self.id}: max degree {g.max_degree()} exceeds "
                f"declared bound {self.max_degree_bound}"
            )
        if self.separator is not None:
            check_separator(g, self.separator, self.eta)
        if self.colouring is not None:
            check_small_class_colouring(g, self.colouring, self.k, self.eta)


def check_separator(g: SimpleGraph, separator, eta: float) -> None:
    s = set(separator)
    if len(s) > eta * g.n:
        raise InputError(f"separator of size {len(s)} exceeds eta*n")
    rest, _ = g.subgraph(set(range(g.n)) - s)
    for comp in rest.components():
        if len(comp) > eta * g.n:
            raise InputError(
                f"component of size {len(comp)} exceeds eta*n after removal"
            )


def check_small_class_colouring(g: SimpleGraph, classes, k: int, eta: float) -> None:
    if len(classes) != k + 1:
        raise InputError(f"expected {k + 1} colour classes, got {len(classes)}")
    non_isolated = {v for v in range(g.n) if g.degree(v) > 0}
    seen: set[int] = set()
    for cls in classes:
        for v in cls:
            if v in seen:
                raise InputError(f"vertex {v} in two colour classes")
            seen.add(v)
        for u in cls:
            for v in cls:
                if u < v and g.has_edge(u, v):
                    raise InputError(f"colour class not independent: edge ({u},{v})")
    if not non_isolated <= seen:
        missing = sorted(non_isolated - seen)[:5]
        raise InputError(f"non-isolated vertices uncoloured: {missing}...")
    if non_isolated and len(classes[0]) > eta * len(non_isolated):
        raise InputError(
            f"|W_0|={len(classes[0])} exceeds eta * non-isolated count"
        )


def graph_stats(g: SimpleGraph) -> dict:
    """Exact order, size, min/max degree and degree histogram."""
    degs = g.degrees()
    hist: dict[int, int] = {}
    for d in degs:
        hist[d] = hist.get(d, 0) + 1
    return {
        "n": g.n,
        "e": g.m,
        "min_degree": min(degs, default=0),
        "max_degree": max(degs, default=0),
        "degree_histogram": dict(sorted(hist.items())),
    }
