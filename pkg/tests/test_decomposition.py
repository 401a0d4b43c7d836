import itertools
import math
from fractions import Fraction

import pytest

from conftest import complete_graph, cycle_graph, random_graph
from packforge.core import MultiGraph, MultiHypergraph, SimpleGraph, norm_edge
from packforge.decomposition import (
    FactorGroups,
    factor_group_decomposition,
    fractional_clique_packing,
    hypergraph_matching_partition,
    integral_from_fractional,
    matching_group_decomposition,
    regular_spanning_subgraph,
    validate_factor_groups,
    validate_matching_partition,
)
from packforge.errors import Infeasible, InputError
from packforge.oracle import rfactor_oracle
from packforge.rng import Rng


# -- fractional LP ------------------------------------------------------


def test_lp_k4_triangles():
    pack = fractional_clique_packing(complete_graph(4), 3)
    assert pack.exact and pack.value == Fraction(2)
    # the symmetric optimum puts 1/2 on each of the 4 triangles; any
    # optimum has value 2 = 6/3
    pack.validate(complete_graph(4))


def test_lp_k5_triangles():
    pack = fractional_clique_packing(complete_graph(5), 3)
    assert pack.value == Fraction(10, 3)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_lp_kn_fractional_decomposition(n):
    pack = fractional_clique_packing(complete_graph(n), 3)
    assert pack.exact
    assert pack.value == Fraction(n * (n - 1), 6)


def test_lp_triangle_free():
    pack = fractional_clique_packing(cycle_graph(7), 3)
    assert pack.value == 0 and pack.weights == {}


def test_lp_float_path_matches_exact():
    # force the float path by a tiny cap, compare against the exact value
    import packforge.decomposition as d

    g = random_graph(10, 0.7, 5)
    exact = fractional_clique_packing(g, 3)
    old = d.EXACT_LP_CLIQUE_CAP
    d.EXACT_LP_CLIQUE_CAP = 0
    try:
        approx = fractional_clique_packing(g, 3)
    finally:
        d.EXACT_LP_CLIQUE_CAP = old
    assert not approx.exact
    assert approx.value == pytest.approx(float(exact.value), abs=1e-6)
    assert approx.duality_gap < 1e-6


# -- rounding -----------------------------------------------------------


def _assert_edge_disjoint(g, cliques):
    used = set()
    for cl in cliques:
        for u, v in itertools.combinations(cl, 2):
            assert g.has_edge(u, v)
            e = norm_edge(u, v)
            assert e not in used
            used.add(e)
    return used


def test_rounding_k7_steiner():
    g = complete_graph(7)
    frac = fractional_clique_packing(g, 3)
    out = integral_from_fractional(g, 3, frac, seed=1)
    _assert_edge_disjoint(g, out.cliques)
    assert len(out.cliques) == 7  # Steiner triple system on 7 points
    assert out.shortfall == pytest.approx(0.0)


def test_rounding_k4_single_triangle():
    g = complete_graph(4)
    frac = fractional_clique_packing(g, 3)
    out = integral_from_fractional(g, 3, frac, seed=0)
    assert len(out.cliques) == 1
    assert out.shortfall == pytest.approx(1.0)


def test_rounding_empty():
    g = SimpleGraph(5)
    frac = fractional_clique_packing(g, 3)
    assert integral_from_fractional(g, 3, frac, seed=0).cliques == []


def test_rounding_weights_never_hurt_on_average():
    # weight-guided greedy should do at least as well as unweighted greedy
    # in the mean over a batch of dense graphs (float LP keeps this fast)
    import packforge.decomposition as d

    total_w, total_u = 0, 0
    old = d.EXACT_LP_CLIQUE_CAP
    d.EXACT_LP_CLIQUE_CAP = 0
    try:
        for seed in range(20):
            g = random_graph(12, 0.8, seed)
            frac = fractional_clique_packing(g, 3)
            out = integral_from_fractional(g, 3, frac, seed=seed)
            unif = type(frac)(3, {cl: 0.0 for cl in frac.weights}, 0.0, exact=False)
            out_u = integral_from_fractional(g, 3, unif, seed=seed)
            total_w += len(out.cliques)
            total_u += len(out_u.cliques)
    finally:
        d.EXACT_LP_CLIQUE_CAP = old
    assert total_w >= total_u


# -- regular spanning subgraphs ----------------------------------------


def test_rfactor_k5_two_regular():
    sub = regular_spanning_subgraph(complete_graph(5), 2)
    assert sub.degrees() == [2] * 5


def test_rfactor_k4_c4():
    sub = regular_spanning_subgraph(complete_graph(4), 2)
    assert sub.degrees() == [2] * 4
    assert sub.m == 4


def test_rfactor_zero():
    assert regular_spanning_subgraph(complete_graph(4), 0).m == 0


def test_rfactor_odd_rejected():
    with pytest.raises(InputError):
        regular_spanning_subgraph(complete_graph(6), 3)


def test_rfactor_infeasible_proved():
    g = SimpleGraph(4, [(0, 1), (1, 2), (2, 3)])
    with pytest.raises(Infeasible) as ei:
        regular_spanning_subgraph(g, 2)
    assert ei.value.proved


def test_rfactor_random_60():
    g = random_graph(60, 0.78, 7)
    assert g.min_degree() >= 36
    sub = regular_spanning_subgraph(g, 20)
    assert sub.degrees() == [20] * 60
    assert set(sub.edges()) <= set(g.edges())


def test_rfactor_agrees_with_oracle_small():
    rng = Rng(11)
    for trial in range(120):
        n = rng.randint(4, 8)
        g = random_graph(n, 0.4 + 0.4 * rng.random(), trial)
        for r in (2, 4):
            if r >= n:
                continue
            expect = rfactor_oracle(g, r)
            try:
                sub = regular_spanning_subgraph(g, r)
                assert expect, (n, r, sorted(g.edges()))
                assert sub.degrees() == [r] * n
            except Infeasible:
                assert not expect, (n, r, sorted(g.edges()))


# -- hypergraph matching partition --------------------------------------


def test_partition_single_matching():
    h = MultiHypergraph(9, [{0, 1, 2}, {3, 4, 5}, {6, 7, 8}])
    classes = hypergraph_matching_partition(h, 0.3, seed=0)
    assert len(classes) == 1


def test_partition_k4_matchings():
    # the three perfect matchings of K_4 as 2-graph edges: Delta = 3,
    # and a proper partition into 3 matchings of size 2 exists
    edges = [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)]
    h = MultiHypergraph(4, [set(e) for e in edges])
    classes = hypergraph_matching_partition(h, 0.0, seed=0)
    assert len(classes) == 3
    assert sorted(len(c) for c in classes) == [2, 2, 2]


def test_partition_parallel_edges():
    h = MultiHypergraph(3, [{0, 1}, {0, 1}, {0, 1}])
    classes = hypergraph_matching_partition(h, 0.5, seed=0)
    assert len(classes) == 3  # parallel edges always separate


def test_partition_random_linear_3graph_quality():
    # scaled Pippenger-Spencer analogue; the full-size run lives in the
    # acceptance suite
    ok = 0
    for seed in range(4):
        h = _random_linear_3graph(150, 25, seed)
        delta = h.max_degree()
        classes = hypergraph_matching_partition(h, 0.3, seed=seed)
        validate_matching_partition(h, classes)
        if len(classes) <= 1.3 * delta:
            ok += 1
    assert ok >= 3


def _random_linear_3graph(n, target_deg, seed):
    rng = Rng(seed)
    pair_used = set()
    edges = []
    deg = [0] * n
    budget = n * target_deg // 3
    attempts = 0
    while len(edges) < budget and attempts < 80 * budget:
        attempts += 1
        a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
        if a == b or b == c or a == c:
            continue
        tri = tuple(sorted((a, b, c)))
        pairs = list(itertools.combinations(tri, 2))
        if any(p in pair_used for p in pairs):
            continue
        if any(deg[v] >= target_deg for v in tri):
            continue
        pair_used.update(pairs)
        edges.append(set(tri))
        for v in tri:
            deg[v] += 1
    return MultiHypergraph(n, edges)


# -- factor groups ------------------------------------------------------


def test_factor_groups_parallel_matchings():
    # q parallel copies of K_12's edges, k = 2, T = q = 2
    n, q = 12, 2
    mult = {(u, v): q for u in range(n) for v in range(u + 1, n)}
    g = MultiGraph(n, mult, cap=q)
    fg = factor_group_decomposition(g, k=2, q=q, t_groups=2, nu=0.15, eps=0.3, seed=3)
    assert len(fg.groups) == 2
    assert fg.kappa >= 1
    validate_factor_groups(g, 2, fg, eps=0.3, slack=3.0)


def test_factor_groups_k8_simple():
    n = 8
    mult = {(u, v): 1 for u in range(n) for v in range(u + 1, n)}
    g = MultiGraph(n, mult, cap=1)
    fg = factor_group_decomposition(g, k=2, q=1, t_groups=1, nu=0.2, eps=0.3, seed=5)
    assert fg.kappa >= 2
    validate_factor_groups(g, 2, fg, eps=0.3, slack=3.0)
    # an excluded vertex never appears in any factor (checked by validator,
    # re-checked here directly)
    excluded = set(fg.excluded)
    for group in fg.groups:
        for factor in group:
            for cl in factor:
                assert not (set(cl) & excluded)


def test_factor_groups_triangles():
    n = 12
    mult = {(u, v): 2 for u in range(n) for v in range(u + 1, n)}
    g = MultiGraph(n, mult, cap=2)
    fg = factor_group_decomposition(g, k=3, q=2, t_groups=2, nu=0.2, eps=0.35, seed=2)
    assert fg.kappa >= 1
    validate_factor_groups(g, 3, fg, eps=0.35, slack=3.0)


def test_matching_groups_k6():
    n = 6
    g = MultiGraph(n, {(u, v): 1 for u in range(n) for v in range(u + 1, n)})
    fg = matching_group_decomposition(g, q=1, t_groups=1, nu=0.05, seed=1)
    assert fg.kappa >= 2
    assert fg.excluded == []


def test_matching_groups_k7_parity():
    n = 7
    g = MultiGraph(n, {(u, v): 1 for u in range(n) for v in range(u + 1, n)})
    fg = matching_group_decomposition(g, q=1, t_groups=1, nu=0.1, seed=1)
    assert len(fg.excluded) == 1
    for group in fg.groups:
        for matching in group:
            covered = {v for e in matching for v in e}
            assert covered == set(range(n)) - set(fg.excluded)


def test_matching_groups_edge_disjoint_across_groups():
    n = 10
    g = MultiGraph(n, {(u, v): 1 for u in range(n) for v in range(u + 1, n)})
    fg = matching_group_decomposition(g, q=1, t_groups=2, nu=0.2, seed=4)
    seen = set()
    for group in fg.groups:
        for matching in group:
            for e in matching:
                assert e not in seen
                seen.add(e)
