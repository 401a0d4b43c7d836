import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    complete_graph,
    cycle_graph,
    empty_graph,
    random_graph,
    star_graph,
)
from packforge.core import (
    GuestGraph,
    MultiGraph,
    MultiHypergraph,
    SimpleGraph,
    check_separator,
    check_small_class_colouring,
    graph_stats,
)
from packforge.certify import (
    PackingCertificate,
    host_fingerprint,
    verify_packing,
)
from packforge.errors import InputError, StaleCertificateError


def test_no_loops():
    with pytest.raises(InputError):
        SimpleGraph(3, [(1, 1)])


def test_edge_out_of_range():
    with pytest.raises(InputError):
        SimpleGraph(3, [(0, 3)])


def test_duplicate_edges_collapse():
    g = SimpleGraph(3, [(0, 1), (1, 0), (0, 1)])
    assert g.m == 1


def test_stats_k4():
    s = graph_stats(complete_graph(4))
    assert (s["n"], s["e"], s["min_degree"], s["max_degree"]) == (4, 6, 3, 3)


def test_stats_empty():
    s = graph_stats(empty_graph(5))
    assert (s["n"], s["e"], s["min_degree"], s["max_degree"]) == (5, 0, 0, 0)


def test_stats_star():
    s = graph_stats(star_graph(4))
    assert (s["n"], s["e"], s["min_degree"], s["max_degree"]) == (5, 4, 1, 4)


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_degree_sum_is_twice_edges(n, seed):
    g = random_graph(n, 0.4, seed)
    s = graph_stats(g)
    assert sum(d * c for d, c in s["degree_histogram"].items()) == 2 * s["e"]
    assert s["min_degree"] <= s["max_degree"]


def test_bfs_distances_path():
    from conftest import path_graph

    g = path_graph(6)
    assert g.bfs_distances([0]) == [0, 1, 2, 3, 4, 5]
    assert g.ball([0], 2) == {0, 1, 2}


def test_subgraph_reindexes():
    g = cycle_graph(5)
    sub, idx = g.subgraph([1, 2, 3])
    assert sub.n == 3 and sub.m == 2
    assert idx[1] == 0


def test_multigraph_cap():
    with pytest.raises(InputError):
        MultiGraph(3, {(0, 1): 4}, cap=3)
    mg = MultiGraph(3, {(0, 1): 2, (1, 2): 1})
    assert mg.degree(1) == 3
    assert mg.edge_count() == 3
    assert mg.support().m == 2


def test_hypergraph_counts():
    h = MultiHypergraph(4, [{0, 1, 2}, {0, 1, 2}, {1, 3}])
    assert h.rank == 3
    assert h.mult({0, 1, 2}) == 2
    assert h.degree(1) == 3
    assert h.codegree(0, 1) == 2
    assert h.max_codegree() == 2


def test_guest_witness_validation():
    g = cycle_graph(9)  # odd cycle: 3-chromatic
    guest = GuestGraph(
        "c9", g, max_degree_bound=2, eta=0.5, k=2,
        colouring=[[0], [1, 3, 5, 7], [2, 4, 6, 8]],
        separator=[0, 4],
    )
    guest.validate()
    bad = GuestGraph(
        "c9b", g, max_degree_bound=2, eta=0.5, k=2,
        colouring=[[0], [1, 2], [3, 4, 5, 6, 7, 8]],
    )
    with pytest.raises(InputError):
        bad.validate()


def test_separator_checker_rejects_large_component():
    g = cycle_graph(10)
    with pytest.raises(InputError):
        check_separator(g, [0], 0.2)  # removing one vertex leaves a 9-path


# -- certificates ------------------------------------------------------


def _matching_guest(i):
    # perfect matching on 4 vertices
    return GuestGraph(
        f"m{i}", SimpleGraph(4, [(0, 1), (2, 3)]), 2, 0.5, 2
    )


def test_verify_k4_decomposes_into_three_matchings():
    host = complete_graph(4)
    # the three perfect matchings of K_4
    maps = {"m0": [0, 1, 2, 3], "m1": [0, 2, 1, 3], "m2": [0, 3, 1, 2]}
    guests = [_matching_guest(i) for i in range(3)]
    cert = PackingCertificate(host_fingerprint(host), maps)
    rep = verify_packing(host, guests, cert)
    assert rep.valid and rep.leftover_edges == 0


def test_verify_identity_cycle():
    host = cycle_graph(4)
    guest = GuestGraph("c", cycle_graph(4), 2, 0.6, 2)
    cert = PackingCertificate(host_fingerprint(host), {"c": [0, 1, 2, 3]})
    rep = verify_packing(host, [guest], cert)
    assert rep.valid and rep.leftover_edges == 0


def test_verify_detects_edge_reuse():
    host = complete_graph(4)
    e = GuestGraph("e1", SimpleGraph(2, [(0, 1)]), 1, 1.0, 2)
    e2 = GuestGraph("e2", SimpleGraph(2, [(0, 1)]), 1, 1.0, 2)
    cert = PackingCertificate(
        host_fingerprint(host), {"e1": [0, 1], "e2": [0, 1]}
    )
    rep = verify_packing(host, [e, e2], cert)
    assert not rep.valid
    assert any("edge reuse (0, 1)" in v for v in rep.violations)


def test_verify_detects_non_host_edge():
    host = cycle_graph(4)
    tri = GuestGraph("t", SimpleGraph(3, [(0, 1), (1, 2), (0, 2)]), 2, 1.0, 3)
    cert = PackingCertificate(host_fingerprint(host), {"t": [0, 1, 2]})
    rep = verify_packing(host, [tri], cert)
    assert not rep.valid


def test_verify_detects_noninjective_map():
    host = complete_graph(4)
    e = GuestGraph("e", SimpleGraph(2, [(0, 1)]), 1, 1.0, 2)
    cert = PackingCertificate(host_fingerprint(host), {"e": [1, 1]})
    assert not verify_packing(host, [e], cert).valid


def test_stale_fingerprint():
    host = complete_graph(4)
    cert = PackingCertificate("deadbeef", {})
    with pytest.raises(StaleCertificateError):
        verify_packing(host, [], cert)


def test_unknown_guest_id():
    host = complete_graph(4)
    cert = PackingCertificate(host_fingerprint(host), {"ghost": [0, 1, 2, 3]})
    with pytest.raises(InputError):
        verify_packing(host, [], cert)


def test_fingerprint_order_independent():
    g1 = SimpleGraph(4, [(0, 1), (2, 3)])
    g2 = SimpleGraph(4, [(2, 3), (0, 1)])
    assert host_fingerprint(g1) == host_fingerprint(g2)
    g3 = SimpleGraph(4, [(0, 1), (1, 3)])
    assert host_fingerprint(g1) != host_fingerprint(g3)


def test_certificate_roundtrip(tmp_path):
    cert = PackingCertificate("ab" * 32, {"g1": [0, 2, 1]})
    p = tmp_path / "cert.json"
    cert.write(p)
    back = PackingCertificate.read(p)
    assert back == cert
