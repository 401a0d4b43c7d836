"""Shared graph builders for the test suite."""

from packforge.core import SimpleGraph
from packforge.rng import Rng


def complete_graph(n):
    return SimpleGraph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def cycle_graph(n):
    return SimpleGraph(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n):
    return SimpleGraph(n, ((i, i + 1) for i in range(n - 1)))


def empty_graph(n):
    return SimpleGraph(n)


def star_graph(leaves):
    return SimpleGraph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def complete_multipartite(sizes):
    bounds = []
    start = 0
    for s in sizes:
        bounds.append(range(start, start + s))
        start += s
    edges = [
        (u, v)
        for i in range(len(bounds))
        for j in range(i + 1, len(bounds))
        for u in bounds[i]
        for v in bounds[j]
    ]
    return SimpleGraph(start, edges)


def petersen_graph():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    return SimpleGraph(10, outer + inner + spokes)


def random_graph(n, p, seed):
    rng = Rng(seed)
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.coin(p)
    ]
    return SimpleGraph(n, edges)
