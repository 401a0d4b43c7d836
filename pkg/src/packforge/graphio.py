"""File formats: edge lists, JSON graph manifests, guests, certificates.

Edge list: one ``u v`` pair per line, 0-indexed, ``#`` comments.  The header
comment ``# n <count>`` pins the vertex count (otherwise max index + 1).
JSON manifest: ``{"n": int, "edges": [[u, v], ...], "multiplicities": {...}}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import GuestGraph, MultiGraph, SimpleGraph
from .errors import InputError


def read_edge_list(path) -> SimpleGraph:
    edges = []
    n_declared = None
    max_v = -1
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "n":
                n_declared = int(parts[1])
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"bad edge line: {raw!r}")
        u, v = int(parts[0]), int(parts[1])
        edges.append((u, v))
        max_v = max(max_v, u, v)
    n = n_declared if n_declared is not None else max_v + 1
    return SimpleGraph(n, edges)


def write_edge_list(path, g: SimpleGraph) -> None:
    lines = [f"# n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in sorted(g.edges()))
    Path(path).write_text("\n".join(lines) + "\n")


def graph_to_json(g: SimpleGraph | MultiGraph) -> dict:
    if isinstance(g, MultiGraph):
        return {
            "n": g.n,
            "edges": sorted([u, v] for (u, v) in g.mult),
            "multiplicities": {f"{u},{v}": c for (u, v), c in sorted(g.pairs())},
        }
    return {"n": g.n, "edges": sorted([u, v] for u, v in g.edges())}


def graph_from_json(obj: dict) -> SimpleGraph | MultiGraph:
    n = obj["n"]
    if obj.get("multiplicities"):
        mult = {}
        for key, c in obj["multiplicities"].items():
            u, v = (int(x) for x in key.split(","))
            mult[(u, v)] = c
        return MultiGraph(n, mult)
    return SimpleGraph(n, ((int(u), int(v)) for u, v in obj["edges"]))


def read_graph(path) -> SimpleGraph:
    path = Path(path)
    if path.suffix == ".json":
        g = graph_from_json(json.loads(path.read_text()))
        if not isinstance(g, SimpleGraph):
            raise InputError(f"{path} holds a multigraph, expected a graph")
        return g
    return read_edge_list(path)


def write_graph(path, g: SimpleGraph) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(graph_to_json(g), indent=1) + "\n")
    else:
        write_edge_list(path, g)


def guest_to_json(guest: GuestGraph) -> dict:
    obj = {
        "id": guest.id,
        "graph": graph_to_json(guest.graph),
        "max_degree_bound": guest.max_degree_bound,
        "eta": guest.eta,
        "k": guest.k,
    }
    if guest.colouring is not None:
        obj["colouring"] = [sorted(c) for c in guest.colouring]
    if guest.separator is not None:
        obj["separator"] = sorted(guest.separator)
    return obj


def guest_from_json(obj: dict) -> GuestGraph:
    graph = graph_from_json(obj["graph"])
    assert isinstance(graph, SimpleGraph)
    return GuestGraph(
        id=obj["id"],
        graph=graph,
        max_degree_bound=obj["max_degree_bound"],
        eta=obj["eta"],
        k=obj["k"],
        colouring=[list(c) for c in obj["colouring"]] if "colouring" in obj else None,
        separator=list(obj["separator"]) if "separator" in obj else None,
    )


def read_guest(path) -> GuestGraph:
    return guest_from_json(json.loads(Path(path).read_text()))


def write_guest(path, guest: GuestGraph) -> None:
    Path(path).write_text(json.dumps(guest_to_json(guest), indent=1) + "\n")


def read_guest_dir(path) -> list[GuestGraph]:
    """All guest JSON files in a directory, sorted by filename."""
    guests = []
    for f in sorted(Path(path).glob("*.json")):
        guests.append(read_guest(f))
    return guests
