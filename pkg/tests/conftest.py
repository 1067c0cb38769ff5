from __future__ import annotations

import json
from importlib.resources import files

import pytest

from jsjinv.model import CylinderGraph, load, parse_document

FIXTURES = ("fig1", "fig3", "fig4", "fig5", "ex11-g0", "ex11-g1", "ex11-g2")


def fixture_path(name: str):
    return files("jsjinv") / "fixtures" / f"{name}.json"


def fixture_doc(name: str) -> dict:
    return json.loads(fixture_path(name).read_text())


def fixture(name: str) -> CylinderGraph:
    return load(fixture_path(name))


def vertex_groups(state, component: int = 0) -> set[frozenset[str]]:
    """Stable vertex classes as sets of vertex ids."""
    cx, d = state.cx, state.decoration
    groups: dict = {}
    for t in cx.cells_of(component):
        if not cx.is_edge(t):
            groups.setdefault(d[t], set()).add(cx.names[t])
    return {frozenset(g) for g in groups.values()}


def edge_groups(state, component: int = 0) -> set[frozenset[str]]:
    cx, d = state.cx, state.decoration
    groups: dict = {}
    for t in cx.cells_of(component):
        if cx.is_edge(t):
            groups.setdefault(d[t], set()).add(cx.names[t])
    return {frozenset(g) for g in groups.values()}


def renamed(doc: dict, prefix: str = "x_") -> CylinderGraph:
    """Same graph with every vertex and edge id prefixed and lists reversed."""
    vmap = {v["id"]: prefix + v["id"] for v in doc["vertices"]}
    emap = {e["id"]: prefix + e["id"] for e in doc["edges"]}
    vertices = [dict(v, id=vmap[v["id"]]) for v in reversed(doc["vertices"])]
    edges = [dict(e, id=emap[e["id"]], cyl=vmap[e["cyl"]], ne=vmap[e["ne"]]) for e in reversed(doc["edges"])]
    oracles = []
    for o in doc.get("oracles", []):
        o = dict(o)
        if "slot_edge" in o:
            o["slot_edge"] = {vmap[v]: {s: emap[e] for s, e in m.items()} for v, m in o["slot_edge"].items()}
        oracles.append(o)
    return parse_document({"name": doc["name"], "vertices": vertices, "edges": edges, "oracles": oracles})


@pytest.fixture(params=FIXTURES)
def any_fixture(request) -> CylinderGraph:
    return fixture(request.param)
