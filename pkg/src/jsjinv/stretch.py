"""Moduli, relative stretch factors and per-cylinder normalization."""

from __future__ import annotations

from fractions import Fraction

from .errors import DifferentCylinders, MissingLength
from .model import CylinderGraph, EdgeRecord


def _edge(g: CylinderGraph, e: str | EdgeRecord) -> EdgeRecord:
    return e if isinstance(e, EdgeRecord) else g.edge(e)


def modulus(g: CylinderGraph, e0: str | EdgeRecord, e1: str | EdgeRecord) -> Fraction:
    a, b = _edge(g, e0), _edge(g, e1)
    if a.cyl != b.cyl:
        raise DifferentCylinders(f"{a.id!r} and {b.id!r} meet different cylinders")
    return a.k / b.k


def lattice_modulus(k0: int, k1: int) -> Fraction:
    """Index ratio for <z^k0> and <z^k1> in Z = <z>, by direct search.

    Finds the intersection generator by scanning multiples, then counts
    cosets by stepping through one period; no gcd/lcm shortcut.
    """
    a, b = abs(k0), abs(k1)
    if a == 0 or b == 0:
        raise ValueError("scales must be nonzero")
    m = next(n for n in range(1, a * b + 1) if n % a == 0 and n % b == 0)
    index_in_1 = sum(1 for x in range(0, m, b))  # [<z^b> : <z^m>]
    index_in_0 = sum(1 for x in range(0, m, a))  # [<z^a> : <z^m>]
    return Fraction(index_in_1, index_in_0)


def _scaled_length(e: EdgeRecord) -> Fraction:
    if e.length is None:
        raise MissingLength(f"edge {e.id!r} has no length")
    return e.length / e.k


def relative_stretch(g: CylinderGraph, side0: tuple[str, str], side1: tuple[str, str]) -> Fraction:
    """Stretch from ``(v0, e0)`` to ``(v1, e1)``: L(v1)/L(v0) with L = length/k."""
    (v0, e0), (v1, e1) = side0, side1
    a, b = g.edge(e0), g.edge(e1)
    if a.ne != v0 or b.ne != v1:
        raise ValueError("each edge must end at the given vertex")
    if a.cyl != b.cyl:
        raise DifferentCylinders(f"{e0!r} and {e1!r} meet different cylinders")
    return _length(b) / _length(a) * modulus(g, a, b)


def _length(e: EdgeRecord) -> Fraction:
    if e.length is None:
        raise MissingLength(f"edge {e.id!r} has no length")
    return e.length


def rigid_edges(g: CylinderGraph, cid: str) -> list[EdgeRecord]:
    vmap = g._vertex_map()
    return sorted((e for e in g.edges if e.cyl == cid and vmap[e.ne].kind == "rigid"), key=lambda e: e.id)


def normalize_cylinder(g: CylinderGraph, cid: str) -> dict[str, Fraction]:
    edges = rigid_edges(g, cid)
    if not edges:
        raise ValueError(f"cylinder {cid!r} has no rigid neighbor")
    if len(edges) == 1:
        return {edges[0].id: Fraction(1)}
    ls = {e.id: _scaled_length(e) for e in edges}
    low = min(ls.values())
    return {eid: L / low for eid, L in ls.items()}


def stretch_decoration(g: CylinderGraph) -> dict[str, Fraction | None]:
    out: dict[str, Fraction | None] = {e.id: None for e in g.edges}
    for v in g.vertices:
        if v.kind == "cylindrical" and rigid_edges(g, v.id):
            out.update(normalize_cylinder(g, v.id))
    return out


def stretch_table(g: CylinderGraph) -> list[tuple[str, str, Fraction]]:
    rows = []
    for v in sorted(g.vertices, key=lambda v: v.id):
        if v.kind == "cylindrical" and rigid_edges(g, v.id):
            for eid, rs in sorted(normalize_cylinder(g, v.id).items()):
                rows.append((v.id, eid, rs))
    return rows
