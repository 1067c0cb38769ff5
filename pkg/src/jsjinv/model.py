"""Input data model: the quotient graph of cylinders and its subdivision.

A :class:`CylinderGraph` is the validated form of an input document.
Refinement never works on it directly; :func:`subdivide` turns one or more
graphs into a :class:`RefinementComplex` whose cells are the vertex records
and edge records, with lift counts on the incidences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import (
    BipartiteError,
    DanglingReference,
    InfiniteCylinderValence,
    MissingLength,
    SchemaError,
)
from .ornaments import (
    DEFAULT_UNIVERSE,
    ONE,
    ExtNat,
    Ornament,
    OrnamentUniverse,
    format_rational,
    parse_pos_rational,
)

KINDS = ("cylindrical", "rigid", "hanging")
MODES = ("type", "qi", "rel-qi", "boundary", "qi+stretch")
ORACLE_TYPES = ("flexible", "trivial", "signed_perm_group")

Decoration = tuple  # tuple[Ornament, ...] indexed by cell


@dataclass(frozen=True)
class VertexRecord:
    id: str
    kind: str
    qi_type: str | None = None
    rel_qi_type: str | None = None
    dihedral: bool = False
    oracle: str | None = None

    @property
    def elementary(self) -> bool:
        return self.kind == "cylindrical"


@dataclass(frozen=True)
class EdgeRecord:
    id: str
    cyl: str
    ne: str
    mult_at_cyl: int
    mult_at_ne: ExtNat
    sign: int | None
    k: Fraction
    length: Fraction | None = None
    reversible: bool = False


@dataclass(frozen=True)
class OracleSpec:
    id: str
    type: str
    slots: int | None = None
    generators: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    slot_edge: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def group_signature(self) -> tuple:
        """Everything except the vertex bindings; equal signatures mean one model."""
        return (self.id, self.type, self.slots, self.generators)


@dataclass(frozen=True)
class CylinderGraph:
    name: str
    vertices: tuple[VertexRecord, ...]
    edges: tuple[EdgeRecord, ...]
    oracles: tuple[OracleSpec, ...] = ()

    def vertex(self, vid: str) -> VertexRecord:
        return self._vertex_map()[vid]

    def edge(self, eid: str) -> EdgeRecord:
        return self._edge_map()[eid]

    def oracle(self, oid: str) -> OracleSpec:
        return {o.id: o for o in self.oracles}[oid]

    def _vertex_map(self) -> dict[str, VertexRecord]:
        return {v.id: v for v in self.vertices}

    def _edge_map(self) -> dict[str, EdgeRecord]:
        return {e.id: e for e in self.edges}

    def edges_at(self, vid: str) -> list[EdgeRecord]:
        return sorted((e for e in self.edges if vid in (e.cyl, e.ne)), key=lambda e: e.id)

    @property
    def is_trivial_jsj(self) -> bool:
        return not self.edges


# ---------------------------------------------------------------------------
# parsing


def _require(obj: Mapping, key: str, types: type | tuple, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = obj[key]
    if isinstance(val, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise SchemaError(f"{where}: field {key!r} has wrong type")
    if not isinstance(val, types):
        raise SchemaError(f"{where}: field {key!r} has wrong type")
    return val


def _optional(obj: Mapping, key: str, types: type | tuple, where: str, default: Any = None) -> Any:
    if obj.get(key) is None:
        return default
    return _require(obj, key, types, where)


def _parse_vertex(raw: Any, i: int) -> VertexRecord:
    where = f"vertices[{i}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: expected an object")
    vid = _require(raw, "id", str, where)
    kind = _require(raw, "kind", str, where)
    if kind not in KINDS:
        raise SchemaError(f"{where}: unknown kind {kind!r}")
    dihedral = _optional(raw, "dihedral", bool, where, False)
    oracle = _optional(raw, "oracle", str, where)
    if dihedral and kind != "cylindrical":
        raise SchemaError(f"{where}: dihedral is only allowed on cylindrical vertices")
    if oracle is not None and kind == "cylindrical":
        raise SchemaError(f"{where}: oracle is only allowed on rigid or hanging vertices")
    return VertexRecord(
        id=vid,
        kind=kind,
        qi_type=_optional(raw, "qi_type", str, where),
        rel_qi_type=_optional(raw, "rel_qi_type", str, where),
        dihedral=dihedral,
        oracle=oracle,
    )


def _parse_edge(raw: Any, i: int) -> EdgeRecord:
    where = f"edges[{i}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: expected an object")
    mc = raw.get("mult_at_cyl")
    if mc == "inf":
        raise InfiniteCylinderValence(f"{where}: mult_at_cyl must be finite")
    mc = _require(raw, "mult_at_cyl", int, where)
    if mc < 1:
        raise SchemaError(f"{where}: mult_at_cyl must be positive")
    if "mult_at_ne" not in raw:
        raise SchemaError(f"{where}: missing field 'mult_at_ne'")
    mn = ExtNat.parse(raw["mult_at_ne"])
    if mn == 0:
        raise SchemaError(f"{where}: mult_at_ne must be positive")
    sign = raw.get("sign")
    if sign is not None and (isinstance(sign, bool) or sign not in (1, -1)):
        raise SchemaError(f"{where}: sign must be 1, -1 or null")
    if "k" not in raw:
        raise SchemaError(f"{where}: missing field 'k'")
    length = raw.get("length")
    return EdgeRecord(
        id=_require(raw, "id", str, where),
        cyl=_require(raw, "cyl", str, where),
        ne=_require(raw, "ne", str, where),
        mult_at_cyl=mc,
        mult_at_ne=mn,
        sign=sign,
        k=parse_pos_rational(raw["k"], f"{where}.k"),
        length=None if length is None else parse_pos_rational(length, f"{where}.length"),
        reversible=_optional(raw, "reversible", bool, where, False),
    )


def _parse_oracle(raw: Any, i: int) -> OracleSpec:
    where = f"oracles[{i}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: expected an object")
    oid = _require(raw, "id", str, where)
    otype = _require(raw, "type", str, where)
    if otype not in ORACLE_TYPES:
        raise SchemaError(f"{where}: unknown oracle type {otype!r}")
    slots = _optional(raw, "slots", int, where)
    if slots is not None and slots < 1:
        raise SchemaError(f"{where}: slots must be positive")
    gens = []
    for j, g in enumerate(_optional(raw, "generators", list, where, [])):
        gw = f"{where}.generators[{j}]"
        if not isinstance(g, dict):
            raise SchemaError(f"{gw}: expected an object")
        perm = _require(g, "perm", list, gw)
        signs = g.get("signs", [1] * len(perm))
        if slots is None or sorted(perm) != list(range(slots)):
            raise SchemaError(f"{gw}: perm must be a permutation of the {slots} slots")
        if not isinstance(signs, list) or len(signs) != slots or any(
            isinstance(s, bool) or s not in (1, -1) for s in signs
        ):
            raise SchemaError(f"{gw}: signs must list 1 or -1 per slot")
        gens.append((tuple(perm), tuple(signs)))
    slot_edge: dict[str, tuple[str, ...]] = {}
    for vid, table in _optional(raw, "slot_edge", dict, where, {}).items():
        sw = f"{where}.slot_edge[{vid!r}]"
        if not isinstance(table, dict):
            raise SchemaError(f"{sw}: expected an object")
        if slots is None:
            raise SchemaError(f"{where}: slot_edge needs slots")
        try:
            idx = {int(k): v for k, v in table.items()}
        except ValueError:
            raise SchemaError(f"{sw}: slot indices must be integers") from None
        if sorted(idx) != list(range(slots)) or not all(isinstance(v, str) for v in idx.values()):
            raise SchemaError(f"{sw}: must map every slot 0..{slots - 1} to an edge id")
        slot_edge[vid] = tuple(idx[s] for s in range(slots))
    if otype == "signed_perm_group" and slots is None:
        raise SchemaError(f"{where}: signed_perm_group needs slots")
    return OracleSpec(oid, otype, slots, tuple(gens), slot_edge)


def parse_document(doc: Any) -> CylinderGraph:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    name = _require(doc, "name", str, "document")
    raw_vertices = _require(doc, "vertices", list, "document")
    raw_edges = _require(doc, "edges", list, "document")
    raw_oracles = _optional(doc, "oracles", list, "document", [])
    if not raw_vertices:
        raise SchemaError("document: vertex list is empty")
    vertices = tuple(_parse_vertex(v, i) for i, v in enumerate(raw_vertices))
    edges = tuple(_parse_edge(e, i) for i, e in enumerate(raw_edges))
    oracles = tuple(_parse_oracle(o, i) for i, o in enumerate(raw_oracles))

    for label, ids in (("vertex", [v.id for v in vertices]), ("edge", [e.id for e in edges]),
                       ("oracle", [o.id for o in oracles])):
        if len(set(ids)) != len(ids):
            raise SchemaError(f"duplicate {label} id")
    vmap = {v.id: v for v in vertices}
    for e in edges:
        for end in (e.cyl, e.ne):
            if end not in vmap:
                raise DanglingReference(f"edge {e.id!r} refers to unknown vertex {end!r}")
        if e.cyl == e.ne:
            raise BipartiteError(f"edge {e.id!r} is a loop")
        if vmap[e.cyl].kind != "cylindrical" or vmap[e.ne].kind == "cylindrical":
            raise BipartiteError(f"edge {e.id!r} must join a cylindrical vertex to a non-elementary one")
    omap = {o.id: o for o in oracles}
    for v in vertices:
        if v.oracle is not None and v.oracle not in omap:
            raise DanglingReference(f"vertex {v.id!r} refers to unknown oracle {v.oracle!r}")
    incident: dict[str, set[str]] = {v.id: set() for v in vertices}
    for e in edges:
        incident[e.cyl].add(e.id)
        incident[e.ne].add(e.id)
    for o in oracles:
        for vid, slot_edges in o.slot_edge.items():
            if vid not in vmap:
                raise DanglingReference(f"oracle {o.id!r} binds unknown vertex {vid!r}")
            if vmap[vid].oracle != o.id:
                raise SchemaError(f"oracle {o.id!r} has slots for {vid!r}, which is bound elsewhere")
            if set(slot_edges) != incident[vid]:
                raise SchemaError(f"oracle {o.id!r}: slots of {vid!r} must cover exactly its incident edges")
    for v in vertices:
        if v.oracle is not None and omap[v.oracle].type != "flexible" and v.id not in omap[v.oracle].slot_edge:
            raise SchemaError(f"vertex {v.id!r}: oracle {v.oracle!r} has no slot_edge entry for it")
    _check_connected(vertices, edges)
    return CylinderGraph(name, vertices, edges, oracles)


def _check_connected(vertices: Sequence[VertexRecord], edges: Sequence[EdgeRecord]) -> None:
    adj: dict[str, set[str]] = {v.id: set() for v in vertices}
    for e in edges:
        adj[e.cyl].add(e.ne)
        adj[e.ne].add(e.cyl)
    start = vertices[0].id
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(vertices):
        raise SchemaError("graph is not connected")


def parse_input(document: str) -> CylinderGraph:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    return parse_document(doc)


def load(path: str | Path) -> CylinderGraph:
    return parse_input(Path(path).read_text())


def serialize(g: CylinderGraph) -> dict:
    vertices = []
    for v in g.vertices:
        rec: dict[str, Any] = {"id": v.id, "kind": v.kind}
        for key in ("qi_type", "rel_qi_type", "oracle"):
            if getattr(v, key) is not None:
                rec[key] = getattr(v, key)
        if v.dihedral:
            rec["dihedral"] = True
        vertices.append(rec)
    edges = []
    for e in g.edges:
        rec = {
            "id": e.id, "cyl": e.cyl, "ne": e.ne,
            "mult_at_cyl": e.mult_at_cyl, "mult_at_ne": e.mult_at_ne.to_json(),
            "sign": e.sign, "k": format_rational(e.k),
        }
        if e.length is not None:
            rec["length"] = format_rational(e.length)
        if e.reversible:
            rec["reversible"] = True
        edges.append(rec)
    oracles = []
    for o in g.oracles:
        rec = {"id": o.id, "type": o.type}
        if o.slots is not None:
            rec["slots"] = o.slots
        if o.generators:
            rec["generators"] = [{"perm": list(p), "signs": list(s)} for p, s in o.generators]
        if o.slot_edge:
            rec["slot_edge"] = {v: {str(i): eid for i, eid in enumerate(t)} for v, t in o.slot_edge.items()}
        oracles.append(rec)
    return {"name": g.name, "vertices": vertices, "edges": edges, "oracles": oracles}


# ---------------------------------------------------------------------------
# finite multigraphs (the universal-cover regime)


@dataclass(frozen=True)
class Multigraph:
    """A loopless finite multigraph on vertices ``0..n-1``."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"bad edge {(u, v)} for {self.n} vertices")

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)


# ---------------------------------------------------------------------------
# the subdivided complex


@dataclass(frozen=True)
class RefinementComplex:
    """Cells are vertex records followed by edge records.

    ``ends[e]`` holds the two vertex cells of edge cell ``e`` (cylindrical end
    first for cylinder graphs) and ``end_mult[e]`` the lift counts at those
    ends.  Vertex cells carry ``incident``: (edge cell, count) pairs.
    """

    names: tuple[str, ...]
    component: tuple[int, ...]
    n_vertices: int
    kinds: tuple[str, ...]
    ends: tuple[tuple[int, int] | None, ...]
    end_mult: tuple[tuple[ExtNat, ExtNat] | None, ...]
    incident: tuple[tuple[tuple[int, ExtNat], ...], ...]
    graphs: tuple[CylinderGraph, ...] = ()
    vertex_rec: tuple[VertexRecord | None, ...] = ()
    edge_rec: tuple[EdgeRecord | None, ...] = ()
    oracle_of: Mapping[int, tuple[str, OracleSpec]] = field(default_factory=dict)
    slot_cells: Mapping[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def n_cells(self) -> int:
        return len(self.names)

    def is_edge(self, t: int) -> bool:
        return t >= self.n_vertices

    @property
    def vertex_cells(self) -> range:
        return range(self.n_vertices)

    @property
    def edge_cells(self) -> range:
        return range(self.n_vertices, self.n_cells)

    def adjacency(self, t: int) -> tuple[tuple[int, ExtNat], ...]:
        if self.is_edge(t):
            a, b = self.ends[t]
            return ((a, ONE), (b, ONE))
        return self.incident[t]

    def other_end(self, e: int, v: int) -> int:
        a, b = self.ends[e]
        return b if a == v else a

    def mult_at(self, e: int, v: int) -> ExtNat:
        a, _ = self.ends[e]
        return self.end_mult[e][0 if a == v else 1]

    def cells_of(self, component: int) -> list[int]:
        return [t for t in range(self.n_cells) if self.component[t] == component]

    def cell(self, name: str, component: int = 0, edge: bool | None = None) -> int:
        for t in range(self.n_cells):
            if self.names[t] == name and self.component[t] == component:
                if edge is None or edge == self.is_edge(t):
                    return t
        raise KeyError(name)

    def is_cylinder(self, t: int) -> bool:
        return not self.is_edge(t) and self.kinds[t] == "cylindrical"

    def is_non_elementary(self, t: int) -> bool:
        return not self.is_edge(t) and self.kinds[t] in ("rigid", "hanging")


def subdivide(*graphs: CylinderGraph) -> RefinementComplex:
    """Subdivide one graph, or the disjoint union of several, into cells."""
    if not graphs:
        raise ValueError("need at least one graph")
    vkeys = sorted((i, v.id) for i, g in enumerate(graphs) for v in g.vertices)
    ekeys = sorted((i, e.id) for i, g in enumerate(graphs) for e in g.edges)
    nv = len(vkeys)
    vindex = {key: t for t, key in enumerate(vkeys)}
    eindex = {key: nv + t for t, key in enumerate(ekeys)}
    maps = [(g._vertex_map(), g._edge_map()) for g in graphs]

    vertex_rec = [maps[i][0][vid] for i, vid in vkeys] + [None] * len(ekeys)
    edge_rec = [None] * nv + [maps[i][1][eid] for i, eid in ekeys]
    kinds = [r.kind for r in vertex_rec[:nv]] + ["edge"] * len(ekeys)
    ends: list = [None] * nv
    end_mult: list = [None] * nv
    incident: list[list] = [[] for _ in range(nv)]
    for (i, eid) in ekeys:
        e = maps[i][1][eid]
        t = eindex[(i, eid)]
        a, b = vindex[(i, e.cyl)], vindex[(i, e.ne)]
        ends.append((a, b))
        end_mult.append((ExtNat(e.mult_at_cyl), e.mult_at_ne))
        incident[a].append((t, ExtNat(e.mult_at_cyl)))
        incident[b].append((t, e.mult_at_ne))

    # oracle registry: one model per id unless two graphs disagree on it
    registry: dict[str, tuple] = {}
    clash: set[str] = set()
    for g in graphs:
        for o in g.oracles:
            sig = o.group_signature()
            if registry.setdefault(o.id, sig) != sig:
                clash.add(o.id)
    oracle_of: dict[int, tuple[str, OracleSpec]] = {}
    slot_cells: dict[int, tuple[int, ...]] = {}
    for t, (i, vid) in enumerate(vkeys):
        rec = vertex_rec[t]
        if rec.oracle is None:
            continue
        spec = graphs[i].oracle(rec.oracle)
        eff = f"{spec.id}@{i}" if spec.id in clash else spec.id
        oracle_of[t] = (eff, spec)
        if vid in spec.slot_edge:
            slot_cells[t] = tuple(eindex[(i, eid)] for eid in spec.slot_edge[vid])

    return RefinementComplex(
        names=tuple(k[1] for k in vkeys) + tuple(k[1] for k in ekeys),
        component=tuple(k[0] for k in vkeys) + tuple(k[0] for k in ekeys),
        n_vertices=nv,
        kinds=tuple(kinds),
        ends=tuple(ends),
        end_mult=tuple(end_mult),
        incident=tuple(tuple(sorted(x)) for x in incident),
        graphs=tuple(graphs),
        vertex_rec=tuple(vertex_rec),
        edge_rec=tuple(edge_rec),
        oracle_of=oracle_of,
        slot_cells=slot_cells,
    )


def complex_from_multigraph(*graphs: Multigraph) -> RefinementComplex:
    """Subdivided universal-cover complex of finite multigraphs."""
    names: list[str] = []
    comp: list[int] = []
    offsets = []
    for i, m in enumerate(graphs):
        offsets.append(len(names))
        names.extend(f"v{j}" for j in range(m.n))
        comp.extend([i] * m.n)
    nv = len(names)
    ends: list = [None] * nv
    end_mult: list = [None] * nv
    incident: list[list] = [[] for _ in range(nv)]
    for i, m in enumerate(graphs):
        for j, (u, v) in enumerate(m.edges):
            t = len(names)
            names.append(f"e{j}")
            comp.append(i)
            a, b = offsets[i] + u, offsets[i] + v
            ends.append((a, b))
            end_mult.append((ONE, ONE))
            incident[a].append((t, ONE))
            incident[b].append((t, ONE))
    return RefinementComplex(
        names=tuple(names),
        component=tuple(comp),
        n_vertices=nv,
        kinds=("vertex",) * nv + ("edge",) * (len(names) - nv),
        ends=tuple(ends),
        end_mult=tuple(end_mult),
        incident=tuple(tuple(x) for x in incident),
    )


# ---------------------------------------------------------------------------
# initial decorations


def _vertex_label(v: VertexRecord, mode: str) -> str | None:
    if mode == "type":
        return None
    if mode == "qi":
        return v.qi_type
    return v.rel_qi_type if v.rel_qi_type is not None else v.qi_type


def initial_decoration(
    cx: RefinementComplex, mode: str, universe: OrnamentUniverse = DEFAULT_UNIVERSE
) -> Decoration:
    """Base ornaments for every cell of ``cx`` under ``mode``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not cx.graphs:
        return trivial_decoration(cx, universe)
    rs_labels: list[Mapping[str, Fraction | None]] = []
    if mode == "qi+stretch":
        from .stretch import stretch_decoration

        rs_labels = [stretch_decoration(g) for g in cx.graphs]
    out: list[Ornament] = []
    for t in range(cx.n_cells):
        if not cx.is_edge(t):
            v = cx.vertex_rec[t]
            label = _vertex_label(v, mode)
            out.append(universe.base(v.kind) if label is None else universe.base(v.kind, label))
        elif mode == "qi+stretch":
            rs = rs_labels[cx.component[t]][cx.names[t]]
            out.append(universe.base("edge", "null" if rs is None else format_rational(rs)))
        else:
            out.append(universe.base("edge"))
    return tuple(out)


def trivial_decoration(cx: RefinementComplex, universe: OrnamentUniverse = DEFAULT_UNIVERSE) -> Decoration:
    v, e = universe.base("vertex"), universe.base("edge")
    return tuple(e if cx.is_edge(t) else v for t in range(cx.n_cells))


def require_lengths(g: CylinderGraph) -> None:
    """Raise MissingLength unless every cylinder with two or more rigid edges has lengths."""
    vmap = g._vertex_map()
    by_cyl: dict[str, list[EdgeRecord]] = {}
    for e in g.edges:
        if vmap[e.ne].kind == "rigid":
            by_cyl.setdefault(e.cyl, []).append(e)
    for cid, es in by_cyl.items():
        if len(es) > 1:
            missing = [e.id for e in es if e.length is None]
            if missing:
                raise MissingLength(f"cylinder {cid!r}: edges {missing} need a length")
