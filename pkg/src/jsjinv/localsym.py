"""Local-symmetry oracles and vertex refinement.

A ``signed_perm_group`` oracle models the relevant symmetry group of a
rigid vertex as signed permutations of numbered peripheral slots.  Every
vertex bound to the oracle lists which edge record sits in each slot, and
two bound vertices are compared slot-by-slot through that numbering.

The state of a vertex seen by an oracle is one label per slot: the current
ornament of the slot's edge and its peripheral orientation.  A generator
``(perm, signs)`` moves the label of slot ``i`` to slot ``perm[i]`` and
multiplies its orientation by ``signs[i]``.  Questions about a marked edge
additionally track the marked slot and the accumulated sign at the mark,
which is -1 exactly when the line through the mark has been reversed.

``trivial`` oracles are the identity group on their slots; their reversal
answer is the ``reversible`` flag of the edge record.  ``flexible`` oracles
(hanging vertices) only look at counts of (ornament, oriented?) pairs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

from .errors import IllPosedQuery, OracleMissing
from .model import Decoration, OracleSpec, RefinementComplex
from .orient import PartialOrientation
from .ornaments import DEFAULT_UNIVERSE, ZERO, ExtNat, Ornament, OrnamentUniverse

__all__ = [
    "OracleSpec",
    "MatchQuery",
    "query_match",
    "query_reversal",
    "vertex_refine",
    "OracleEvent",
]

Labels = tuple  # tuple[tuple[int, int], ...]: (ornament rank, orientation) per slot
Generator = tuple  # (perm, signs)

MAX_ORBIT = 2_000_000


def _act(g: Generator, labels: Labels) -> Labels:
    perm, signs = g
    out: list = [None] * len(labels)
    for i, (r, ori) in enumerate(labels):
        out[perm[i]] = (r, signs[i] * ori)
    return tuple(out)


@lru_cache(maxsize=4096)
def _label_orbit(gens: tuple[Generator, ...], start: Labels) -> frozenset:
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for g in gens:
            nxt = _act(g, cur)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
                if len(seen) > MAX_ORBIT:
                    raise RuntimeError("orbit search exceeded its size bound")
    return frozenset(seen)


@lru_cache(maxsize=16384)
def _marked_orbit(gens: tuple[Generator, ...], start: Labels, mark: int) -> frozenset:
    """States (labels, mark, flag) reachable from (start, mark, +1)."""
    first = (start, mark, 1)
    seen = {first}
    queue = deque([first])
    while queue:
        labels, m, flag = queue.popleft()
        for g in gens:
            nxt = (_act(g, labels), g[0][m], flag * g[1][m])
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
                if len(seen) > MAX_ORBIT:
                    raise RuntimeError("orbit search exceeded its size bound")
    return frozenset(seen)


def _gens(spec: OracleSpec) -> tuple[Generator, ...]:
    return () if spec.type == "trivial" else spec.generators


class _Ranks:
    """Ornament <-> integer rank in canonical order, for compact orbit states."""

    def __init__(self, ornaments) -> None:
        self.order = sorted(set(ornaments), key=lambda o: o.key)
        self.rank = {o: i for i, o in enumerate(self.order)}

    def labels(self, cx: RefinementComplex, d: Decoration, o: PartialOrientation, v: int) -> Labels:
        return tuple((self.rank[d[e]], o[e]) for e in cx.slot_cells[v])

    def decode(self, labels: Labels) -> tuple:
        return tuple((self.order[r], ori) for r, ori in labels)


def _oracle(cx: RefinementComplex, v: int) -> tuple[str, OracleSpec]:
    try:
        return cx.oracle_of[v]
    except KeyError:
        raise OracleMissing(f"vertex {cx.names[v]!r} has no oracle binding") from None


def _slots_of(cx: RefinementComplex, v: int, e: int) -> list[int]:
    return [i for i, cell in enumerate(cx.slot_cells[v]) if cell == e]


def _flex_profile(cx: RefinementComplex, d: Decoration, o: PartialOrientation, v: int) -> tuple:
    counts: dict[tuple[Ornament, int], ExtNat] = {}
    for e, n in cx.incident[v]:
        key = (d[e], 1 if o[e] else 0)
        counts[key] = counts.get(key, ZERO) + n
    return tuple(sorted(((orn, ori, n) for (orn, ori), n in counts.items()), key=lambda x: (x[0].key, x[1])))


@dataclass
class _EdgeView:
    token: Any
    reversible: bool
    flag: int  # sign carrying the slot reference to the canonical state


def _edge_view(
    cx: RefinementComplex, d: Decoration, o: PartialOrientation, v: int, e: int, ranks: _Ranks
) -> _EdgeView:
    eff, spec = _oracle(cx, v)
    if spec.type == "flexible":
        token = ("flexible", eff, _flex_profile(cx, d, o, v), d[e], 1 if o[e] else 0)
        return _EdgeView(token, True, 1)
    labels = ranks.labels(cx, d, o, v)
    gens = _gens(spec)
    per_slot = []
    for s in _slots_of(cx, v, e):
        orbit = _marked_orbit(gens, labels, s)
        best = min((lab, m) for lab, m, _ in orbit)
        flags = sorted(f for lab, m, f in orbit if (lab, m) == best)
        per_slot.append((best, s, flags, (labels, s, -1) in orbit))
    per_slot.sort(key=lambda x: (x[0], x[1]))
    best, _, flags, reversed_ = per_slot[0]
    if spec.type == "trivial":
        reversible = bool(cx.edge_rec[e].reversible) and not o[e]
    else:
        reversible = reversed_
    distinct = sorted({p[0] for p in per_slot})
    token = (spec.type, eff, tuple((ranks.decode(lab), m) for lab, m in distinct))
    return _EdgeView(token, reversible, flags[0] if len(flags) == 1 else 1)


def _vertex_token(cx: RefinementComplex, d: Decoration, o: PartialOrientation, v: int, ranks: _Ranks) -> Any:
    eff, spec = _oracle(cx, v)
    if spec.type == "flexible":
        return ("flexible", eff, _flex_profile(cx, d, o, v))
    labels = ranks.labels(cx, d, o, v)
    return (spec.type, eff, ranks.decode(min(_label_orbit(_gens(spec), labels))))


@dataclass(frozen=True)
class MatchQuery:
    cx: RefinementComplex
    d: Decoration
    o: PartialOrientation
    source: int
    target: int
    source_edge: int | None = None
    target_edge: int | None = None
    reversal: bool = False


def query_match(q: MatchQuery) -> str:
    """'yes', 'no' or 'unknown' (different oracles behind equal vertex ornaments)."""
    cx, d, o = q.cx, q.d, q.o
    for v in (q.source, q.target):
        if not cx.is_non_elementary(v):
            raise IllPosedQuery(f"{cx.names[v]!r} is not a non-elementary vertex")
    if d[q.source].root is not d[q.target].root:
        raise IllPosedQuery("source and target carry different base ornaments")
    if (q.source_edge is None) != (q.target_edge is None):
        raise IllPosedQuery("mark both edges or neither")
    for v, e in ((q.source, q.source_edge), (q.target, q.target_edge)):
        if e is not None and v not in cx.ends[e]:
            raise IllPosedQuery(f"edge {cx.names[e]!r} is not incident to {cx.names[v]!r}")
    (sid, sspec), (tid, _) = _oracle(cx, q.source), _oracle(cx, q.target)
    if sid != tid:
        return "unknown"
    if sspec.type == "flexible":
        ok = _flex_profile(cx, d, o, q.source) == _flex_profile(cx, d, o, q.target)
        if q.source_edge is not None:
            ok = ok and (d[q.source_edge], bool(o[q.source_edge])) == (d[q.target_edge], bool(o[q.target_edge]))
        return "yes" if ok else "no"

    ranks = _Ranks(d[e] for v in (q.source, q.target) for e in cx.slot_cells[v])
    src = ranks.labels(cx, d, o, q.source)
    tgt = ranks.labels(cx, d, o, q.target)
    gens = _gens(sspec)
    if q.source_edge is None:
        return "yes" if tgt in _label_orbit(gens, src) else "no"
    targets = set(_slots_of(cx, q.target, q.target_edge))
    want = {-1} if q.reversal else {1, -1}
    if sspec.type == "trivial" and q.reversal:
        # the identity group never reverses; the input flag stands in for it
        want = {1}
        if not (cx.edge_rec[q.target_edge].reversible and not o[q.target_edge]):
            return "no"
    for s in _slots_of(cx, q.source, q.source_edge):
        for lab, m, f in _marked_orbit(gens, src, s):
            if lab == tgt and m in targets and f in want:
                return "yes"
    return "no"


def query_reversal(cx: RefinementComplex, d: Decoration, o: PartialOrientation, v: int, e: int) -> bool:
    if v not in cx.ends[e]:
        raise IllPosedQuery(f"edge {cx.names[e]!r} is not incident to {cx.names[v]!r}")
    ranks = _Ranks(d[x] for x in cx.slot_cells.get(v, ()))
    return _edge_view(cx, d, o, v, e, ranks).reversible


@dataclass(frozen=True)
class OracleEvent:
    """A class whose members are bound to different oracles; it was split."""

    ornament: Ornament
    oracle_ids: tuple[str, ...]
    cells: tuple[int, ...] = field(default=())


def vertex_refine(
    cx: RefinementComplex,
    d: Decoration,
    o: PartialOrientation,
    universe: OrnamentUniverse = DEFAULT_UNIVERSE,
) -> tuple[Decoration, PartialOrientation, list[OracleEvent]]:
    ranks = _Ranks(d[e] for e in cx.edge_cells)
    out = list(d)
    updates: dict[int, int] = {}
    by_class: dict[Ornament, list[int]] = {}
    for v in cx.vertex_cells:
        # an isolated vertex has no slots to match, so it needs no oracle
        if not cx.is_non_elementary(v) or not cx.incident[v]:
            continue
        by_class.setdefault(d[v], []).append(v)
        out[v] = universe.orbit(d[v], _vertex_token(cx, d, o, v, ranks))
        for e, _ in cx.incident[v]:
            view = _edge_view(cx, d, o, v, e, ranks)
            out[e] = universe.orbit(d[e], view.token)
            if not o[e] and not view.reversible:
                updates[e] = view.flag
    events = []
    for orn, members in by_class.items():
        ids = sorted({cx.oracle_of[v][0] for v in members})
        if len(ids) > 1:
            events.append(OracleEvent(orn, tuple(ids), tuple(members)))
    events.sort(key=lambda ev: ev.ornament.key)
    return tuple(out), o.with_values(updates), events
