"""Joint refinement to simultaneous stability and the equivalence decision."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .errors import MissingLength, ModeDataMissing
from .localsym import MatchQuery, OracleEvent, query_match, vertex_refine
from .model import (
    MODES,
    CylinderGraph,
    Decoration,
    RefinementComplex,
    initial_decoration,
    require_lengths,
    subdivide,
)
from .orient import PartialOrientation, cylinder_refine, imbalance, xi_apply
from .ornaments import DEFAULT_UNIVERSE, ExtNat, Ornament, OrnamentUniverse, sort_ornaments
from .refine import (
    invariants_equal,
    neighbor_refine_fix,
    partition,
    structure_invariant,
)

log = logging.getLogger(__name__)

DEFAULT_ORDER = ("neighbor", "cylinder", "vertex")
NEIGHBOR_ONLY_MODES = ("type", "qi", "rel-qi")


@dataclass
class Workspace:
    graphs: tuple[CylinderGraph, ...]
    mode: str
    universe: OrnamentUniverse = DEFAULT_UNIVERSE
    cx: RefinementComplex = field(init=False)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        self.graphs = tuple(self.graphs)
        if self.mode == "qi+stretch":
            for g in self.graphs:
                require_lengths(g)
        self.cx = subdivide(*self.graphs)

    def initial(self) -> Decoration:
        return initial_decoration(self.cx, self.mode, self.universe)


@dataclass
class StableState:
    cx: RefinementComplex
    decoration: Decoration
    orientation: PartialOrientation
    rounds: int
    steps: list[int]
    events: list[OracleEvent]
    trace: list[tuple[str, int]] = field(default_factory=list)

    def classes(self, cells=None) -> list[Ornament]:
        ts = range(self.cx.n_cells) if cells is None else cells
        return sort_ornaments(self.decoration[t] for t in ts)

    def partition(self, cells=None):
        return partition(self.decoration, cells)


def full_refine(
    w: Workspace,
    order: Sequence[str] = DEFAULT_ORDER,
    d0: Decoration | None = None,
) -> StableState:
    """Round-robin refinement until a whole round changes nothing.

    A round runs neighbor refinement to its own fixpoint, one cylinder
    refinement and one vertex refinement, in ``order``.  The loop stops when
    the partition and the orientation both survive a round unchanged.
    """
    cx, u = w.cx, w.universe
    d = w.initial() if d0 is None else d0
    o = PartialOrientation.empty(cx)
    events: dict[tuple, OracleEvent] = {}
    steps: list[int] = []
    trace: list[tuple[str, int]] = [("initial", len(set(d)))]
    limit = cx.n_cells + cx.n_cells - cx.n_vertices + 2
    rounds = 0
    while True:
        rounds += 1
        if rounds > limit:
            raise AssertionError("full refinement exceeded its round bound")
        before = (partition(d), o)
        for stage in order:
            if stage == "neighbor":
                d, s = neighbor_refine_fix(cx, d, u)
                steps.append(s)
            elif stage == "cylinder":
                d, o = cylinder_refine(cx, d, o, u)
            elif stage == "vertex":
                d, o, evs = vertex_refine(cx, d, o, u)
                for ev in evs:
                    events.setdefault((ev.ornament.root, ev.oracle_ids), ev)
            else:
                raise ValueError(f"unknown stage {stage!r}")
            trace.append((stage, len(set(d))))
        if (partition(d), o) == before:
            return StableState(cx, d, o, rounds, steps, list(events.values()), trace)


def stable_state(w: Workspace, order: Sequence[str] = DEFAULT_ORDER) -> StableState:
    """The refinement a mode calls for: neighbor-only for the first three modes."""
    if w.mode in NEIGHBOR_ONLY_MODES:
        cx = w.cx
        d0 = w.initial()
        counts: list[int] = []
        d, s = neighbor_refine_fix(cx, d0, w.universe, trace=counts)
        trace = [("initial", counts[0])] + [("neighbor", n) for n in counts[1:]]
        return StableState(cx, d, PartialOrientation.empty(cx), 1, [s], [], trace)
    return full_refine(w, order)


def analyze(g: CylinderGraph, mode: str, universe: OrnamentUniverse = DEFAULT_UNIVERSE) -> StableState:
    return stable_state(Workspace((g,), mode, universe))


# ---------------------------------------------------------------------------
# orbit report


@dataclass(frozen=True)
class OrbitClass:
    index: int
    ornament: Ornament
    members: tuple[str, ...]
    is_edge: bool
    row: tuple[tuple[int, ExtNat], ...]  # (neighbor class index, count)


def orbit_report(state: StableState, component: int = 0) -> list[OrbitClass]:
    cx, d = state.cx, state.decoration
    cells = cx.cells_of(component)
    inv = structure_invariant(cx, d, cells)
    index = {o: i for i, o in enumerate(inv.classes)}
    members: dict[Ornament, list[str]] = {}
    for t in cells:
        members.setdefault(d[t], []).append(cx.names[t])
    out = []
    for o in inv.classes:
        row = sorted((index[j], n) for (j, k), n in inv.entries.items() if k is o)
        out.append(OrbitClass(index[o], o, tuple(sorted(members[o])), o in inv.edge_classes, tuple(row)))
    return out


def orbits(g: CylinderGraph, mode: str) -> list[OrbitClass]:
    return orbit_report(analyze(g, mode))


# ---------------------------------------------------------------------------
# compare


@dataclass(frozen=True)
class Verdict:
    kind: str  # "Equivalent" | "Distinct" | "Inconclusive"
    reason: str = ""
    matching: tuple = ()  # (class ornament, members in a, members in b)
    xi: tuple[Ornament, ...] = ()  # class ornaments flipped in b
    notes: tuple[str, ...] = ()

    @property
    def exit_code(self) -> int:
        return {"Equivalent": 0, "Distinct": 1, "Inconclusive": 2}[self.kind]


def _compare_mode(mode: str) -> str:
    if mode in ("qi", "qi+stretch"):
        return "qi+stretch"
    if mode == "boundary":
        return "boundary"
    raise ValueError(f"compare supports modes boundary and qi, not {mode!r}")


def _members(cx: RefinementComplex, d: Decoration, cells: list[int]) -> dict[Ornament, list[int]]:
    out: dict[Ornament, list[int]] = {}
    for t in cells:
        out.setdefault(d[t], []).append(t)
    return out


def _static_conditions(state: StableState, ca: list[int], cb: list[int]) -> str | None:
    """Conditions on ornaments alone; returns the failure reason or None."""
    cx, d = state.cx, state.decoration
    base_a = {d[t].root for t in ca}
    base_b = {d[t].root for t in cb}
    if base_a != base_b:
        only = sorted({o.label() for o in base_a ^ base_b})
        return f"(a) initial ornament types differ: {', '.join(only)}"
    if {d[t] for t in ca} != {d[t] for t in cb}:
        return "(b) stable ornament sets differ"
    if not invariants_equal(structure_invariant(cx, d, ca), structure_invariant(cx, d, cb)):
        return "(b) structure invariants differ"
    return None


def _imbalances(cx, d, o, cells) -> dict[Ornament, set]:
    out: dict[Ornament, set] = {}
    for c in cells:
        if cx.is_cylinder(c):
            out.setdefault(d[c], set()).add(imbalance(cx, d, o, c).entries)
    return out


def _dynamic_conditions(
    state: StableState, ca: list[int], cb: list[int], o_b: PartialOrientation, check_match: bool = True
) -> str | None:
    """Conditions (c) and (d) with graph b's orientation replaced by ``o_b``."""
    cx, d = state.cx, state.decoration
    in_b = set(cb)
    o = PartialOrientation(tuple(o_b[t] if t in in_b else state.orientation[t] for t in range(cx.n_cells)))
    if check_match:
        ma, mb = _members(cx, d, ca), _members(cx, d, cb)
        for orn in sort_ornaments(ma):
            va, vb = ma[orn][0], mb[orn][0]
            if not cx.is_non_elementary(va) or not cx.incident[va]:
                continue
            ans = query_match(MatchQuery(cx, d, o, va, vb))
            if ans != "yes":
                return f"(c) {ans}: no local match for the class of {cx.names[va]!r}"
    if _imbalances(cx, d, o, ca) != _imbalances(cx, d, o, cb):
        return "(d) orientation imbalances differ"
    return None


def _search_xi(
    state: StableState, ca: list[int], cb: list[int], max_xi: int, check_match: bool = True
) -> tuple[str, str, tuple]:
    """Try sign changes on graph b's oriented classes, identity first.

    Returns (kind, reason, flipped ornaments) with kind one of
    "ok", "fail", "unknown", "too-many".
    """
    d, o = state.decoration, state.orientation
    flippable = sort_ornaments(d[t] for t in cb if o[t])
    reason = _dynamic_conditions(state, ca, cb, o, check_match)
    if reason is None:
        return "ok", "", ()
    if "unknown" in reason:
        return "unknown", reason, ()
    if len(flippable) > max_xi:
        return "too-many", f"{len(flippable)} orientation classes exceed the xi search bound {max_xi}", ()
    first_failure = reason
    for signs in itertools.islice(itertools.product((1, -1), repeat=len(flippable)), 1, None):
        xi = {orn: s for orn, s in zip(flippable, signs) if s == -1}
        reason = _dynamic_conditions(state, ca, cb, xi_apply(o, xi, d), check_match)
        if reason is None:
            return "ok", "", tuple(sort_ornaments(xi))
        if "unknown" in reason:
            return "unknown", reason, ()
    return "fail", first_failure, ()


def compare(
    a: CylinderGraph,
    b: CylinderGraph,
    mode: str,
    max_xi: int = 20,
    universe: OrnamentUniverse = DEFAULT_UNIVERSE,
    order: Sequence[str] = DEFAULT_ORDER,
) -> Verdict:
    mode = _compare_mode(mode)
    notes: list[str] = []
    for g in (a, b):
        if g.is_trivial_jsj:
            msg = f"{g.name}: trivial decomposition; comparing by vertex ornament only"
            log.warning(msg)
            notes.append(msg)
    try:
        w = Workspace((a, b), mode, universe)
    except MissingLength as exc:
        raise ModeDataMissing(str(exc)) from None
    cx = w.cx
    ca, cb = cx.cells_of(0), cx.cells_of(1)
    state = full_refine(w, order)

    reason = _static_conditions(state, ca, cb)
    kind = "fail"
    if reason is None:
        kind, reason, xi = _search_xi(state, ca, cb, max_xi)
        if kind == "ok":
            # splitting by oracle id only refines, so agreement is still sound
            return _equivalent(state, ca, cb, xi, notes)
    if not state.events:
        return Verdict("Distinct" if kind == "fail" else "Inconclusive", reason, notes=tuple(notes))

    # the split may have separated equivalent vertices; only a difference
    # visible without the oracles is conclusive
    ids = "; ".join("/".join(ev.oracle_ids) for ev in state.events)
    plain = full_refine(w, [s for s in order if s != "vertex"])
    reason = _static_conditions(plain, ca, cb)
    if reason is None:
        kind, why, _ = _search_xi(plain, ca, cb, max_xi, check_match=False)
        reason = why if kind == "fail" else None
    if reason is not None:
        return Verdict("Distinct", reason + " (without oracles)", notes=tuple(notes))
    return Verdict("Inconclusive", f"incomparable oracles: {ids}", notes=tuple(notes))


def _equivalent(state: StableState, ca, cb, xi, notes) -> Verdict:
    cx, d = state.cx, state.decoration
    ma, mb = _members(cx, d, ca), _members(cx, d, cb)
    matching = tuple(
        (orn, tuple(sorted(cx.names[t] for t in ma[orn])), tuple(sorted(cx.names[t] for t in mb[orn])))
        for orn in sort_ornaments(ma)
    )
    return Verdict("Equivalent", "conditions (a)-(d) hold", matching, xi, tuple(notes))


def solo_partition_names(state: StableState, component: int = 0) -> frozenset:
    """Stable partition of one component as sets of (kind, id) names."""
    cx = state.cx
    groups = _members(cx, state.decoration, cx.cells_of(component))
    return frozenset(
        frozenset(("e" if cx.is_edge(t) else "v", cx.names[t]) for t in ts) for ts in groups.values()
    )
