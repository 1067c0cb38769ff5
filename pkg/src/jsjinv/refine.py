from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import NotStable
from .model import Decoration, RefinementComplex
from .ornaments import (
    DEFAULT_UNIVERSE,
    ONE,
    ZERO,
    ExtNat,
    Ornament,
    OrnamentUniverse,
    sort_ornaments,
)

Partition = tuple  # tuple of tuples of cells, canonical order


def partition(d: Sequence[Ornament], cells: Iterable[int] | None = None) -> Partition:
    """Cells grouped by ornament, groups ordered by their first cell."""
    groups: dict[Ornament, list[int]] = {}
    for t in (range(len(d)) if cells is None else cells):
        groups.setdefault(d[t], []).append(t)
    return tuple(sorted(tuple(g) for g in groups.values()))


def class_count(d: Sequence[Ornament]) -> int:
    return len(set(d))


def _pair_counts(x: Ornament, y: Ornament) -> dict[Ornament, ExtNat]:
    return {x: ExtNat(2)} if x is y else {x: ONE, y: ONE}


def neighbor_refine_step(
    cx: RefinementComplex,
    d: Decoration,
    base: Decoration | None = None,
    universe: OrnamentUniverse = DEFAULT_UNIVERSE,
) -> Decoration:
    """One round of neighbor refinement on the subdivided complex.

    Edge cells first record their endpoints, vertex cells then count those
    edge ornaments with lift multiplicities, and edge cells finally record
    the new endpoint ornaments.  One call therefore moves information one
    vertex-to-vertex hop, which is the step the vertex-level tables count.
    """
    base = d if base is None else base
    nv = cx.n_vertices
    out: list[Ornament | None] = [None] * cx.n_cells
    probe: dict[int, Ornament] = {}
    for e in cx.edge_cells:
        a, b = cx.ends[e]
        probe[e] = universe.neighbor(base[e], _pair_counts(d[a], d[b]))
    for v in range(nv):
        counts: dict[Ornament, ExtNat] = {}
        for e, n in cx.incident[v]:
            o = probe[e]
            counts[o] = counts.get(o, ZERO) + n
        out[v] = universe.neighbor(base[v], counts)
    for e in cx.edge_cells:
        a, b = cx.ends[e]
        out[e] = universe.neighbor(base[e], _pair_counts(out[a], out[b]))
    return tuple(out)


def neighbor_refine_fix(
    cx: RefinementComplex,
    d0: Decoration,
    universe: OrnamentUniverse = DEFAULT_UNIVERSE,
    trace: list | None = None,
) -> tuple[Decoration, int]:
    """Iterate until the partition stops strictly refining.

    Returns the last strictly finer decoration and the number of strict
    steps taken.  ``trace`` (if given) receives the class count after each
    strict step, starting with the input.
    """
    d, steps = d0, 0
    current = partition(d)
    if trace is not None:
        trace.append(len(current))
    limit = cx.n_cells + 1
    while True:
        nxt = neighbor_refine_step(cx, d, d0, universe)
        p = partition(nxt)
        if p == current:
            return d, steps
        d, current, steps = nxt, p, steps + 1
        if trace is not None:
            trace.append(len(current))
        if steps > limit:
            raise AssertionError("neighbor refinement did not stabilize within the cell bound")


@dataclass(frozen=True)
class StructureInvariant:
    """Stable-class adjacency counts.

    ``entries[(j, k)]`` is the number of cells of class ``j`` adjacent to a
    single cell of class ``k`` (counted with lift multiplicity).  Zero
    entries are omitted.  ``vertex_classes`` and ``edge_classes`` list the
    classes in canonical order.
    """

    entries: Mapping[tuple[Ornament, Ornament], ExtNat]
    vertex_classes: tuple[Ornament, ...]
    edge_classes: tuple[Ornament, ...]

    @property
    def classes(self) -> tuple[Ornament, ...]:
        return self.vertex_classes + self.edge_classes

    def base_projection(self) -> dict[Ornament, Ornament]:
        return {o: o.root for o in self.classes}

    def entry(self, j: Ornament, k: Ornament) -> ExtNat:
        return self.entries.get((j, k), ZERO)

    def vertex_matrix(self) -> dict[tuple[Ornament, Ornament], ExtNat]:
        """Counts ``(at, nbr)`` of neighbouring vertex classes, summed through edges.

        Keys are ``(at, nbr)`` so rows read like the printed tables: the row
        class is the vertex doing the counting.
        """
        ends: dict[Ornament, list[Ornament]] = {}
        for (j, k), n in self.entries.items():
            if k in self._edge_set:
                ends.setdefault(k, []).extend([j] * n.value)
        out: dict[tuple[Ornament, Ornament], ExtNat] = {}
        for (j, k), n in self.entries.items():
            if j not in self._edge_set:
                continue
            pair = ends[j]
            other = pair[1] if pair[0] is k else pair[0]
            out[(k, other)] = out.get((k, other), ZERO) + n
        return out

    @property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edge_classes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StructureInvariant):
            return NotImplemented
        return invariants_equal(self, other)

    def __hash__(self) -> int:
        return hash(frozenset(self.entries.items()))


def structure_invariant(
    cx: RefinementComplex, stable: Decoration, cells: Iterable[int] | None = None
) -> StructureInvariant:
    """Keyed adjacency matrix of a stable decoration.

    ``cells`` restricts the representatives (e.g. to one component of a
    joint workspace); counts always use the full adjacency.
    """
    rows: dict[Ornament, dict[Ornament, ExtNat]] = {}
    for t in (range(cx.n_cells) if cells is None else cells):
        counts: dict[Ornament, ExtNat] = {}
        for s, n in cx.adjacency(t):
            counts[stable[s]] = counts.get(stable[s], ZERO) + n
        k = stable[t]
        seen = rows.setdefault(k, counts)
        if seen != counts:
            raise NotStable(f"class of cell {cx.names[t]!r} has inconsistent neighbor counts")
    entries = {(j, k): n for k, counts in rows.items() for j, n in counts.items() if n != ZERO}
    vclasses = sort_ornaments(stable[t] for t in rows_cells(cx, cells) if not cx.is_edge(t))
    eclasses = sort_ornaments(stable[t] for t in rows_cells(cx, cells) if cx.is_edge(t))
    return StructureInvariant(entries, tuple(vclasses), tuple(eclasses))


def rows_cells(cx: RefinementComplex, cells: Iterable[int] | None) -> list[int]:
    return list(range(cx.n_cells)) if cells is None else list(cells)


def invariants_equal(a: StructureInvariant, b: StructureInvariant) -> bool:
    return (
        a.vertex_classes == b.vertex_classes
        and a.edge_classes == b.edge_classes
        and dict(a.entries) == dict(b.entries)
    )
