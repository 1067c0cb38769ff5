"""Partial orientations, orientation imbalance and cylinder refinement.

Orientation state lives on cells.  A cylinder cell holds -1/0/+1 relative
to the reference orientation of the input (the one the edge ``sign``
fields refer to).  An edge cell holds the orientation of its peripheral
line in the non-elementary endpoint, relative to that vertex's model slot
reference.  The attaching sign of an oriented edge against its cylinder is

    sign_in(e) * periph(e) * cyl(c)      (cyl(c) read as +1 when unoriented)

A missing input sign means the attaching sign is unknown.  Such an edge
never counts towards an imbalance; reading it as +1 instead would make the
result depend on the arbitrary reference orientation of its cylinder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .model import Decoration, RefinementComplex
from .ornaments import DEFAULT_UNIVERSE, Ornament, OrnamentUniverse


@dataclass(frozen=True)
class PartialOrientation:
    state: tuple[int, ...]

    @classmethod
    def empty(cls, cx: RefinementComplex) -> "PartialOrientation":
        return cls((0,) * cx.n_cells)

    def __getitem__(self, t: int) -> int:
        return self.state[t]

    def oriented(self, t: int) -> bool:
        return self.state[t] != 0

    def with_values(self, updates: Mapping[int, int]) -> "PartialOrientation":
        s = list(self.state)
        for t, v in updates.items():
            s[t] = v
        return PartialOrientation(tuple(s))

    def oriented_cells(self) -> list[int]:
        return [t for t, v in enumerate(self.state) if v]


@dataclass(frozen=True)
class ImbalanceVector:
    """Nonzero coordinates, canonical up to global sign."""

    entries: tuple[tuple[Ornament, int], ...]

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def __bool__(self) -> bool:
        return bool(self.entries)

    def as_dict(self) -> dict[Ornament, int]:
        return dict(self.entries)

    def abs(self) -> dict[Ornament, int]:
        return {o: abs(n) for o, n in self.entries}


def input_sign(cx: RefinementComplex, e: int) -> int:
    s = cx.edge_rec[e].sign
    return 0 if s is None else s


def attaching_sign(cx: RefinementComplex, o: PartialOrientation, e: int) -> int:
    c = cx.ends[e][0]
    return input_sign(cx, e) * o[e] * (o[c] or 1)


def raw_imbalance(
    cx: RefinementComplex, d: Decoration, o: PartialOrientation, c: int
) -> dict[Ornament, int]:
    """Signed sums against the cylinder's current (or input) reference."""
    if cx.vertex_rec[c].dihedral:
        return {}
    sums: dict[Ornament, int] = {}
    for e, n in cx.incident[c]:
        s = attaching_sign(cx, o, e)
        if s:
            sums[d[e]] = sums.get(d[e], 0) + n.value * s
    return {k: v for k, v in sums.items() if v}


def canonical(raw: Mapping[Ornament, int]) -> tuple[ImbalanceVector, int]:
    """Canonical representative and the factor (+1/-1) applied to reach it."""
    items = sorted(raw.items(), key=lambda p: p[0].key)
    if not items:
        return ImbalanceVector(()), 1
    flip = 1 if items[0][1] > 0 else -1
    return ImbalanceVector(tuple((k, v * flip) for k, v in items)), flip


def imbalance(cx: RefinementComplex, d: Decoration, o: PartialOrientation, c: int) -> ImbalanceVector:
    if not cx.is_cylinder(c):
        raise ValueError(f"cell {cx.names[c]!r} is not a cylinder")
    return canonical(raw_imbalance(cx, d, o, c))[0]


def cylinder_refine(
    cx: RefinementComplex,
    d: Decoration,
    o: PartialOrientation,
    universe: OrnamentUniverse = DEFAULT_UNIVERSE,
) -> tuple[Decoration, PartialOrientation]:
    # (1) split edges by orientation status
    d1 = list(d)
    for e in cx.edge_cells:
        d1[e] = universe.signed(d[e], 1 if o[e] else 0)
    # (2) orient unoriented unbalanced cylinders so the imbalance is canonical
    updates: dict[int, int] = {}
    for c in cx.vertex_cells:
        if not cx.is_cylinder(c) or o[c] or cx.vertex_rec[c].dihedral:
            continue
        raw = raw_imbalance(cx, d1, o, c)
        if raw:
            updates[c] = canonical(raw)[1]
    o2 = o.with_values(updates)
    # (3) unoriented edges at oriented cylinders attach with sign +1
    # (edges of unknown input sign stay unoriented)
    updates = {}
    for e in cx.edge_cells:
        c = cx.ends[e][0]
        if o2[c] and not o2[e] and input_sign(cx, e):
            updates[e] = input_sign(cx, e) * o2[c]
    o3 = o2.with_values(updates)
    # (4) record signs in the ornaments
    out = list(d1)
    for t in range(cx.n_cells):
        if cx.is_edge(t):
            c = cx.ends[t][0]
            s = attaching_sign(cx, o3, t) if o3[c] and o3[t] else 0
            out[t] = universe.signed(d1[t], s)
        else:
            out[t] = universe.signed(d[t], 0)
    return tuple(out), o3


def xi_apply(o: PartialOrientation, xi: Mapping[Ornament, int], d: Decoration) -> PartialOrientation:
    """Flip every oriented cell whose class ornament has ``xi == -1``."""
    return PartialOrientation(
        tuple(-v if v and xi.get(d[t], 1) == -1 else v for t, v in enumerate(o.state))
    )
