"""Brute-force checks that share no code with the refinement engine.

Balls in the covering tree are stored as hash-consed DAGs: a node is fixed
by (cell, edge cell it was entered through, remaining radius), so radii far
beyond the tree's branching stay cheap.  Isomorphism is decided by
backtracking over children with a memo on node pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InfiniteMultiplicity
from .model import Multigraph, RefinementComplex


@dataclass
class Ball:
    """Rooted ball; ``nodes[i] = (cell, children)``, children are (edge cell, node) pairs."""

    cx: RefinementComplex
    root: int
    radius: int
    nodes: list[tuple[int, tuple[tuple[int, int], ...]]]
    labels: Sequence

    def size(self) -> int:
        """Number of vertex nodes of the expanded tree."""
        memo: dict[int, int] = {}

        def count(i: int) -> int:
            if i not in memo:
                cell, kids = self.nodes[i]
                own = 0 if self.cx.is_edge(cell) else 1
                memo[i] = own + sum(count(k) for _, k in kids)
            return memo[i]

        return count(self.root)


def expand_ball(cx: RefinementComplex, cell: int, radius: int, labels: Sequence | None = None) -> Ball:
    """Ball of vertex-hop radius ``radius`` around a vertex or edge cell."""
    for t in range(cx.n_vertices, cx.n_cells):
        if any(m.is_inf for m in cx.end_mult[t]):
            raise InfiniteMultiplicity(f"edge {cx.names[t]!r} has infinite multiplicity")
    if labels is None:
        labels = ["e" if cx.is_edge(t) else "v" for t in range(cx.n_cells)]
    nodes: list = []
    memo: dict[tuple[int, int | None, int], int] = {}

    def vertex_node(v: int, via: int | None, depth: int) -> int:
        key = (v, via, depth)
        if key in memo:
            return memo[key]
        kids: list[tuple[int, int]] = []
        if depth > 0:
            for e, n in cx.incident[v]:
                copies = n.value - (1 if e == via else 0)
                if copies <= 0:
                    continue
                child = vertex_node(cx.other_end(e, v), e, depth - 1)
                kids.extend([(e, child)] * copies)
        nodes.append((v, tuple(kids)))
        memo[key] = len(nodes) - 1
        return memo[key]

    if cx.is_edge(cell):
        a, b = cx.ends[cell]
        kids = ((cell, vertex_node(a, cell, radius)), (cell, vertex_node(b, cell, radius)))
        nodes.append((cell, kids))
        root = len(nodes) - 1
    else:
        root = vertex_node(cell, None, radius)
    return Ball(cx, root, radius, nodes, labels)


def ball_isomorphic(b1: Ball, b2: Ball, d: Sequence | None = None) -> bool:
    """Root- and label-preserving isomorphism by backtracking.

    ``d`` overrides the labels of both balls (they must then share a complex).
    """
    if b1.radius != b2.radius:
        raise ValueError("balls must have equal radii")
    lab1 = b1.labels if d is None else d
    lab2 = b2.labels if d is None else d
    memo: dict[tuple[int, int], bool] = {}

    def iso(i: int, j: int) -> bool:
        key = (i, j)
        if key in memo:
            return memo[key]
        c1, k1 = b1.nodes[i]
        c2, k2 = b2.nodes[j]
        ok = lab1[c1] == lab2[c2] and len(k1) == len(k2) and _match(k1, k2)
        memo[key] = ok
        return ok

    def _match(k1, k2) -> bool:
        used = [False] * len(k2)

        def place(pos: int) -> bool:
            if pos == len(k1):
                return True
            e1, n1 = k1[pos]
            tried: set[tuple] = set()
            for idx, (e2, n2) in enumerate(k2):
                if used[idx] or (e2, n2) in tried:
                    continue
                tried.add((e2, n2))
                if lab1[e1] == lab2[e2] and iso(n1, n2):
                    used[idx] = True
                    if place(pos + 1):
                        return True
                    used[idx] = False
            return False

        return place(0)

    return iso(b1.root, b2.root)


# ---------------------------------------------------------------------------
# classical degree refinement


@dataclass(frozen=True)
class DegreeRefinement:
    colors: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]  # matrix[i][j]: neighbors of color j at a color-i vertex


def degree_refinement(m: Multigraph) -> DegreeRefinement:
    """Iterated degree partition with canonically ranked colors.

    Each round recolors a vertex by (old color, sorted neighbor colors) and
    ranks the distinct signatures, so colors depend only on the isomorphism
    type of the universal cover.
    """
    nbrs: list[list[int]] = [[] for _ in range(m.n)]
    for u, v in m.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    colors = [0] * m.n
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in nbrs[v]))) for v in range(m.n)]
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if len(set(new)) == len(set(colors)):
            colors = new
            break
        colors = new
    k = len(set(colors))
    matrix = [[0] * k for _ in range(k)]
    done = set()
    for v in range(m.n):
        if colors[v] in done:
            continue
        done.add(colors[v])
        for w in nbrs[v]:
            matrix[colors[v]][colors[w]] += 1
    return DegreeRefinement(tuple(colors), tuple(tuple(r) for r in matrix))


def same_degree_refinement(a: Multigraph, b: Multigraph) -> bool:
    return degree_refinement(a).matrix == degree_refinement(b).matrix


def oracle_check(cx: RefinementComplex, stable: Sequence, radius: int, labels: Sequence | None = None) -> list[str]:
    """Compare stable classes with ball isomorphism; returns discrepancy messages."""
    problems = []
    cells = list(range(cx.n_cells))
    # an isomorphism of radius-r balls restricts to every smaller radius,
    # so the top radius decides "all radii agree"
    top = {t: expand_ball(cx, t, radius, labels) for t in cells}
    for i, s in enumerate(cells):
        for t in cells[i + 1:]:
            if cx.is_edge(s) != cx.is_edge(t):
                continue
            same = stable[s] is stable[t]
            agree = ball_isomorphic(top[s], top[t])
            if same and not agree:
                first = next(
                    r for r in range(radius + 1)
                    if not ball_isomorphic(expand_ball(cx, s, r, labels), expand_ball(cx, t, r, labels))
                )
                problems.append(f"{cx.names[s]} ~ {cx.names[t]} but balls differ at radius {first}")
            if not same and agree:
                problems.append(f"{cx.names[s]} !~ {cx.names[t]} but balls agree up to radius {radius}")
    return problems
