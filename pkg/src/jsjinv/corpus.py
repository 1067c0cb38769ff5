"""Seeded random inputs for property tests and the oracle cross-check.

``JSJ_SEED`` (default 0) seeds every generator that is not handed an
explicit ``random.Random``.  Run as ``python3 -m jsjinv.corpus OUTDIR`` to
write a batch of documents that the CLI accepts.
"""

from __future__ import annotations

import argparse
import json
import os
import random
from fractions import Fraction
from pathlib import Path

from .model import CylinderGraph, Multigraph, parse_document
from .ornaments import format_rational


def seeded(offset: int = 0) -> random.Random:
    return random.Random(int(os.environ.get("JSJ_SEED", "0")) + offset)


def random_multigraph(rng: random.Random, max_vertices: int = 8, max_degree: int = 4) -> Multigraph:
    """Connected loopless multigraph with bounded degree."""
    n = rng.randint(2, max_vertices)
    deg = [0] * n
    edges: list[tuple[int, int]] = []
    # spanning tree first so the graph is connected
    for v in range(1, n):
        choices = [u for u in range(v) if deg[u] < max_degree]
        u = rng.choice(choices)
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    for _ in range(rng.randint(0, n)):
        u, v = rng.sample(range(n), 2)
        if deg[u] < max_degree and deg[v] < max_degree:
            edges.append((min(u, v), max(u, v)))
            deg[u] += 1
            deg[v] += 1
    return Multigraph(n, tuple(edges))


def double_cover(m: Multigraph, rng: random.Random) -> Multigraph:
    """A random 2-fold cover; it has the same universal cover as ``m``."""
    edges = []
    for u, v in m.edges:
        if rng.random() < 0.5:
            edges += [(u, v), (u + m.n, v + m.n)]
        else:
            edges += [(u, v + m.n), (u + m.n, v)]
    return Multigraph(2 * m.n, tuple(edges))


def multigraph_corpus(count: int, rng: random.Random | None = None, max_vertices: int = 8) -> list[Multigraph]:
    """``count`` multigraphs; roughly a quarter are 2-fold lifts of earlier ones."""
    rng = rng or seeded()
    out: list[Multigraph] = []
    while len(out) < count:
        small = [m for m in out if 2 * m.n <= max_vertices]
        if small and rng.random() < 0.25:
            out.append(double_cover(rng.choice(small), rng))
        else:
            out.append(random_multigraph(rng, max_vertices))
    return out


def multigraph_document(m: Multigraph, name: str = "multigraph") -> dict:
    return {"name": name, "multigraph": {"n": m.n, "edges": [list(e) for e in m.edges]}}


_QI = ("F2", "pi1M", "F3")
_MULT_NE = (1, 1, 2, "inf", "inf")


def _signed_symmetric(slots: int) -> list[dict]:
    """Full signed symmetric group; above five slots only independent flips.

    Orbits are enumerated by brute force, and 2^8 * 8! states per query
    would dominate the property suite.
    """
    if slots > 5:
        return [
            {"perm": list(range(slots)), "signs": [-1 if j == i else 1 for j in range(slots)]}
            for i in range(slots)
        ]
    gens = [{"perm": list(range(slots)), "signs": [-1] + [1] * (slots - 1)}]
    if slots > 1:
        swap = list(range(slots))
        swap[0], swap[1] = 1, 0
        cycle = [(i + 1) % slots for i in range(slots)]
        gens += [{"perm": swap, "signs": [1] * slots}, {"perm": cycle, "signs": [1] * slots}]
    return gens


def random_cylinder_document(rng: random.Random, max_cells: int = 12, name: str = "random") -> dict:
    """A valid input document with at most ``max_cells`` vertices plus edges."""
    n_cyl = rng.randint(1, 3)
    n_ne = rng.randint(1, 3)
    # a spanning tree on n vertices takes 2n - 1 cells
    while 2 * (n_cyl + n_ne) - 1 > max_cells and n_cyl + n_ne > 2:
        if n_cyl >= n_ne:
            n_cyl -= 1
        else:
            n_ne -= 1
    cyls = [f"c{i}" for i in range(n_cyl)]
    nes = [f"r{i}" for i in range(n_ne)]
    # random bipartite spanning tree, then extra parallel or crossing edges
    pairs: list[tuple[str, str]] = []
    placed = {cyls[0]}
    pending = cyls[1:] + nes
    rng.shuffle(pending)
    while pending:
        for x in list(pending):
            other = sorted(y for y in placed if (y in cyls) != (x in cyls))
            if other:
                y = rng.choice(other)
                pairs.append((x, y) if x in cyls else (y, x))
                placed.add(x)
                pending.remove(x)
    for _ in range(rng.randint(0, max(0, max_cells - n_cyl - n_ne - len(pairs)))):
        pairs.append((rng.choice(cyls), rng.choice(nes)))

    kinds = {v: ("hanging" if rng.random() < 0.25 else "rigid") for v in nes}
    edges = []
    for i, (c, v) in enumerate(pairs):
        rec = {
            "id": f"e{i}", "cyl": c, "ne": v,
            "mult_at_cyl": rng.choice((1, 1, 2)),
            "mult_at_ne": rng.choice(_MULT_NE),
            "sign": rng.choice((1, -1, None)),
            "k": format_rational(Fraction(rng.randint(1, 3), rng.randint(1, 2))),
            "length": format_rational(Fraction(rng.randint(1, 6), rng.randint(1, 2))),
            "reversible": rng.random() < 0.5,
        }
        edges.append(rec)

    oracles: dict[str, dict] = {}
    vertices = [{"id": c, "kind": "cylindrical", "qi_type": "Z"} for c in cyls]
    for v in nes:
        rec = {"id": v, "kind": kinds[v], "qi_type": rng.choice(_QI)}
        if kinds[v] == "hanging":
            oracles.setdefault("pants", {"id": "pants", "type": "flexible"})
            rec["oracle"] = "pants"
        else:
            mine = [e["id"] for e in edges if e["ne"] == v]
            kind = rng.choice(("trivial", "signed_perm_group"))
            oid = f"{kind}-{len(mine)}"  # one model per slot count
            spec = oracles.setdefault(oid, {"id": oid, "type": kind, "slots": len(mine), "slot_edge": {}})
            if kind == "signed_perm_group":
                spec["generators"] = _signed_symmetric(len(mine))
            spec["slot_edge"][v] = {str(i): eid for i, eid in enumerate(mine)}
            rec["oracle"] = oid
        vertices.append(rec)
    return {"name": name, "vertices": vertices, "edges": edges, "oracles": list(oracles.values())}


def random_cylinder_graph(rng: random.Random, max_cells: int = 12) -> CylinderGraph:
    return parse_document(random_cylinder_document(rng, max_cells))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python3 -m jsjinv.corpus", description=__doc__.splitlines()[0])
    parser.add_argument("outdir", type=Path)
    parser.add_argument("--multigraphs", type=int, default=100)
    parser.add_argument("--cylinder-graphs", type=int, default=200)
    args = parser.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    for i, m in enumerate(multigraph_corpus(args.multigraphs)):
        doc = multigraph_document(m, f"mg{i:03d}")
        (args.outdir / f"mg{i:03d}.json").write_text(json.dumps(doc, indent=1) + "\n")
    rng = seeded(1)
    for i in range(args.cylinder_graphs):
        doc = random_cylinder_document(rng, name=f"cg{i:03d}")
        (args.outdir / f"cg{i:03d}.json").write_text(json.dumps(doc, indent=1) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
