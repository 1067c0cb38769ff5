"""Command-line front end.

Every subcommand reads one input document (two for ``compare``), runs the
refinement the mode calls for and prints a deterministic report.  Input
documents are either cylinder graphs or bare multigraphs of the form
``{"name": ..., "multigraph": {"n": 4, "edges": [[0, 1], ...]}}``; the
latter only support the trivial decoration.

Exit codes: 0 success, 64 usage error, 65 bad input, 70 internal error.
``compare`` additionally returns 1 for Distinct and 2 for Inconclusive, and
``oracle-check`` returns 1 when it finds a discrepancy.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

from .classify import (
    StableState,
    Workspace,
    compare,
    full_refine,
    orbit_report,
    stable_state,
)
from .errors import InputError, JSJError, SchemaError
from .model import MODES, CylinderGraph, Multigraph, complex_from_multigraph, parse_document, trivial_decoration
from .oracle_iso import oracle_check
from .orient import PartialOrientation, imbalance
from .ornaments import Ornament, format_rational, ornament_table, sort_ornaments
from .refine import neighbor_refine_fix, structure_invariant
from .stretch import stretch_decoration

EX_USAGE = 64
EX_DATAERR = 65
EX_SOFTWARE = 70

log = logging.getLogger("jsjinv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        raise UsageError(message)


# ---------------------------------------------------------------------------
# loading


def _load(path: str) -> CylinderGraph | Multigraph:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "multigraph" in doc:
        return _multigraph(doc["multigraph"])
    g = parse_document(doc)
    if g.is_trivial_jsj:
        log.warning("%s: trivial decomposition; invariants reduce to the vertex ornament", g.name)
    return g


def _multigraph(raw: Any) -> Multigraph:
    try:
        n = raw["n"]
        edges = tuple((int(u), int(v)) for u, v in raw["edges"])
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError
        return Multigraph(n, edges)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad multigraph document: {exc or 'wrong field types'}") from None


def _cylinder_graph(g: CylinderGraph | Multigraph, command: str) -> CylinderGraph:
    if isinstance(g, Multigraph):
        raise SchemaError(f"{command} needs a cylinder graph, not a bare multigraph")
    return g


def _state(g: CylinderGraph | Multigraph, mode: str) -> StableState:
    if isinstance(g, Multigraph):
        cx = complex_from_multigraph(g)
        counts: list[int] = []
        d, steps = neighbor_refine_fix(cx, trivial_decoration(cx), trace=counts)
        trace = [("initial", counts[0])] + [("neighbor", n) for n in counts[1:]]
        return StableState(cx, d, PartialOrientation.empty(cx), 1, [steps], [], trace)
    return stable_state(Workspace((g,), mode))


# ---------------------------------------------------------------------------
# rendering helpers


def _class_index(state: StableState) -> dict[Ornament, int]:
    return {c.ornament: c.index for c in orbit_report(state)}


def _members(state: StableState, orn: Ornament) -> list[str]:
    cx, d = state.cx, state.decoration
    return sorted(cx.names[t] for t in range(cx.n_cells) if d[t] is orn)


def _dump(obj: Any, out: TextIO) -> None:
    out.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _summary(state: StableState, mode: str) -> str:
    cx, d = state.cx, state.decoration
    nv = len({d[t] for t in cx.vertex_cells})
    ne = len({d[t] for t in cx.edge_cells})
    strict = sum(state.steps)
    return f"mode {mode}: {nv} vertex classes, {ne} edge classes, {strict} strict neighbor steps, {state.rounds} rounds"


# ---------------------------------------------------------------------------
# commands


def cmd_refine(args, out: TextIO) -> int:
    state = _state(_load(args.file), args.mode)
    report = orbit_report(state)
    if args.json:
        _dump({
            "mode": args.mode,
            "rounds": state.rounds,
            "strict_steps": state.steps,
            "trace": [[stage, n] for stage, n in state.trace],
            "classes": [
                {"index": c.index, "cell": "edge" if c.is_edge else "vertex", "base": c.ornament.label(),
                 "members": list(c.members)}
                for c in report
            ],
        }, out)
        return 0
    out.write(_summary(state, args.mode) + "\n")
    out.write("trace: " + ", ".join(f"{stage} {n}" for stage, n in state.trace) + "\n")
    for c in report:
        out.write(f"#{c.index:<3} {'e' if c.is_edge else 'v'} {c.ornament.label():<20} {' '.join(c.members)}\n")
    for ev in state.events:
        out.write(f"oracle split: {ev.ornament.label()} bound to {', '.join(ev.oracle_ids)}\n")
    return 0


def _table(state: StableState) -> list[str]:
    """Vertex-level block matrix, rows and columns in canonical order."""
    inv = structure_invariant(state.cx, state.decoration)
    index = _class_index(state)
    matrix = inv.vertex_matrix()
    cols = list(inv.vertex_classes)
    names = {o: ",".join(_members(state, o)) for o in cols}
    w_name = max(len("members"), *(len(n) for n in names.values()))
    w_base = max(len("base"), *(len(o.label()) for o in cols))
    cells = {(r, c): str(matrix.get((r, c), "0")) for r in cols for c in cols}
    w = max(3, *(len(f"#{index[c]}") for c in cols), *(len(v) for v in cells.values()))

    def row(first: str, second: str, entries: list[str]) -> str:
        parts, prev = [], None
        for c, text in zip(cols, entries):
            if prev is not None and c.root is not prev:
                parts.append("|")
            parts.append(text.rjust(w))
            prev = c.root
        return f"{first:<{w_name}}  {second:<{w_base}} | " + " ".join(parts)

    lines = ["blocks: " + "; ".join(
        f"{r.label()} = " + " ".join(f"#{index[c]}" for c in cols if c.root is r)
        for r in sort_ornaments(c.root for c in cols)
    )]
    header = row("members", "base", [f"#{index[c]}" for c in cols])
    lines += [header, "-" * len(header)]
    prev = None
    for r in cols:
        if prev is not None and r.root is not prev:
            lines.append("-" * len(header))
        lines.append(row(names[r], r.label(), [cells[(r, c)] for c in cols]))
        prev = r.root
    return lines


def cmd_invariant(args, out: TextIO) -> int:
    state = _state(_load(args.file), args.mode)
    if args.json:
        inv = structure_invariant(state.cx, state.decoration)
        names, table = ornament_table(inv.classes)
        rows: dict[str, dict[str, Any]] = {}
        for (j, k), n in sorted(inv.entries.items(), key=lambda p: (p[0][1].key, p[0][0].key)):
            rows.setdefault(names[k], {})[names[j]] = n.to_json()
        _dump({
            "mode": args.mode,
            "vertex_classes": [names[o] for o in inv.vertex_classes],
            "edge_classes": [names[o] for o in inv.edge_classes],
            "base": {names[o]: o.label() for o in inv.classes},
            "members": {names[o]: _members(state, o) for o in inv.classes},
            "entries": rows,
            "ornaments": table,
        }, out)
        return 0
    out.write("\n".join(_table(state)) + "\n")
    return 0


def cmd_orbits(args, out: TextIO) -> int:
    state = _state(_load(args.file), args.mode)
    report = orbit_report(state)
    if args.json:
        _dump([
            {"index": c.index, "cell": "edge" if c.is_edge else "vertex", "base": c.ornament.label(),
             "members": list(c.members), "neighbors": {f"#{j}": n.to_json() for j, n in c.row}}
            for c in report
        ], out)
        return 0
    out.write(_summary(state, args.mode) + "\n")
    for c in report:
        row = " ".join(f"{n}x#{j}" for j, n in c.row)
        out.write(f"#{c.index:<3} {'e' if c.is_edge else 'v'} {c.ornament.label():<20} {' '.join(c.members)}\n")
        out.write(f"     neighbors: {row}\n")
    return 0


def cmd_imbalance(args, out: TextIO) -> int:
    g = _cylinder_graph(_load(args.file), "imbalance")
    state = full_refine(Workspace((g,), args.mode))
    cx, d, o = state.cx, state.decoration, state.orientation
    index = _class_index(state)
    rows = []
    for orn in sort_ornaments(d[t] for t in cx.vertex_cells if cx.is_cylinder(t)):
        rep = min(t for t in cx.vertex_cells if d[t] is orn)
        vec = imbalance(cx, d, o, rep)
        rows.append({
            "class": index[orn],
            "members": _members(state, orn),
            "dihedral": bool(cx.vertex_rec[rep].dihedral),
            "imbalance": {f"#{index[e]}": n for e, n in vec.entries},
        })
    if args.json:
        _dump(rows, out)
        return 0
    for r in rows:
        vec = " ".join(f"{k}:{n:+d}" for k, n in r["imbalance"].items()) or "0"
        note = " (dihedral)" if r["dihedral"] else ""
        out.write(f"#{r['class']:<3} {','.join(r['members']):<20} {vec}{note}\n")
    return 0


def cmd_stretch(args, out: TextIO) -> int:
    g = _cylinder_graph(_load(args.file), "stretch")
    state = stable_state(Workspace((g,), "qi+stretch"))
    cx, d = state.cx, state.decoration
    index = _class_index(state)
    rs = stretch_decoration(g)
    rows = []
    for e in cx.edge_cells:
        if rs[cx.names[e]] is None:
            continue
        c = cx.ends[e][0]
        rows.append((cx.names[c], index[d[c]], cx.names[e], index[d[e]], format_rational(rs[cx.names[e]])))
    rows.sort(key=lambda r: (r[1], r[0], r[3], r[2]))
    if args.json:
        _dump([{"cylinder": c, "cylinder_class": ci, "edge": e, "edge_class": ei, "rs": q}
               for c, ci, e, ei, q in rows], out)
        return 0
    out.write(f"{'cylinder':<12} {'class':<6} {'edge':<12} {'class':<6} rs\n")
    for c, ci, e, ei, q in rows:
        out.write(f"{c:<12} #{ci:<5} {e:<12} #{ei:<5} {q}\n")
    return 0


def cmd_compare(args, out: TextIO) -> int:
    a = _cylinder_graph(_load(args.a), "compare")
    b = _cylinder_graph(_load(args.b), "compare")
    if args.mode not in ("qi", "qi+stretch", "boundary"):
        raise UsageError(f"compare supports --mode qi or boundary, not {args.mode}")
    if args.max_xi < 0:
        raise UsageError("--max-xi must be non-negative")
    v = compare(a, b, args.mode, max_xi=args.max_xi)
    out.write(f"{v.kind}: {v.reason}\n")
    for note in v.notes:
        out.write(f"note: {note}\n")
    if args.witness:
        classes = [
            {"base": orn.label(), "a": list(ma), "b": list(mb)}
            for orn, ma, mb in v.matching
        ]
        flipped = {orn for orn in v.xi}
        _dump({
            "verdict": v.kind,
            "beta": classes,
            "xi": [i for i, (orn, _, _) in enumerate(v.matching) if orn in flipped],
        }, out)
    return v.exit_code


def cmd_oracle_check(args, out: TextIO) -> int:
    g = _load(args.file)
    if args.mode not in ("type", "qi", "rel-qi"):
        raise UsageError("oracle-check compares neighbor classes; use --mode type, qi or rel-qi")
    state = _state(g, args.mode)
    cx = state.cx
    if isinstance(g, Multigraph):
        labels = trivial_decoration(cx)
    else:
        labels = Workspace((g,), args.mode).initial()
    radius = cx.n_cells + 1 if args.radius is None else args.radius
    if radius < 0:
        raise UsageError("--radius must be non-negative")
    problems = oracle_check(cx, state.decoration, radius, labels)
    for p in problems:
        out.write(p + "\n")
    out.write(f"{len(problems)} discrepancies over {cx.n_cells} cells at radius {radius}\n")
    return 1 if problems else 0


_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def cmd_export_dot(args, out: TextIO) -> int:
    g = _load(args.file)
    state = _state(g, args.mode)
    cx, d = state.cx, state.decoration
    index = _class_index(state)
    name = g.name if isinstance(g, CylinderGraph) else "multigraph"
    node = {t: json.dumps(("e:" if cx.is_edge(t) else "v:") + cx.names[t]) for t in range(cx.n_cells)}
    lines = [f"digraph {json.dumps(name)} {{"]
    for t in range(cx.n_cells):
        k = index[d[t]]
        shape = "box" if cx.is_edge(t) else "ellipse"
        lines.append(
            f"  {node[t]} [label={json.dumps(cx.names[t])}, class={k}, shape={shape}, "
            f"style=filled, fillcolor=\"{_PALETTE[k % len(_PALETTE)]}\"];"
        )
    for e in cx.edge_cells:
        a, b = cx.ends[e]
        rec = cx.edge_rec[e] if cx.edge_rec else None
        sign = "null" if rec is None or rec.sign is None else str(rec.sign)
        ma, mb = cx.end_mult[e]
        lines.append(f"  {node[a]} -> {node[e]} [mult={json.dumps(str(ma))}, sign={json.dumps(sign)}];")
        lines.append(f"  {node[e]} -> {node[b]} [mult={json.dumps(str(mb))}, sign={json.dumps(sign)}];")
    lines.append("}")
    out.write("\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# entry points


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jsjinv", description="Invariants of quotient graphs of cylinders.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, func, help: str, mode: str = "qi") -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--mode", choices=MODES, default=mode)
        return p

    p = add("refine", cmd_refine, "run refinement and list the stable classes")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")

    p = add("invariant", cmd_invariant, "print the structure invariant")
    p.add_argument("file")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--table", action="store_true", help="block matrix (the default)")

    p = add("orbits", cmd_orbits, "stable classes with their neighbor counts")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")

    p = add("imbalance", cmd_imbalance, "orientation imbalance per cylinder class", mode="boundary")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")

    p = add("stretch", cmd_stretch, "relative stretch factors per cylinder", mode="qi+stretch")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")

    p = add("compare", cmd_compare, "decide equivalence of two inputs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--witness", action="store_true", help="print the class matching and xi as JSON")
    p.add_argument("--max-xi", type=int, default=20)

    p = add("oracle-check", cmd_oracle_check, "cross-check classes against ball isomorphism", mode="type")
    p.add_argument("file")
    p.add_argument("--radius", type=int, default=None, help="default: number of cells + 1")

    p = add("export-dot", cmd_export_dot, "write the complex as a DOT digraph")
    p.add_argument("file")
    return parser


def run(argv: Sequence[str], out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    handler = logging.StreamHandler(err)
    handler.setFormatter(logging.Formatter("jsjinv: warning: %(message)s"))
    root = logging.getLogger("jsjinv")
    root.addHandler(handler)
    try:
        args = build_parser().parse_args(list(argv))
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"jsjinv: usage error: {exc}\n")
        return EX_USAGE
    except (InputError, OSError) as exc:
        err.write(f"jsjinv: {type(exc).__name__}: {exc}\n")
        return EX_DATAERR
    except (JSJError, AssertionError, Exception) as exc:  # noqa: BLE001
        err.write(f"jsjinv: internal error: {type(exc).__name__}: {exc}\n")
        return EX_SOFTWARE
    finally:
        root.removeHandler(handler)


def main() -> None:
    sys.exit(run(sys.argv[1:]))
