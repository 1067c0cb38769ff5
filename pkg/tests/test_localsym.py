import itertools
import json
import random

import pytest
from conftest import fixture, fixture_doc

from jsjinv.classify import Workspace, full_refine
from jsjinv.errors import IllPosedQuery, OracleMissing
from jsjinv.localsym import MatchQuery, query_match, query_reversal, vertex_refine
from jsjinv.model import initial_decoration, parse_document, subdivide
from jsjinv.orient import PartialOrientation
from jsjinv.ornaments import OrnamentUniverse
from jsjinv.refine import neighbor_refine_fix, partition

# ---------------------------------------------------------------------------
# brute-force oracle: close the generators under composition


def _compose(g, h):
    """Apply g, then h."""
    (gp, gs), (hp, hs) = g, h
    return tuple(hp[gp[i]] for i in range(len(gp))), tuple(gs[i] * hs[gp[i]] for i in range(len(gp)))


def _group(gens, n):
    ident = (tuple(range(n)), (1,) * n)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _compose(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def _act(x, labels):
    perm, signs = x
    out = [None] * len(labels)
    for i, (r, o) in enumerate(labels):
        out[perm[i]] = (r, o * signs[i])
    return tuple(out)


def _brute_match(group, src, tgt, s_slots=None, t_slots=None, reversal=False):
    for x in group:
        if _act(x, src) != tgt:
            continue
        if s_slots is None:
            return True
        for s in s_slots:
            if x[0][s] in t_slots and (x[1][s] == -1 or not reversal):
                return True
    return False


# ---------------------------------------------------------------------------
# toy documents


def _two_vertex_doc(n, gens, kind="signed_perm_group", reversible=False):
    # slot i of r and of s both attach to cylinder c<i>
    vertices = [{"id": f"c{i}", "kind": "cylindrical"} for i in range(n)]
    vertices += [{"id": "r", "kind": "rigid", "oracle": "G"}, {"id": "s", "kind": "rigid", "oracle": "G"}]
    edges = []
    for i in range(n):
        for v in ("r", "s"):
            edges.append({"id": f"{v}{i}", "cyl": f"c{i}", "ne": v, "mult_at_cyl": 1, "mult_at_ne": "inf",
                          "sign": 1, "k": "1/1", "reversible": reversible})
    spec = {"id": "G", "type": kind, "slots": n,
            "slot_edge": {v: {str(i): f"{v}{i}" for i in range(n)} for v in ("r", "s")}}
    if kind == "signed_perm_group":
        spec["generators"] = [{"perm": list(p), "signs": list(s)} for p, s in gens]
    return {"name": "toy", "vertices": vertices, "edges": edges, "oracles": [spec]}


def _random_gen(rng, n):
    perm = list(range(n))
    rng.shuffle(perm)
    return tuple(perm), tuple(rng.choice((1, -1)) for _ in range(n))


def _context(cx, rng, u):
    d = list(initial_decoration(cx, "type", u))
    pool = [u.base("edge", "a"), u.base("edge", "b")]
    for e in cx.edge_cells:
        d[e] = rng.choice(pool)
    o = PartialOrientation.empty(cx).with_values({e: rng.choice((-1, 0, 1)) for e in cx.edge_cells})
    return tuple(d), o


def _labels(cx, d, o, v, rank):
    return tuple((rank[d[e]], o[e]) for e in cx.slot_cells[v])


def test_query_match_against_group_closure():
    rng = random.Random(31)
    u = OrnamentUniverse()
    for _ in range(150):
        n = rng.randint(1, 4)
        gens = [_random_gen(rng, n) for _ in range(rng.randint(1, 2))]
        cx = subdivide(parse_document(_two_vertex_doc(n, gens)))
        group = _group(gens, n)
        d, o = _context(cx, rng, u)
        rank = {orn: i for i, orn in enumerate(sorted({d[e] for e in cx.edge_cells}, key=lambda x: x.key))}
        r, s = cx.cell("r", edge=False), cx.cell("s", edge=False)
        src, tgt = _labels(cx, d, o, r, rank), _labels(cx, d, o, s, rank)
        assert (query_match(MatchQuery(cx, d, o, r, s)) == "yes") == _brute_match(group, src, tgt)
        i, j = rng.randrange(n), rng.randrange(n)
        se, te = cx.cell(f"r{i}", edge=True), cx.cell(f"s{j}", edge=True)
        for rev in (False, True):
            got = query_match(MatchQuery(cx, d, o, r, s, se, te, rev)) == "yes"
            assert got == _brute_match(group, src, tgt, [i], {j}, rev)


def test_identity_group_distinct_classes():
    u = OrnamentUniverse()
    ident = ((0, 1), (1, 1))
    cx = subdivide(parse_document(_two_vertex_doc(2, [ident])))
    d = list(initial_decoration(cx, "type", u))
    a, b = u.base("edge", "a"), u.base("edge", "b")
    for name, orn in (("r0", a), ("r1", b), ("s0", b), ("s1", a)):
        d[cx.cell(name, edge=True)] = orn
    o = PartialOrientation.empty(cx)
    r, s = cx.cell("r", edge=False), cx.cell("s", edge=False)
    assert query_match(MatchQuery(cx, tuple(d), o, r, s)) == "no"
    assert len(_group([ident], 2)) == 1


def test_ex11_peripheral_transitivity():
    w = Workspace((fixture("ex11-g0"),), "boundary")
    cx = w.cx
    d, _ = neighbor_refine_fix(cx, w.initial())
    o = PartialOrientation.empty(cx)
    r = cx.cell("r", edge=False)
    eu, ev = cx.cell("e_u", edge=True), cx.cell("e_v", edge=True)
    assert query_match(MatchQuery(cx, d, o, r, r, eu, ev)) == "yes"


def test_trivial_oracle_edges():
    w = Workspace((fixture("fig5"),), "boundary")
    cx = w.cx
    d, _ = neighbor_refine_fix(cx, w.initial())
    o = PartialOrientation.empty(cx)
    r1 = cx.cell("r1", edge=False)
    f, dd = cx.cell("c1-r1", edge=True), cx.cell("d11-r1", edge=True)
    assert query_match(MatchQuery(cx, d, o, r1, r1, f, dd)) == "no"
    assert query_match(MatchQuery(cx, d, o, r1, r1, f, f)) == "yes"
    assert query_reversal(cx, d, o, r1, f) is False
    assert query_reversal(cx, d, o, r1, dd) is True


def test_reversal_flexible_and_flip():
    w = Workspace((fixture("fig3"),), "boundary")
    cx = w.cx
    d, _ = neighbor_refine_fix(cx, w.initial())
    o = PartialOrientation.empty(cx)
    h = cx.cell("h", edge=False)
    for e, _ in cx.incident[h]:
        assert query_reversal(cx, d, o, h, e) is True
    flip = ((0, 1), (-1, 1))
    cx = subdivide(parse_document(_two_vertex_doc(2, [flip])))
    d = initial_decoration(cx, "type")
    o = PartialOrientation.empty(cx)
    r = cx.cell("r", edge=False)
    assert query_reversal(cx, d, o, r, cx.cell("r0", edge=True)) is True
    assert query_reversal(cx, d, o, r, cx.cell("r1", edge=True)) is False


def test_ill_posed_queries():
    w = Workspace((fixture("fig5"),), "boundary")
    cx = w.cx
    d, _ = neighbor_refine_fix(cx, w.initial())
    o = PartialOrientation.empty(cx)
    r1, r4, c1 = (cx.cell(n, edge=False) for n in ("r1", "r4", "c1"))
    with pytest.raises(IllPosedQuery):
        query_match(MatchQuery(cx, d, o, r1, r4))
    with pytest.raises(IllPosedQuery):
        query_match(MatchQuery(cx, d, o, c1, c1))
    with pytest.raises(IllPosedQuery):
        query_match(MatchQuery(cx, d, o, r1, r1, cx.cell("c1-r1", edge=True), None))


def test_oracle_missing():
    doc = _two_vertex_doc(1, [((0,), (1,))])
    del doc["vertices"][-1]["oracle"]
    doc["oracles"][0]["slot_edge"].pop("s")
    assert doc["vertices"][-1]["id"] == "s"
    cx = subdivide(parse_document(doc))
    with pytest.raises(OracleMissing):
        vertex_refine(cx, initial_decoration(cx, "type"), PartialOrientation.empty(cx))


def test_vertex_refine_examples():
    # the stretch triple: trivial
    for name in ("ex11-g0", "ex11-g1", "ex11-g2"):
        w = Workspace((fixture(name),), "boundary")
        cx = w.cx
        d, _ = neighbor_refine_fix(cx, w.initial())
        d2, o2, events = vertex_refine(cx, d, PartialOrientation.empty(cx))
        assert partition(d2) == partition(d) and not o2.oriented_cells() and not events
    # trivial oracle with two incident edge classes: distinct Orbit ornaments
    cx = subdivide(parse_document(_two_vertex_doc(2, [], kind="trivial", reversible=True)))
    d = initial_decoration(cx, "type")
    d2, _, _ = vertex_refine(cx, d, PartialOrientation.empty(cx))
    assert d2[cx.cell("r0", edge=True)] is not d2[cx.cell("r1", edge=True)]
    # fig5: f edges become oriented
    w = Workspace((fixture("fig5"),), "boundary")
    cx = w.cx
    d, _ = neighbor_refine_fix(cx, w.initial())
    _, o2, _ = vertex_refine(cx, d, PartialOrientation.empty(cx))
    oriented = {cx.names[t] for t in o2.oriented_cells()}
    assert {"c1-r1", "c1-r2", "c1-r3"} <= oriented
    assert not any(n.startswith("d") for n in oriented)


def test_match_is_equivalence_relation():
    rng = random.Random(8)
    u = OrnamentUniverse()
    for _ in range(60):
        n = rng.randint(1, 3)
        gens = [_random_gen(rng, n) for _ in range(2)]
        # a third bound vertex on the same cylinders
        doc = _two_vertex_doc(n, gens)
        doc["vertices"].append({"id": "t", "kind": "rigid", "oracle": "G"})
        doc["edges"] += [dict(doc["edges"][0], id=f"t{i}", cyl=f"c{i}", ne="t") for i in range(n)]
        doc["oracles"][0]["slot_edge"]["t"] = {str(i): f"t{i}" for i in range(n)}
        cx = subdivide(parse_document(doc))
        d, o = _context(cx, rng, u)
        vs = [cx.cell(x, edge=False) for x in ("r", "s", "t")]

        def m(a, b):
            return query_match(MatchQuery(cx, d, o, a, b)) == "yes"

        for a in vs:
            assert m(a, a)
        for a, b in itertools.permutations(vs, 2):
            assert m(a, b) == m(b, a)
        for a, b, c in itertools.permutations(vs, 3):
            if m(a, b) and m(b, c):
                assert m(a, c)


def test_vertex_refine_refines_and_idempotent_when_stable():
    for name in ("fig1", "fig5", "ex11-g0"):
        state = full_refine(Workspace((fixture(name),), "boundary"))
        cx, d, o = state.cx, state.decoration, state.orientation
        d2, o2, _ = vertex_refine(cx, d, o)
        assert partition(d2) == partition(d) and o2 == o


def test_oriented_edges_never_reversible():
    for name in ("fig5", "fig1"):
        state = full_refine(Workspace((fixture(name),), "boundary"))
        cx, d, o = state.cx, state.decoration, state.orientation
        for e in o.oriented_cells():
            if cx.is_edge(e):
                v = cx.ends[e][1]
                assert query_reversal(cx, d, o, v, e) is False


def test_slot_renaming_invariance():
    for name in ("fig5", "ex11-g0", "fig1"):
        doc = fixture_doc(name)
        ref = full_refine(Workspace((parse_document(doc),), "boundary"))
        rng = random.Random(len(name))
        new = json.loads(json.dumps(doc))
        for spec in new["oracles"]:
            if spec["type"] != "signed_perm_group":
                continue
            n = spec["slots"]
            sigma = list(range(n))
            rng.shuffle(sigma)  # old slot i becomes slot sigma[i]
            gens = []
            for gen in spec["generators"]:
                perm, signs = [0] * n, [0] * n
                for i in range(n):
                    perm[sigma[i]] = sigma[gen["perm"][i]]
                    signs[sigma[i]] = gen["signs"][i]
                gens.append({"perm": perm, "signs": signs})
            spec["generators"] = gens
            spec["slot_edge"] = {v: {str(sigma[int(k)]): e for k, e in m.items()} for v, m in spec["slot_edge"].items()}
        got = full_refine(Workspace((parse_document(new),), "boundary"))
        names = lambda st: {frozenset(st.cx.names[t] for t in b) for b in partition(st.decoration)}  # noqa: E731
        assert names(got) == names(ref)
