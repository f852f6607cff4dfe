import math
from math import isqrt

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from conftest import from_nx
from lcaspanner.graph import GraphView, gnp, planted_hubs
from lcaspanner.randomness import AlgParams, bucket_of, class_of, log2n
from lcaspanner.spanner3 import (Spanner3Context, build_spanner3_global, centers3_of, dominates,
                                 in_cluster3, query3)
from lcaspanner.verify import build_spanner, check_stretch


def complete(n):
    return GraphView.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def scan(g, ctx):
    return {e for e in g.edges() if query3(*e, ctx)}


def test_context_sizes():
    ctx = Spanner3Context(gnp(1024, 0.01, 1), 0)
    assert ctx.threshold == 32
    assert ctx.levels == 5
    assert ctx.family.sizes == (320, 160, 80, 40, 20)


def test_star_keeps_every_edge(star3):
    ctx = Spanner3Context(star3, 0)
    assert all(query3(*e, ctx) for e in star3.edges())


def test_centers_empty_level():
    # K_15: threshold 3, degree 14 is class 3, but there are only 2 levels
    g = complete(15)
    ctx = Spanner3Context(g, 1)
    assert class_of(14, ctx.threshold) == 3 and ctx.family.levels == 2
    assert centers3_of(0, ctx) == ()
    assert scan(g, ctx) == g.edge_set()
    # failures are logged on the dominating endpoint, and 0 never dominates
    assert ctx.failures == set(range(1, 15))


def test_centers_in_complete_graph():
    g = complete(25)
    ctx = Spanner3Context(g, 3)
    for u in range(25):
        level = ctx.family.level(class_of(24, ctx.threshold))
        assert centers3_of(u, ctx) == tuple(x for x in level if x != u)
        assert ctx.last_ledger.adjacency_probes == len(level)


def test_centers_match_brute_force():
    g = gnp(200, 0.5, 7)
    ctx = Spanner3Context(g, 7)
    for u in range(0, 200, 9):
        d = g.degree(u)
        want = set(g.neighbors(u).tolist()) & set(ctx.family.level(class_of(d, ctx.threshold)))
        assert set(centers3_of(u, ctx)) == want


def test_in_cluster_rules():
    g = gnp(200, 0.5, 7)
    ctx = Spanner3Context(g, 7)
    D = ctx.threshold
    x = ctx.family.level(1)[0]
    assert not in_cluster3(x, x, 1, ctx)
    light = GraphView.from_edges(200, [(0, 1)])
    assert not in_cluster3(1, 0, 1, Spanner3Context(light, 7))
    # heavy neighbors of x in the right class are members; cost is one degree + one adjacency probe
    found = 0
    for y in g.neighbors(x).tolist():
        c = class_of(g.degree(y), D)
        assert in_cluster3(y, x, c, ctx)
        assert ctx.last_ledger.as_tuple() == (1, 0, 1)
        assert not in_cluster3(y, x, c + 1, ctx)
        found += 1
    assert found


def test_complete_graph_matches_global_replay():
    g = complete(25)
    ctx = Spanner3Context(g, 3)
    assert scan(g, ctx) == build_spanner3_global(g, 3)


def test_center_edges_always_kept():
    g = gnp(300, 0.3, 2)
    ctx = Spanner3Context(g, 2)
    D = ctx.threshold
    for a, b in g.edges():
        da, db = g.degree(a), g.degree(b)
        u, v = (a, b) if dominates(da, a, db, b) else (b, a)
        if g.degree(v) > D and ctx.family.contains(class_of(g.degree(u), D), v):
            assert query3(a, b, ctx)


def test_low_degree_edges_always_kept():
    g = planted_hubs(300, 0.01, 3, 0.5, 4)
    ctx = Spanner3Context(g, 4)
    for a, b in g.edges():
        if min(g.degree(a), g.degree(b)) <= ctx.threshold:
            assert query3(a, b, ctx)


def test_orientation_tie_break():
    assert dominates(5, 1, 4, 9)
    assert dominates(4, 9, 4, 1)
    assert not dominates(4, 1, 4, 9)


@given(st.integers(0, 2**32), st.floats(0.1, 0.9))
def test_symmetric_and_pure(seed, p):
    g = gnp(60, p, seed % 97)
    ctx = Spanner3Context(g, seed)
    other = Spanner3Context(g, seed, shared=True)
    for u, v in list(g.edges())[:150]:
        a = query3(u, v, ctx)
        assert a == query3(v, u, ctx) == query3(u, v, other)


def test_scan_order_irrelevant():
    g = gnp(150, 0.3, 8)
    ctx = Spanner3Context(g, 8, shared=True)
    edges = list(g.edges())
    fwd = {e for e in edges if query3(*e, ctx)}
    ctx2 = Spanner3Context(g, 8, shared=True)
    back = {e for e in reversed(edges) if query3(e[1], e[0], ctx2)}
    assert fwd == back


@pytest.mark.parametrize("seed", range(4))
def test_local_equals_global(seed):
    g = planted_hubs(250, 0.15, 4, 0.7, seed)
    for prm in (AlgParams(), AlgParams(early_stop=True), AlgParams(c_centers=0.2)):
        loc = build_spanner("3", g, seed, prm, isolated=True).edges
        assert loc == build_spanner3_global(g, seed, prm)


def test_bucket_first_member_rule():
    # a clustered neighbor y of v is kept iff, for one of y's centers x, it is
    # the first member of x's cluster in its bucket of N(v)
    g = gnp(300, 0.4, 3)
    ctx = Spanner3Context(g, 3, shared=True)
    D = ctx.threshold
    adj = g.adj_lists()
    deg = g.degree_list()
    kept = dropped = 0
    for v in range(0, 300, 5):
        if deg[v] <= D:
            continue
        first = {}
        cand = []
        for j, y in enumerate(adj[v], start=1):
            if not dominates(deg[y], y, deg[v], v):
                continue
            cy = class_of(deg[y], D)
            cs = centers3_of(y, ctx)
            for x in cs:
                first.setdefault((bucket_of(j, D), x, cy), j)
            center_edge = ctx.family.contains(cy, v) or ctx.family.contains(class_of(deg[v], D), y)
            if cs and not center_edge:
                cand.append((j, y, cy, cs))
        for j, y, cy, cs in cand:
            want = any(first[(bucket_of(j, D), x, cy)] == j for x in cs)
            assert query3(v, y, ctx) == want
            kept += want
            dropped += not want
    assert kept and dropped


def test_tree_keeps_every_edge():
    g = from_nx(nx.random_labeled_tree(400, seed=1))
    res = build_spanner("3", g, 1)
    assert res.edges == g.edge_set()
    assert check_stretch(g, res.edges, 3).removed == 0


@pytest.mark.parametrize("seed", range(5))
def test_stretch_three(seed):
    g = gnp(400, 0.25, seed)
    res = build_spanner("3", g, seed)
    assert len(res.edges) < g.m
    rep = check_stretch(g, res.edges, 3, len(res.failures))
    assert rep.passed or rep.clustering_failures


def test_strict_mode_rejects_non_edge(path3):
    ctx = Spanner3Context(path3, 0, strict=True)
    with pytest.raises(ValueError, match="not an edge"):
        query3(0, 2, ctx)


# probe budget: max per-query probes <= KAPPA * sqrt(n) * log2 n,
# KAPPA measured at about 6 on G(n, n^-1/3) for n = 2^10..2^16
KAPPA = 8.0


@pytest.mark.parametrize("n", [512, 2048])
def test_probe_budget(n):
    g = gnp(n, n ** (-1 / 3), 1)
    ctx = Spanner3Context(g, 1)
    worst = 0
    for e in list(g.edges())[::max(1, g.m // 300)]:
        query3(*e, ctx)
        worst = max(worst, ctx.last_ledger.total)
    assert worst <= KAPPA * math.sqrt(n) * log2n(n)
