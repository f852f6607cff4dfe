import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from conftest import from_nx
from lcaspanner.graph import GraphView, gnp, edge_key
from lcaspanner.randomness import AlgParams
from lcaspanner.spanner_k2 import (SINGLETON, SUBTREE, WHOLE, ClusteringFailure, K2Context,
                                   adjacent_centers, aux_locate, aux_view, bs_core, bs_global,
                                   bs_query, build_spanner_k2_global, cluster_of, engaged_with,
                                   find_center, is_remote, query_k2, query_main, remote_flags,
                                   subtree_heavy)
from lcaspanner.verify import build_spanner, check_cluster_invariants


def fixture_ctx(g, centers, L, k, marks=None, seed=0, shared=True):
    """A context with hand-placed centers, L and marks."""
    ctx = K2Context(g, seed, AlgParams(), k=k, shared=shared)
    ctx.centers = frozenset(centers)
    ctx.L = L
    if marks is not None:
        ctx._marks = {c: c in marks for c in range(g.n)}
    return ctx


def broom(handle=3, leaves=5):
    """Path 0..handle, with `leaves` leaves hanging off the last path vertex."""
    edges = [(i, i + 1) for i in range(handle)]
    edges += [(handle, handle + 1 + t) for t in range(leaves)]
    return GraphView.from_edges(handle + 1 + leaves, edges)


def aux_fixture(half=3):
    """Vertex 0 with children 1..8; children 1-4 carry half-1 leaves each."""
    edges = [(0, c) for c in range(1, 9)]
    nxt = 9
    for c in range(1, 5):
        for _ in range(half - 1):
            edges.append((c, nxt))
            nxt += 1
    return GraphView.from_edges(nxt, edges)


def grid_cells():
    """A 6x6 grid with four centers, one per corner block."""
    g = from_nx(nx.grid_2d_graph(6, 6))
    return g, [0, 5, 30, 35]


def nx_assignment(g, centers, remote):
    """Closest center by (distance, id) and the min-id parent, from networkx BFS."""
    G = nx.Graph(list(g.edges()))
    G.add_nodes_from(range(g.n))
    G = G.subgraph([v for v in range(g.n) if not remote[v]])
    dist = {c: nx.single_source_shortest_path_length(G, c) for c in centers if c in G}
    best = {}
    for v in G:
        opts = [(d[v], c) for c, d in dist.items() if v in d]
        if opts:
            best[v] = min(opts)
    parent = {}
    for v, (d, c) in best.items():
        parent[v] = v if d == 0 else min(y for y in G[v] if best.get(y) == (d - 1, c))
    return best, parent


# remote vertices

def test_remote_isolated_and_star():
    g = GraphView.from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 4)])
    ctx = fixture_ctx(g, [0], L=5, k=1)
    assert is_remote(5, ctx)
    assert not is_remote(0, ctx)
    assert is_remote(1, ctx)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_remote_boundary_tree(k):
    # complete binary tree of depth k around the root: 2^(k+1) - 1 vertices in the k-ball
    t = nx.balanced_tree(2, k)
    g = from_nx(t)
    size = 2 ** (k + 1) - 1
    assert is_remote(0, fixture_ctx(g, [0], L=size + 1, k=k))
    assert not is_remote(0, fixture_ctx(g, [0], L=size, k=k))


def test_remote_flags_match_local():
    g = gnp(300, 0.03, 3)
    ctx = K2Context(g, 3, AlgParams(), k=2)
    flags = remote_flags(g, ctx.k, ctx.L)
    assert [is_remote(v, ctx) for v in range(g.n)] == flags
    assert 0 < sum(flags) < g.n


# Voronoi assignment

def test_center_is_its_own_cell():
    g, cs = grid_cells()
    ctx = fixture_ctx(g, cs, L=4, k=4)
    a = find_center(0, ctx)
    assert (a.center, a.dist, a.parent) == (0, 0, 0)


def test_center_tie_goes_to_smaller_id():
    g = GraphView.from_edges(5, [(2, 0), (2, 4), (0, 1), (4, 3), (1, 3)])
    ctx = fixture_ctx(g, [4, 0], L=2, k=2)
    a = find_center(2, ctx)
    assert (a.center, a.dist, a.parent) == (0, 1, 0)
    # 3 is two hops from 0 (via 1) and one hop from 4
    assert find_center(3, ctx).center == 4


def test_parent_is_min_id_neighbor():
    g = from_nx(nx.complete_bipartite_graph(2, 4))  # 0,1 | 2..5
    ctx = fixture_ctx(g, [2], L=3, k=3)
    assert find_center(3, ctx).parent == 0
    assert find_center(1, ctx).parent == 2


def test_assignment_matches_networkx():
    g = gnp(400, 0.05, 2)
    ctx = K2Context(g, 2, AlgParams(c_centers=0.05, c_L=0.3), k=3, shared=True)
    remote = remote_flags(g, ctx.k, ctx.L)
    best, parent = nx_assignment(g, ctx.centers, remote)
    glob = build_spanner_k2_global(g, 2, ctx.params, ctx=ctx, full=True)
    checked = 0
    for v in range(g.n):
        if remote[v]:
            continue
        a = find_center(v, ctx)
        assert (a.dist, a.center) == best[v]
        assert a.parent == parent[v]
        assert (glob.center[v], glob.dist[v], glob.parent[v]) == (a.center, a.dist, a.parent)
        checked += 1
    assert checked > 300


def test_centerless_component_is_a_failure():
    g = GraphView.from_edges(8, [(0, 1), (1, 2), (2, 0), (4, 5), (5, 6), (6, 7), (7, 4)])
    ctx = fixture_ctx(g, [0], L=3, k=3)
    assert find_center(1, ctx).center == 0
    with pytest.raises(ClusteringFailure):
        find_center(5, ctx)
    with pytest.raises(ClusteringFailure):
        cluster_of(5, ctx)
    assert 5 in ctx.failures
    # the fallback keeps every edge of the centerless component
    for e in [(4, 5), (5, 6), (6, 7), (4, 7)]:
        assert query_main(*e, ctx)
    glob = build_spanner_k2_global(g, 0, ctx=fixture_ctx(g, [0], L=3, k=3))
    assert {(4, 5), (5, 6), (6, 7), (4, 7)} <= glob


def test_remote_vertex_is_refused():
    g = GraphView.from_edges(3, [(0, 1)])
    ctx = fixture_ctx(g, [0], L=3, k=1)
    with pytest.raises(ValueError, match="remote"):
        find_center(2, ctx)


# subtree weights and clusters

def test_subtree_heavy_broom():
    g = broom(3, 5)
    ctx = fixture_ctx(g, [0], L=5, k=4)
    assert not any(is_remote(v, ctx) for v in range(g.n))
    assert [subtree_heavy(v, ctx) for v in range(g.n)] == [True] * 4 + [False] * 5


def test_cluster_broom():
    g = broom(3, 5)
    ctx = fixture_ctx(g, [0], L=5, k=4)
    for v in range(4):
        d = cluster_of(v, ctx)
        assert d.kind == SINGLETON and d.members == (v,)
    leaf = cluster_of(6, ctx)
    assert leaf.kind == SUBTREE and leaf.members == (4, 5, 6, 7, 8) and leaf.center == 0
    assert all(cluster_of(v, ctx) == leaf for v in range(4, 9))
    rep = check_cluster_invariants(g, ctx)
    assert rep.passed and rep.clusters == 5 and rep.cells == 1


def test_whole_cell_cluster():
    g, cs = grid_cells()
    ctx = fixture_ctx(g, cs, L=9, k=4)
    d = cluster_of(7, ctx)
    assert d.kind == WHOLE and d.center == 0
    assert d.members == (0, 1, 2, 6, 7, 8, 12, 13, 14)
    rep = check_cluster_invariants(g, ctx)
    assert rep.passed and rep.clusters == rep.cells == 4


def test_aux_tree_single_leaf():
    g = GraphView.from_edges(5, [(0, 1), (1, 2), (1, 3), (1, 4)])
    ctx = fixture_ctx(g, [0], L=4, k=3)
    z = aux_locate(1, 0, ctx)
    assert (z.level, z.offset, z.weight) == (0, 0, 4)
    assert aux_view(0, ctx).depth == 0


def test_aux_tree_all_small_children():
    g = GraphView.from_edges(8, [(0, c) for c in range(1, 6)] + [(5, 6), (6, 7)])
    ctx = fixture_ctx(g, [0], L=6, k=3)
    # 7 sees only four vertices within three hops, so it is remote and outside every tree
    assert is_remote(7, ctx) and not is_remote(6, ctx)
    assert subtree_heavy(0, ctx)
    assert aux_view(0, ctx).sizes == {1: 1, 2: 1, 3: 1, 4: 1, 5: 2}
    for c in range(1, 6):
        z = aux_locate(c, 0, ctx)
        assert (z.level, z.offset, z.weight) == (0, 0, 6)
        assert cluster_of(c, ctx).members == (1, 2, 3, 4, 5, 6)
    rep = check_cluster_invariants(g, ctx)
    assert rep.passed and rep.clusters == 2


def test_aux_tree_degree_eight():
    L, half = 6, 3
    g = aux_fixture(half)
    ctx = fixture_ctx(g, [0], L=L, k=4)
    view = aux_view(0, ctx)
    assert view.depth == 3
    assert [view.sizes[c] for c in range(1, 9)] == [half] * 4 + [1] * 4
    assert view.weight(0, 0, L) == L + 1
    assert view.weight(1, 0, L) == L + 1 and view.weight(1, 1, L) == 4
    assert view.weight(2, 0, L) == 2 * half == L
    assert [(z.level, z.offset) for z in (aux_locate(c, 0, ctx) for c in range(1, 9))] == \
        [(2, 0)] * 2 + [(2, 1)] * 2 + [(1, 1)] * 4
    kids = {c: [c] + [w for w in g.neighbors(c).tolist() if w > 8] for c in range(1, 9)}
    want = [sorted(kids[1] + kids[2]), sorted(kids[3] + kids[4]), [5, 6, 7, 8]]
    got = sorted({cluster_of(c, ctx).members for c in range(1, 9)})
    assert [list(m) for m in got] == sorted(want)
    assert all(cluster_of(c, ctx).kind == SUBTREE for c in range(1, 9))
    rep = check_cluster_invariants(g, ctx)
    assert rep.passed and rep.clusters == 4


def test_aux_locate_needs_a_child():
    g = aux_fixture()
    ctx = fixture_ctx(g, [0], L=6, k=4)
    with pytest.raises(ValueError):
        aux_locate(9, 0, ctx)


# adjacency between cells and engagement

def test_adjacent_centers_single_cell():
    g = broom(3, 5)
    ctx = fixture_ctx(g, [0], L=5, k=4)
    assert adjacent_centers(cluster_of(6, ctx), ctx) == frozenset()


def test_adjacent_centers_brute_force():
    g, cs = grid_cells()
    ctx = fixture_ctx(g, cs, L=4, k=4)
    glob = build_spanner_k2_global(g, 0, ctx=fixture_ctx(g, cs, L=4, k=4), full=True)
    seen = set()
    for v in range(g.n):
        A = cluster_of(v, ctx)
        if A.cid in seen:
            continue
        seen.add(A.cid)
        want = {glob.center[y] for x in A.members for y in g.neighbors(x).tolist()} - {A.center}
        assert adjacent_centers(A, ctx) == want
    # the corner cells of 0 and 5 touch along the top edge
    assert 5 in adjacent_centers(cluster_of(2, ctx), ctx)


def test_engagement():
    g, cs = grid_cells()
    none = fixture_ctx(g, cs, L=9, k=4, marks=set())
    B = cluster_of(0, none)
    rec = engaged_with(B, none)
    assert rec.engaged_with is None and rec.witness is None

    one = fixture_ctx(g, cs, L=9, k=4, marks={5})
    rec = engaged_with(cluster_of(0, one), one)
    assert rec.engaged_with.center == 5 and rec.witness == (2, 3)

    two = fixture_ctx(g, cs, L=9, k=4, marks={5, 30})
    B = cluster_of(0, two)
    rec = engaged_with(B, two)
    bd = [edge_key(x, y) for x in B.members for y in g.neighbors(x).tolist()
          if cluster_of(y, two).center in (5, 30)]
    assert rec.witness == min(bd) == (2, 3)
    assert rec.engaged_with.center == 5


# queries

def test_tree_edge_in_one_cell():
    g = broom(3, 5)
    ctx = fixture_ctx(g, [0], L=5, k=4)
    assert all(query_k2(*e, ctx) for e in g.edges())


def test_non_tree_edge_in_one_cell_dropped():
    g = from_nx(nx.cycle_graph(6))
    ctx = fixture_ctx(g, [0], L=3, k=3)
    got = {e for e in g.edges() if query_k2(*e, ctx)}
    # 3 hangs off 2 (the smaller of its two parents), so only (3, 4) leaves the tree
    assert got == g.edge_set() - {(3, 4)}


def test_marked_unique_edge_kept():
    # two cells joined by the single edge (2, 3)
    g = GraphView.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    ctx = fixture_ctx(g, [0, 5], L=3, k=5, marks={0})
    assert query_k2(2, 3, ctx)


def test_grid_matches_global():
    g, cs = grid_cells()
    for marks in (set(), {5}, {0, 35}, set(cs)):
        ctx = fixture_ctx(g, cs, L=4, k=4, marks=marks, seed=17)
        ref = build_spanner_k2_global(g, 17, ctx=fixture_ctx(g, cs, L=4, k=4, marks=marks, seed=17))
        assert {e for e in g.edges() if query_main(*e, ctx)} == ref


def test_query_k2_rejects_remote_endpoint():
    g = GraphView.from_edges(4, [(0, 1), (2, 3)])
    ctx = fixture_ctx(g, [0], L=3, k=1)
    with pytest.raises(ValueError, match="remote"):
        query_k2(0, 1, ctx)


# Baswana-Sen on remote vertices

def test_bs_k1_keeps_everything():
    g = gnp(60, 0.05, 1)
    ctx = K2Context(g, 1, AlgParams(), k=1, shared=True)
    assert all(is_remote(v, ctx) for v in range(g.n))
    assert all(bs_query(*e, ctx) for e in g.edges())


def test_bs_isolated_edge():
    g = GraphView.from_edges(10, [(3, 7)])
    ctx = K2Context(g, 1, AlgParams(), k=2)
    assert bs_query(3, 7, ctx)


@pytest.mark.parametrize("k", [2, 3])
def test_bs_matches_global_run(k):
    g = gnp(200, 3 / 200, 23)
    ctx = K2Context(g, 23, AlgParams(), k=k, shared=True)
    remote = remote_flags(g, ctx.k, ctx.L)
    ref = bs_global(g, remote, ctx.k, ctx.bs_sampled)
    local = {e for e in g.edges() if (remote[e[0]] or remote[e[1]]) and bs_query(*e, ctx)}
    assert local == ref


def test_bs_core_matches_edge_centric_run():
    g = gnp(150, 0.05, 4)
    ctx = K2Context(g, 4, AlgParams(), k=3, bs_only=True)
    adj = {v: set(g.neighbors(v).tolist()) for v in range(g.n)}
    assert bs_core(adj, 3, ctx.bs_sampled) == bs_global(g, [True] * g.n, 3, ctx.bs_sampled)


def test_bs_rejects_edge_without_remote_endpoint():
    g = broom(3, 5)
    ctx = fixture_ctx(g, [0], L=5, k=4)
    with pytest.raises(ValueError):
        bs_query(0, 1, ctx)


def test_dispatch_to_bs_for_remote_endpoints():
    g = gnp(300, 3 / 300, 5)
    ctx = K2Context(g, 5, AlgParams(), k=2, shared=True)
    iso = K2Context(g, 5, AlgParams(), k=2, shared=True)
    for e in g.edges():
        if is_remote(e[0], ctx) and is_remote(e[1], ctx):
            assert query_main(*e, ctx) == bs_query(*e, iso)


def test_mixed_graph_matches_composite_global():
    # a dense block (non-remote) plus a sparse tail (remote)
    G = nx.disjoint_union(nx.gnp_random_graph(80, 0.15, seed=1), nx.gnp_random_graph(120, 0.02, seed=2))
    G.add_edges_from([(0, 100), (5, 150)])
    g = from_nx(G)
    prm = AlgParams(c_centers=0.05, c_L=0.4)
    ctx = K2Context(g, 9, prm, k=2)
    remote = remote_flags(g, ctx.k, ctx.L)
    assert 0 < sum(remote) < g.n
    res = build_spanner("k2", g, 9, prm, k=2, isolated=True)
    assert res.edges == build_spanner_k2_global(g, 9, prm, k=2)


@settings(max_examples=12)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]), st.floats(0.02, 0.2))
def test_local_equals_global_random(seed, k, p):
    g = gnp(90, p, seed)
    prm = AlgParams(c_centers=0.02, c_L=0.3)
    assert build_spanner("k2", g, seed, prm, k=k).edges == build_spanner_k2_global(g, seed, prm, k=k)
    rep = check_cluster_invariants(g, seed=seed, params=prm, k=k)
    assert rep.passed, rep.problems


def test_strict_mode_non_edge():
    g = broom(3, 5)
    ctx = K2Context(g, 0, AlgParams(), k=2, strict=True)
    with pytest.raises(ValueError, match="not an edge"):
        query_main(0, 5, ctx)
