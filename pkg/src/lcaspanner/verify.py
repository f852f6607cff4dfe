"""Full-scan builds, global references, and checkers for stretch, connectivity,
Voronoi contraction and k2 cluster structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .graph import GraphView, edge_key
from .probes import AdjacencyOracle, ProbeLedger
from .randomness import AlgParams, log2n
from . import spanner3, spanner5, spanner_k2

ALGOS = ("3", "5", "k2", "bs")


@dataclass
class BuildResult:
    edges: set
    ledger: ProbeLedger
    failures: set
    ctx: object = field(repr=False, default=None)


def make_context(algo: str, graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                 k: int | None = None, shared: bool = True, strict: bool = False, oracle=None):
    src = oracle if oracle is not None else graph
    algo = str(algo)
    if algo == "3":
        return spanner3.Spanner3Context(src, seed, params, strict=strict, shared=shared)
    if algo == "5":
        return spanner5.Spanner5Context(src, seed, params, strict=strict, shared=shared)
    if algo in ("k2", "bs"):
        return spanner_k2.K2Context(src, seed, params, k=k, strict=strict, shared=shared,
                                    bs_only=algo == "bs")
    raise ValueError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGOS)}")


def query_fn(algo: str):
    algo = str(algo)
    if algo == "3":
        return spanner3.query3
    if algo == "5":
        return spanner5.query5
    if algo in ("k2", "bs"):
        return spanner_k2.query_main
    raise ValueError(f"unknown algorithm {algo!r}")


def build_spanner(algo: str, graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                  k: int | None = None, isolated: bool = False, strict: bool = False) -> BuildResult:
    """Query every edge once and keep the YES answers.

    With isolated=True every query pays its own probes, so the ledger's
    per-query maximum is exact; otherwise derived values are shared.
    """
    ctx = make_context(algo, graph, seed, params, k, shared=not isolated, strict=strict)
    q = query_fn(algo)
    out = set()
    per_max = 0
    for e in graph.edges():
        if q(e[0], e[1], ctx):
            out.add(e)
        per_max = max(per_max, ctx.last_ledger.total)
    led = ctx.session.cumulative
    led.per_query_max = per_max
    return BuildResult(out, led, set(ctx.failures), ctx)


def build_global(algo: str, graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                 k: int | None = None) -> BuildResult:
    """The whole-graph reference construction for `algo`."""
    algo = str(algo)
    if algo == "3":
        ctx = spanner3.Spanner3Context(graph, seed, params)
        edges = spanner3.build_spanner3_global(graph, seed, params, ctx)
    elif algo == "5":
        ctx = spanner5.Spanner5Context(graph, seed, params)
        edges = spanner5.build_spanner5_global(graph, seed, params, ctx)
    elif algo in ("k2", "bs"):
        ctx = spanner_k2.K2Context(graph, seed, params, k=k, bs_only=algo == "bs")
        edges = spanner_k2.build_spanner_k2_global(graph, seed, params, k, ctx)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    return BuildResult(edges, ProbeLedger(), set(ctx.failures), ctx)


def check_equivalence(algo: str, graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                      k: int | None = None) -> tuple[bool, set, set]:
    """(agree, local-only edges, global-only edges) for a full local scan vs the reference."""
    loc = build_spanner(algo, graph, seed, params, k).edges
    glob = build_global(algo, graph, seed, params, k).edges
    return loc == glob, loc - glob, glob - loc


# stretch and connectivity

@dataclass
class StretchReport:
    removed: int
    max_stretch: float
    worst: list
    bound: float
    passed: bool
    clustering_failures: int = 0


def _sym_matrix(n: int, edges) -> csr_matrix:
    arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([arr[:, 0], arr[:, 1]])
    cols = np.concatenate([arr[:, 1], arr[:, 0]])
    data = np.ones(rows.size, dtype=np.int8)
    return csr_matrix((data, (rows, cols)), shape=(n, n))


def removed_edge_distances(graph: GraphView, spanner_edges, chunk: int = 256) -> dict:
    """Spanner distance between the endpoints of every removed edge (inf if cut)."""
    kept = {edge_key(*e) for e in spanner_edges}
    removed = [e for e in graph.edges() if e not in kept]
    if not removed:
        return {}
    M = _sym_matrix(graph.n, kept)
    by_src: dict[int, list[int]] = {}
    for a, b in removed:
        by_src.setdefault(a, []).append(b)
    srcs = sorted(by_src)
    out = {}
    for i in range(0, len(srcs), chunk):
        part = srcs[i:i + chunk]
        D = shortest_path(M, method="D", unweighted=True, indices=part)
        for row, a in enumerate(part):
            for b in by_src[a]:
                out[(a, b)] = float(D[row, b])
    return out


def check_stretch(graph: GraphView, spanner_edges, bound: float, failures: int = 0) -> StretchReport:
    """Worst spanner distance over removed edges, compared with `bound`."""
    dist = removed_edge_distances(graph, spanner_edges)
    if not dist:
        return StretchReport(0, 1.0, [], bound, True, failures)
    worst = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
    mx = worst[0][1]
    return StretchReport(len(dist), mx, worst, bound, mx <= bound, failures)


def components(n: int, edges) -> np.ndarray:
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    edges = list(edges)
    if not edges:
        return np.arange(n)
    return connected_components(_sym_matrix(n, edges), directed=False)[1]


def check_connectivity(graph: GraphView, spanner_edges) -> bool:
    """Does the spanner have the same connected components as the graph?"""
    if graph.n == 0:
        return True
    # a subgraph's components refine the graph's, so equal counts mean equal partitions
    a = np.unique(components(graph.n, graph.edges())).size
    b = np.unique(components(graph.n, spanner_edges)).size
    return a == b


# Voronoi contraction

@dataclass
class ContractedPair:
    cells: list  # cell index -> center id
    g_vor: GraphView
    g_vor_spanner: GraphView


def contract_voronoi(graph: GraphView, center_of, spanner_edges) -> ContractedPair:
    """Contract every Voronoi cell to one vertex, once for the graph and once for the spanner.

    `center_of` maps vertex -> center (None for unassigned vertices, which are dropped).
    """
    cent = [center_of[v] for v in range(graph.n)]
    cells = sorted({c for c in cent if c is not None})
    idx = {c: i for i, c in enumerate(cells)}

    def contract(edges):
        out = set()
        for a, b in edges:
            ca, cb = cent[a], cent[b]
            if ca is None or cb is None or ca == cb:
                continue
            out.add(edge_key(idx[ca], idx[cb]))
        return GraphView.from_edges(len(cells), sorted(out))

    return ContractedPair(cells, contract(graph.edges()), contract(spanner_edges))


def contracted_stretch(pair: ContractedPair, bound: float) -> StretchReport:
    return check_stretch(pair.g_vor, pair.g_vor_spanner.edges(), bound)


# k2 cluster structure

@dataclass
class ClusterReport:
    cells: int
    clusters: int
    count_bound: float
    partition_ok: bool
    sizes_ok: bool
    count_ok: bool
    matches_global: bool
    failures: int
    problems: list

    @property
    def passed(self) -> bool:
        return self.partition_ok and self.sizes_ok and self.count_ok and self.matches_global


def cluster_count_bound(n: int, k: int, max_deg: int, centers: int, L: int) -> float:
    return centers + 4 * n * k * (math.log2(max_deg) if max_deg > 1 else 0.0) / L


def check_cluster_invariants(graph: GraphView, ctx: spanner_k2.K2Context | None = None,
                             seed: int = 0, params: AlgParams | None = None,
                             k: int | None = None) -> ClusterReport:
    """Rebuild every cluster through the local reconstruction and check the partition."""
    if ctx is None:
        ctx = spanner_k2.K2Context(graph, seed, params, k=k, shared=True)
    L = ctx.L
    glob = spanner_k2.build_spanner_k2_global(graph, ctx.seed, ctx.params, ctx.k, ctx, full=True)
    problems = []
    owner: dict[int, tuple] = {}
    clusters: dict[tuple, tuple] = {}
    failures = 0
    for v in range(graph.n):
        if glob.remote[v]:
            continue
        try:
            a = spanner_k2.find_center(v, ctx)
            desc = spanner_k2.cluster_of(v, ctx)
        except spanner_k2.ClusteringFailure:
            failures += 1
            continue
        if a.center != glob.center[v] or a.dist != glob.dist[v] or a.parent != glob.parent[v]:
            problems.append(f"voronoi mismatch at {v}")
        if v not in desc.members:
            problems.append(f"{v} outside its own cluster")
        prev = clusters.setdefault(desc.cid, desc.members)
        if prev != desc.members:
            problems.append(f"cluster {desc.cid} rebuilt differently")
        owner[v] = desc.cid
        if desc.kind != spanner_k2.SINGLETON and len(desc.members) > L:
            problems.append(f"cluster {desc.cid} has {len(desc.members)} > L members")
    seen: dict[int, tuple] = {}
    partition_ok = True
    for cid, ms in clusters.items():
        for w in ms:
            if w in seen and seen[w] != cid:
                partition_ok = False
                problems.append(f"{w} in two clusters")
            seen[w] = cid
            if glob.center[w] != cid[0]:
                partition_ok = False
                problems.append(f"{w} clustered outside its cell")
    if set(seen) != set(owner):
        partition_ok = False
        problems.append("clusters do not cover the assigned vertices")
    sizes_ok = not any("> L" in p for p in problems)
    matches = {cid: tuple(ms) for cid, ms in glob.members.items()} == clusters
    cells = len({c for c in glob.center if c is not None})
    deg = graph.degrees()
    bound = cluster_count_bound(graph.n, ctx.k, int(deg.max()) if graph.n else 0,
                                len(ctx.centers), L)
    return ClusterReport(cells, len(clusters), bound, partition_ok, sizes_ok,
                         len(clusters) <= bound, matches, failures, problems[:20])


def bs_subgraph_edges(graph: GraphView, remote) -> list[tuple[int, int]]:
    """Edges of H: those with at least one remote endpoint."""
    return [e for e in graph.edges() if remote[e[0]] or remote[e[1]]]


def probe_audit(algo: str, graph: GraphView, edges, seed: int = 0,
                params: AlgParams | None = None, k: int | None = None) -> list[tuple]:
    """Isolated per-query ledgers next to the raw oracle counters, edge by edge."""
    oracle = AdjacencyOracle(graph)
    ctx = make_context(algo, graph, seed, params, k, shared=False, oracle=oracle)
    q = query_fn(algo)
    out = []
    for u, v in edges:
        before = oracle.counts()
        ans = q(u, v, ctx)
        after = oracle.counts()
        raw = tuple(b - a for a, b in zip(before, after))
        out.append(((u, v), ans, ctx.last_ledger.as_tuple(), raw))
    return out


def sparsity_scale(algo: str, n: int, k: int = 3) -> float:
    """The edge-count growth law each construction is measured against."""
    lg = log2n(n)
    if algo == "3":
        return n ** 1.5 * lg
    if algo == "5":
        return n ** (4 / 3) * lg ** 2
    if algo == "k2":
        return n ** (1 + 1 / k) * k * k * lg ** 3
    if algo == "bs":
        return k * n ** (1 + 1 / k)
    raise ValueError(algo)
