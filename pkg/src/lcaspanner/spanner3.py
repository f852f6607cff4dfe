"""LCA for 3-spanners with O~(sqrt n) probes per query, plus a global replay."""

from __future__ import annotations

import math
from math import isqrt

from .graph import GraphView, edge_key
from .probes import ProbeSession, make_session
from .randomness import (AlgParams, RandomTape, bucket_of, class_of, log2n,
                         sample_center_family, scaled_size)


class Spanner3Context:
    """Centers, threshold and session shared by all queries for one seed.

    A vertex is heavy iff deg > floor(sqrt n). Heavy vertices of class c take
    their centers from level c of the family.
    """

    def __init__(self, graph, seed: int = 0, params: AlgParams | None = None,
                 strict: bool = False, shared: bool = False):
        self.session: ProbeSession = make_session(graph, shared)
        self.graph: GraphView = self.session.oracle.graph
        self.n = n = self.graph.n
        self.seed = seed
        self.params = params or AlgParams()
        self.tape = RandomTape(seed)
        self.threshold = isqrt(n)
        self.levels = max(1, math.ceil(log2n(n) / 2))
        self.family = sample_center_family(n, scaled_size(n, self.params.c_centers, 0.5),
                                           self.levels, self.tape, "S")
        self.strict = strict
        self.failures: set[int] = set()

    @property
    def last_ledger(self):
        return self.session.last


def dominates(du: int, u: int, dv: int, v: int) -> bool:
    """Degree order with ties going to the larger id."""
    return du > dv or (du == dv and u > v)


def centers3_of(u: int, ctx: Spanner3Context) -> tuple[int, ...]:
    """S_c intersected with N(u), c the class of u; one adjacency probe per center."""
    s = ctx.session
    return s.run(_centers3, u, ctx)


def _centers3(u: int, ctx: Spanner3Context) -> tuple[int, ...]:
    s = ctx.session

    def compute():
        c = class_of(s.degree(u), ctx.threshold)
        adj = s.adjacency
        return tuple(x for x in ctx.family.level(c) if adj(u, x) is not None)

    return s.cached(("c3", u), compute)


def in_cluster3(y: int, x: int, level: int, ctx: Spanner3Context) -> bool:
    """Is y a clustered neighbor of center x at `level`? At most one degree and one adjacency probe."""
    s = ctx.session
    return s.run(_in_cluster3, y, x, level, ctx, None)


def _in_cluster3(y: int, x: int, level: int, ctx: Spanner3Context, dy: int | None) -> bool:
    s = ctx.session
    if dy is None:
        dy = s.degree(y)
    D = ctx.threshold
    if dy <= D or class_of(dy, D) != level:
        return False
    return s.adjacency(x, y) is not None


def _first_member(ctx: Spanner3Context, v: int, dv: int, x: int, level: int,
                  lo: int, hi: int, stop: bool = True) -> int | None:
    """Smallest j in [lo, hi) whose N(v)[j] dominates v and lies in the cluster of x.

    With stop=False the whole range is read even after a hit.
    """
    s = ctx.session
    deg, nbr = s.degree, s.neighbor
    first = None
    for j in range(lo, hi):
        y = nbr(v, j)
        if y is None:
            break
        dy = deg(y)
        if not dominates(dy, y, dv, v):
            continue
        if _in_cluster3(y, x, level, ctx, dy) and first is None:
            first = j
            if stop:
                break
    return first


def _query3(u: int, v: int, ctx: Spanner3Context) -> bool:
    s = ctx.session
    if ctx.strict and not ctx.graph.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    deg = s.degree
    du, dv = deg(u), deg(v)
    if not dominates(du, u, dv, v):
        u, v, du, dv = v, u, dv, du
    D = ctx.threshold
    if dv <= D:
        return True
    cu = class_of(du, D)
    cv = class_of(dv, D)
    fam = ctx.family
    # center edges, checked from both sides so every cluster keeps its star
    if fam.contains(cu, v) or fam.contains(cv, u):
        return True
    C = _centers3(u, ctx)
    if not C:
        ctx.failures.add(u)
        return True
    i = s.adjacency(v, u)
    b = bucket_of(i, D)
    lo = (b - 1) * D + 1
    for x in C:
        if s.shared:
            first = s.cached(("f3", v, b, x, cu), _first_member, ctx, v, dv, x, cu, lo, b * D + 1)
            hit = first is not None and first < i
        else:
            hit = _first_member(ctx, v, dv, x, cu, lo, i, ctx.params.early_stop) is not None
        if not hit:
            return True
    return False


def query3(u: int, v: int, ctx: Spanner3Context) -> bool:
    """Is {u, v} in the 3-spanner? The query's probes are left in ctx.last_ledger."""
    return ctx.session.run(_query3, u, v, ctx)


def build_spanner3_global(graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                          ctx: Spanner3Context | None = None) -> set[tuple[int, int]]:
    """Replay the same rules over the whole graph with direct adjacency access."""
    if ctx is None:
        ctx = Spanner3Context(graph, seed, params)
    n = graph.n
    D = ctx.threshold
    fam = ctx.family
    adj = graph.adj_lists()
    deg = graph.degree_list()
    cls = [class_of(d, D) if d > D else 0 for d in deg]
    centers: list[list[int]] = [[] for _ in range(n)]
    for w in range(n):
        if cls[w]:
            sw = set(adj[w])
            centers[w] = [x for x in fam.level(cls[w]) if x in sw]
            if not centers[w]:
                ctx.failures.add(w)
    out: set[tuple[int, int]] = set()
    for a in range(n):
        for b in adj[a]:
            if b < a:
                continue
            u, v = (a, b) if dominates(deg[a], a, deg[b], b) else (b, a)
            if deg[v] <= D:
                out.add((a, b))
            elif fam.contains(cls[u], v) or fam.contains(cls[v], u) or not centers[u]:
                out.add((a, b))
    # first dominating member of each (bucket, cluster) along every heavy neighbor list
    for v in range(n):
        if not cls[v]:
            continue
        seen = set()
        for j, y in enumerate(adj[v], start=1):
            if not cls[y] or not dominates(deg[y], y, deg[v], v):
                continue
            b = (j - 1) // D
            for x in centers[y]:
                key = (b, x, cls[y])
                if key not in seen:
                    seen.add(key)
                    out.add(edge_key(v, y))
    return out
