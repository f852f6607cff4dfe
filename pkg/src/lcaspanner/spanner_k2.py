"""O(k^2)-spanners: Voronoi cells around random centers, clusters of size <= L,
marked cells, and a Baswana-Sen fallback for vertices with small neighborhoods.

The local side answers one edge at a time from probes; `build_spanner_k2_global`
replays the connection rules over the whole graph for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .graph import GraphView, edge_key
from .probes import ProbeSession, make_session
from .randomness import (AlgParams, RandomTape, cell_rank, is_marked, log2n,
                         sample_center_family, scaled_size)

WHOLE, SINGLETON, SUBTREE = "whole-cell", "singleton", "subtree-group"


class ClusteringFailure(Exception):
    """A non-remote vertex whose component holds no center."""


@dataclass(frozen=True)
class VoronoiAssignment:
    vertex: int
    center: int
    dist: int
    parent: int


@dataclass(frozen=True)
class AuxNode:
    """Node of the binary tree over N(root): `level` 0 is the root, leaves sit at `depth`."""

    root: int
    level: int
    offset: int
    weight: int


@dataclass(frozen=True)
class AuxTreeView:
    root: int
    depth: int
    degree: int
    slots: dict = field(hash=False)  # leaf slot (index in N(root) - 1) -> child
    sizes: dict = field(hash=False)  # child -> subtree size, capped at L + 1

    def span(self, level: int, offset: int) -> range:
        width = 1 << (self.depth - level)
        return range(offset * width, (offset + 1) * width)

    def node_above(self, slot: int, level: int) -> tuple[int, int]:
        return level, slot >> (self.depth - level)

    def weight(self, level: int, offset: int, cap: int) -> int:
        """Descendant count of the node, stopping once it exceeds `cap`."""
        tot = 0
        for slot in self.span(level, offset):
            y = self.slots.get(slot)
            if y is not None:
                tot += self.sizes[y]
                if tot > cap:
                    return cap + 1
        return tot


@dataclass(frozen=True)
class ClusterDescriptor:
    kind: str
    members: tuple[int, ...]
    center: int
    anchor: tuple | None = None

    @property
    def cid(self) -> tuple[int, str, int]:
        return (self.center, self.kind, self.members[0])


@dataclass(frozen=True)
class EngagementRecord:
    cluster: ClusterDescriptor
    engaged_with: ClusterDescriptor | None
    witness: tuple[int, int] | None


class K2Context:
    """Centers, marks, L and the probe session for one seed."""

    def __init__(self, graph, seed: int = 0, params: AlgParams | None = None,
                 k: int | None = None, strict: bool = False, shared: bool = False,
                 bs_only: bool = False):
        self.session: ProbeSession = make_session(graph, shared)
        self.graph: GraphView = self.session.oracle.graph
        self.n = n = self.graph.n
        self.seed = seed
        self.params = p = params or AlgParams()
        if k is not None:
            p = self.params = replace(p, k=k)
        self.k = p.k_for(n)
        self.tape = RandomTape(seed)
        lg = log2n(n)
        self.L = max(1, math.ceil(p.c_L * n ** (1 / 3) * lg))
        size = scaled_size(n, p.c_centers, 2 / 3) if n else 0
        self.family = sample_center_family(n, size, 1, self.tape, "S") if n else None
        self.centers = self.family.members[0] if n else frozenset()
        self.p_mark = p.mark_prob(n)
        self.top = max(1, math.ceil(n ** (1 / self.k) * lg)) if n > 1 else 1
        self.bs_prob = n ** (-1 / self.k) if n else 1.0
        self.strict = strict
        # treat every vertex as remote: a plain Baswana-Sen spanner
        self.bs_only = bs_only
        self.failures: set[int] = set()
        self._marks: dict[int, bool] = {}

    @property
    def last_ledger(self):
        return self.session.last

    def marked(self, c: int) -> bool:
        m = self._marks.get(c)
        if m is None:
            m = self._marks[c] = is_marked(c, self.tape, self.p_mark)
        return m

    def bs_sampled(self, rnd: int, c: int) -> bool:
        return self.tape.coin(self.bs_prob, "bs", rnd, c)


# remote detection and neighbor lists

def _is_remote(v: int, ctx: K2Context) -> bool:
    s = ctx.session
    if ctx.bs_only:
        return True

    def compute():
        L = ctx.L
        seen = {v}
        if len(seen) >= L:
            return False
        layer = [v]
        for _ in range(ctx.k):
            nxt = []
            for x in layer:
                for j in range(1, s.degree(x) + 1):
                    y = s.neighbor(x, j)
                    if y not in seen:
                        seen.add(y)
                        if len(seen) >= L:
                            return False
                        nxt.append(y)
            if not nxt:
                break
            layer = nxt
        return True

    return s.cached(("rem", v), compute)


def _nbrs_nr(v: int, ctx: K2Context) -> tuple[tuple[int, int], ...]:
    """(index, neighbor) pairs of v's non-remote neighbors."""
    s = ctx.session

    def compute():
        out = []
        for j in range(1, s.degree(v) + 1):
            y = s.neighbor(v, j)
            if not _is_remote(y, ctx):
                out.append((j, y))
        return tuple(out)

    return s.cached(("nnr", v), compute)


# Voronoi cells and BFS trees inside the non-remote subgraph

def _find_center(v: int, ctx: K2Context) -> tuple[int, int] | None:
    """(center, distance) by layered BFS, or None if the component has no center."""
    s = ctx.session

    def compute():
        S = ctx.centers
        if v in S:
            return (v, 0)
        seen = {v}
        layer = [v]
        d = 0
        while layer:
            d += 1
            nxt = []
            for x in layer:
                for _, y in _nbrs_nr(x, ctx):
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            hits = [y for y in nxt if y in S]
            if hits:
                return (min(hits), d)
            layer = nxt
        return None

    return s.cached(("fc", v), compute)


def _parent(v: int, ctx: K2Context) -> int:
    s = ctx.session

    def compute():
        c, d = _find_center(v, ctx)
        if d == 0:
            return v
        want = (c, d - 1)
        for y in sorted(y for _, y in _nbrs_nr(v, ctx)):
            if _find_center(y, ctx) == want:
                return y
        raise AssertionError("BFS parent missing")

    return s.cached(("par", v), compute)


def _children(v: int, ctx: K2Context) -> tuple[tuple[int, int], ...]:
    """(index in N(v), child) pairs of v in its cell's BFS tree."""
    s = ctx.session

    def compute():
        c, d = _find_center(v, ctx)
        want = (c, d + 1)
        return tuple((j, y) for j, y in _nbrs_nr(v, ctx)
                     if _find_center(y, ctx) == want and _parent(y, ctx) == v)

    return s.cached(("ch", v), compute)


def _tsize(v: int, ctx: K2Context) -> int:
    """|T(v)|, capped at L + 1."""
    s = ctx.session

    def compute():
        cap = ctx.L
        count = 0
        stack = [v]
        while stack:
            x = stack.pop()
            count += 1
            if count > cap:
                return cap + 1
            stack.extend(y for _, y in _children(x, ctx))
        return count

    return s.cached(("ts", v), compute)


def _subtree(v: int, ctx: K2Context) -> list[int]:
    out = []
    stack = [v]
    while stack:
        x = stack.pop()
        out.append(x)
        stack.extend(y for _, y in _children(x, ctx))
    return out


def _aux_view(r: int, ctx: K2Context) -> AuxTreeView:
    s = ctx.session

    def compute():
        dr = s.degree(r)
        kids = _children(r, ctx)
        return AuxTreeView(r, (dr - 1).bit_length(), dr,
                           {j - 1: y for j, y in kids},
                           {y: _tsize(y, ctx) for _, y in kids})

    return s.cached(("aux", r), compute)


def _aux_locate(u: int, r: int, ctx: K2Context) -> AuxNode:
    view = _aux_view(r, ctx)
    slot = next(sl for sl, y in view.slots.items() if y == u)
    L = ctx.L
    # weights only shrink going down, so the first light level is found by bisection
    lo, hi = 0, view.depth
    while lo < hi:
        mid = (lo + hi) // 2
        if view.weight(*view.node_above(slot, mid), L) <= L:
            hi = mid
        else:
            lo = mid + 1
    level, off = view.node_above(slot, lo)
    return AuxNode(r, level, off, view.weight(level, off, L))


def _cluster_of(v: int, ctx: K2Context) -> ClusterDescriptor | None:
    s = ctx.session
    key = ("cl", v)
    if key in s.memo:
        return s.memo[key]
    fc = _find_center(v, ctx)
    if fc is None:
        return None
    c, _ = fc
    L = ctx.L
    if _tsize(c, ctx) <= L:
        desc = ClusterDescriptor(WHOLE, tuple(sorted(_subtree(c, ctx))), c)
    elif _tsize(v, ctx) > L:
        desc = ClusterDescriptor(SINGLETON, (v,), c)
    else:
        path = [v]
        while path[-1] != c:
            path.append(_parent(path[-1], ctx))
        lo, hi = 1, len(path) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _tsize(path[mid], ctx) > L:
                hi = mid
            else:
                lo = mid + 1
        r, u = path[lo], path[lo - 1]
        z = _aux_locate(u, r, ctx)
        view = _aux_view(r, ctx)
        members = []
        for slot in view.span(z.level, z.offset):
            y = view.slots.get(slot)
            if y is not None:
                members.extend(_subtree(y, ctx))
        desc = ClusterDescriptor(SUBTREE, tuple(sorted(members)), c, (r, z.level, z.offset))
    for w in desc.members:
        s.memo[("cl", w)] = desc
    return desc


def _boundary(A: ClusterDescriptor, ctx: K2Context) -> tuple[tuple[tuple[int, int], int, int], ...]:
    """(edge, far endpoint, its center) for edges leaving A's cell."""
    s = ctx.session

    def compute():
        out = []
        for x in A.members:
            for _, y in _nbrs_nr(x, ctx):
                cy = _find_center(y, ctx)[0]
                if cy != A.center:
                    out.append((edge_key(x, y), y, cy))
        return tuple(out)

    return s.cached(("bd", A.cid), compute)


def _cen(A: ClusterDescriptor, ctx: K2Context) -> frozenset:
    return ctx.session.cached(("cen", A.cid), lambda: frozenset(cy for _, _, cy in _boundary(A, ctx)))


def _engaged(B: ClusterDescriptor, ctx: K2Context) -> EngagementRecord:
    s = ctx.session

    def compute():
        best = None
        for e, y, cy in _boundary(B, ctx):
            if ctx.marked(cy) and (best is None or e < best[0]):
                best = (e, y)
        if best is None:
            return EngagementRecord(B, None, None)
        return EngagementRecord(B, _cluster_of(best[1], ctx), best[0])

    return s.cached(("eng", B.cid), compute)


def _lowest_cells(A: ClusterDescriptor, C: ClusterDescriptor, ctx: K2Context) -> frozenset:
    s = ctx.session

    def compute():
        common = _cen(A, ctx) & _cen(C, ctx)
        ranked = sorted(common, key=lambda c: cell_rank(c, ctx.tape))
        return frozenset(ranked[:ctx.top])

    return s.cached(("low", A.cid, C.cid), compute)


def _query_k2(u: int, v: int, ctx: K2Context) -> bool:
    fu, fv = _find_center(u, ctx), _find_center(v, ctx)
    if fu is None or fv is None:
        ctx.failures.update(x for x, f in ((u, fu), (v, fv)) if f is None)
        return True
    if fu[0] == fv[0]:
        return _parent(u, ctx) == v or _parent(v, ctx) == u
    Q, W = _cluster_of(u, ctx), _cluster_of(v, ctx)
    e = edge_key(u, v)
    for A, B in ((Q, W), (W, Q)):
        bd = _boundary(A, ctx)
        if ctx.marked(A.center):
            inB = set(B.members)
            if min(f for f, y, _ in bd if y in inB) == e:
                return True
        if min(f for f, _, cy in bd if cy == B.center) != e:
            continue
        cen = _cen(A, ctx)
        if not any(ctx.marked(c) for c in cen):
            return True
        C = _engaged(B, ctx).engaged_with
        if C is not None and B.center in _lowest_cells(A, C, ctx):
            return True
    return False


# Baswana-Sen on the subgraph H of edges with a remote endpoint

def bs_core(adj: dict[int, set[int]], k: int, sampled) -> set[tuple[int, int]]:
    """Edges chosen by the k-round clustering on `adj` (edge rank as weight).

    `sampled(round, center)` is the shared coin for cluster survival.
    """
    E = {v: set(ns) for v, ns in adj.items()}
    for v, ns in adj.items():
        for w in ns:
            E.setdefault(w, set()).add(v)
    cl: dict[int, int | None] = {v: v for v in E}
    kept: set[tuple[int, int]] = set()

    def lightest(v):
        best: dict[int, tuple[int, int]] = {}
        for w in E[v]:
            c, e = cl[w], edge_key(v, w)
            if c not in best or e < best[c]:
                best[c] = e
        return best

    for rnd in range(1, k):
        coin = {}
        for c in set(cl.values()):
            if c is not None:
                coin[c] = sampled(rnd, c)
        new_cl = dict(cl)
        drop: list[tuple[int, int]] = []
        for v in E:
            c = cl[v]
            if c is None or coin[c]:
                continue
            best = lightest(v)
            hits = [(e, c2) for c2, e in best.items() if coin[c2]]
            if not hits:
                kept.update(best.values())
                drop.extend((v, w) for w in E[v])
                new_cl[v] = None
                continue
            e_star, c_star = min(hits)
            kept.add(e_star)
            new_cl[v] = c_star
            gone = {c_star}
            for c2, e in best.items():
                if e < e_star:
                    kept.add(e)
                    gone.add(c2)
            drop.extend((v, w) for w in E[v] if cl[w] in gone)
        for a, b in drop:
            E[a].discard(b)
            E[b].discard(a)
        cl = new_cl
        for v in E:
            if cl[v] is not None:
                same = [w for w in E[v] if cl[w] == cl[v]]
                for w in same:
                    E[v].discard(w)
                    E[w].discard(v)
    for v in E:
        kept.update(lightest(v).values())
    return kept


def _h_nbrs(x: int, ctx: K2Context) -> tuple[int, ...]:
    """Neighbors of x in H: all of them if x is remote, else only remote ones."""
    s = ctx.session

    def compute():
        xs = [s.neighbor(x, j) for j in range(1, s.degree(x) + 1)]
        if _is_remote(x, ctx):
            return tuple(xs)
        return tuple(y for y in xs if _is_remote(y, ctx))

    return s.cached(("hn", x), compute)


def _bs_query(u: int, v: int, ctx: K2Context) -> bool:
    k = ctx.k
    # a vertex's choices depend on the H-edges of vertices fewer than k hops away
    dist = {u: 0, v: 0}
    layer = [u, v]
    adj: dict[int, set[int]] = {}
    for d in range(k):
        nxt = []
        for x in layer:
            ns = _h_nbrs(x, ctx)
            adj[x] = set(ns)
            for y in ns:
                if y not in dist:
                    dist[y] = d + 1
                    nxt.append(y)
        layer = nxt
    kept = bs_core(adj, k, ctx.bs_sampled)
    return edge_key(u, v) in kept


# public operations

def _checked(ctx: K2Context, u: int, v: int) -> None:
    if ctx.strict and not ctx.graph.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")


def is_remote(v: int, ctx: K2Context) -> bool:
    """Does the k-hop neighborhood of v hold fewer than L vertices?"""
    return ctx.session.run(_is_remote, v, ctx)


def find_center(v: int, ctx: K2Context) -> VoronoiAssignment:
    def op():
        if _is_remote(v, ctx):
            raise ValueError(f"vertex {v} is remote")
        fc = _find_center(v, ctx)
        if fc is None:
            ctx.failures.add(v)
            raise ClusteringFailure(f"no center reachable from {v}")
        return VoronoiAssignment(v, fc[0], fc[1], _parent(v, ctx))

    return ctx.session.run(op)


def subtree_heavy(v: int, ctx: K2Context) -> bool:
    """|T(v)| > L."""
    def op():
        if _find_center(v, ctx) is None:
            raise ClusteringFailure(f"no center reachable from {v}")
        return _tsize(v, ctx) > ctx.L

    return ctx.session.run(op)


def aux_view(r: int, ctx: K2Context) -> AuxTreeView:
    return ctx.session.run(_aux_view, r, ctx)


def aux_locate(u: int, r: int, ctx: K2Context) -> AuxNode:
    def op():
        if _parent(u, ctx) != r or u == r:
            raise ValueError(f"{u} is not a child of {r}")
        return _aux_locate(u, r, ctx)

    return ctx.session.run(op)


def cluster_of(v: int, ctx: K2Context) -> ClusterDescriptor:
    def op():
        if _is_remote(v, ctx):
            raise ValueError(f"vertex {v} is remote")
        desc = _cluster_of(v, ctx)
        if desc is None:
            ctx.failures.add(v)
            raise ClusteringFailure(f"no center reachable from {v}")
        return desc

    return ctx.session.run(op)


def adjacent_centers(A: ClusterDescriptor, ctx: K2Context) -> frozenset:
    return ctx.session.run(_cen, A, ctx)


def engaged_with(B: ClusterDescriptor, ctx: K2Context) -> EngagementRecord:
    return ctx.session.run(_engaged, B, ctx)


def query_k2(u: int, v: int, ctx: K2Context) -> bool:
    """Answer for an edge between two non-remote vertices."""
    def op():
        _checked(ctx, u, v)
        if _is_remote(u, ctx) or _is_remote(v, ctx):
            raise ValueError(f"({u}, {v}) has a remote endpoint")
        return _query_k2(u, v, ctx)

    return ctx.session.run(op)


def bs_query(u: int, v: int, ctx: K2Context) -> bool:
    """Baswana-Sen answer for an edge with a remote endpoint."""
    def op():
        _checked(ctx, u, v)
        if not (_is_remote(u, ctx) or _is_remote(v, ctx)):
            raise ValueError(f"({u}, {v}) has no remote endpoint")
        return _bs_query(u, v, ctx)

    return ctx.session.run(op)


def _query_main(u: int, v: int, ctx: K2Context) -> bool:
    _checked(ctx, u, v)
    if _is_remote(u, ctx) or _is_remote(v, ctx):
        return _bs_query(u, v, ctx)
    return _query_k2(u, v, ctx)


def query_main(u: int, v: int, ctx: K2Context) -> bool:
    """Is {u, v} in the O(k^2)-spanner? The query's probes are left in ctx.last_ledger."""
    return ctx.session.run(_query_main, u, v, ctx)


# global reference

@dataclass
class K2Global:
    """Everything the global replay computes, kept for structural checks."""

    remote: list[bool]
    center: list[int | None]
    dist: list[int]
    parent: list[int]
    cluster: list[tuple | None]  # cluster id per vertex
    members: dict
    bs_edges: set
    edges: set


def remote_flags(graph: GraphView, k: int, L: int) -> list[bool]:
    """Layer-complete BFS to depth k; remote iff fewer than L vertices are found."""
    adj = graph.adj_lists()
    out = []
    for v in range(graph.n):
        seen = {v}
        frontier = {v}
        for _ in range(k):
            frontier = {y for x in frontier for y in adj[x]} - seen
            if not frontier:
                break
            seen |= frontier
            if len(seen) >= L:
                break
        out.append(len(seen) < L)
    return out


def bs_global(graph: GraphView, remote: list[bool], k: int, sampled) -> set[tuple[int, int]]:
    """Baswana-Sen over all of H, written edge-centrically."""
    alive = {e for e in graph.edges() if remote[e[0]] or remote[e[1]]}
    verts = sorted({x for e in alive for x in e})
    cl = {v: v for v in verts}
    kept = set()

    def incident():
        inc = {v: [] for v in verts}
        for a, b in alive:
            inc[a].append((a, b))
            inc[b].append((a, b))
        return inc

    def other(e, v):
        return e[1] if e[0] == v else e[0]

    for rnd in range(1, k):
        inc = incident()
        live = {c for c in cl.values() if c is not None}
        chosen = {c for c in live if sampled(rnd, c)}
        nxt = dict(cl)
        dead = set()
        for v in verts:
            if cl[v] is None or cl[v] in chosen:
                continue
            lightest = {}
            for e in sorted(inc[v]):
                lightest.setdefault(cl[other(e, v)], e)
            joined = [(e, c) for c, e in lightest.items() if c in chosen]
            if joined:
                e_star, c_star = min(joined)
                nxt[v] = c_star
                cut = {c for c, e in lightest.items() if e <= e_star}
            else:
                e_star = None
                nxt[v] = None
                cut = set(lightest)
            kept.update(e for c, e in lightest.items() if c in cut)
            dead.update(e for e in inc[v] if cl[other(e, v)] in cut)
        alive -= dead
        cl = nxt
        alive = {e for e in alive if cl[e[0]] is None or cl[e[0]] != cl[e[1]]}
    inc = incident()
    for v in verts:
        lightest = {}
        for e in sorted(inc[v]):
            lightest.setdefault(cl[other(e, v)], e)
        kept.update(lightest.values())
    return kept


def build_spanner_k2_global(graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                            k: int | None = None, ctx: K2Context | None = None,
                            full: bool = False):
    """Spanner edges from a whole-graph replay of the connection rules.

    With full=True returns a K2Global holding the intermediate structure.
    """
    if ctx is None:
        ctx = K2Context(graph, seed, params, k)
    n, k, L = graph.n, ctx.k, ctx.L
    adj = graph.adj_lists()
    remote = [True] * n if ctx.bs_only else remote_flags(graph, k, L)
    out: set[tuple[int, int]] = set()

    # multi-source BFS over non-remote vertices; ties go to the smaller center
    center: list[int | None] = [None] * n
    dist = [-1] * n
    layer = sorted(c for c in ctx.centers if not remote[c])
    for c in layer:
        center[c], dist[c] = c, 0
    d = 0
    while layer:
        d += 1
        found: dict[int, int] = {}
        for x in layer:
            for y in adj[x]:
                if not remote[y] and dist[y] < 0:
                    if y not in found or center[x] < found[y]:
                        found[y] = center[x]
        for y, c in found.items():
            center[y], dist[y] = c, d
        layer = list(found)
    parent = list(range(n))
    kids: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    order = sorted((v for v in range(n) if center[v] is not None), key=lambda v: dist[v])
    for v in order:
        if dist[v] > 0:
            parent[v] = min(y for y in adj[v] if center[y] == center[v] and dist[y] == dist[v] - 1)
            out.add(edge_key(v, parent[v]))
    for v in range(n):
        for j, y in enumerate(adj[v], start=1):
            if center[y] is not None and y != v and parent[y] == v and dist[y] == dist[v] + 1:
                kids[v].append((j, y))
    size = [1 if center[v] is not None else 0 for v in range(n)]
    for v in reversed(order):
        if dist[v] > 0:
            size[parent[v]] += size[v]

    def descendants(v):
        out_, stack = [], [v]
        while stack:
            x = stack.pop()
            out_.append(x)
            stack.extend(y for _, y in kids[x])
        return out_

    # clusters
    cluster: list[tuple | None] = [None] * n
    members: dict[tuple, list[int]] = {}

    def assign(kind, c, vs):
        vs = sorted(vs)
        cid = (c, kind, vs[0])
        members[cid] = vs
        for w in vs:
            cluster[w] = cid

    for c in (v for v in order if dist[v] == 0):
        if size[c] <= L:
            assign(WHOLE, c, descendants(c))
            continue
        heavy = [v for v in descendants(c) if size[v] > L]
        for r in heavy:
            assign(SINGLETON, c, [r])
            light = [(j, y) for j, y in kids[r] if size[y] <= L]
            if not light:
                continue
            depth = (len(adj[r]) - 1).bit_length()
            w = [0] * (1 << depth)
            for j, y in kids[r]:
                w[j - 1] = size[y]
            prefix = [0]
            for x in w:
                prefix.append(prefix[-1] + x)
            done = set()
            for j, y in light:
                for level in range(depth + 1):
                    width = 1 << (depth - level)
                    lo = ((j - 1) // width) * width
                    if prefix[lo + width] - prefix[lo] <= L:
                        break
                if (level, lo) in done:
                    continue
                done.add((level, lo))
                group = []
                for j2, y2 in kids[r]:
                    if lo <= j2 - 1 < lo + width:
                        group.extend(descendants(y2))
                assign(SUBTREE, c, group)

    # centerless components keep their edges
    for v in range(n):
        if not remote[v] and center[v] is None:
            ctx.failures.add(v)
            out.update(edge_key(v, y) for y in adj[v] if not remote[y])

    # cross-cell edges from each cluster, grouped by far cell and far cluster
    marked = {c: ctx.marked(c) for c in set(center) if c is not None}
    to_cell: dict[tuple, dict[int, tuple[int, int]]] = {}
    to_clu: dict[tuple, dict[tuple, tuple[int, int]]] = {}
    for cid, vs in members.items():
        cells, clus = {}, {}
        for x in vs:
            for y in adj[x]:
                cy = center[y]
                if remote[y] or cy is None or cy == cid[0]:
                    continue
                e = edge_key(x, y)
                if cy not in cells or e < cells[cy]:
                    cells[cy] = e
                if cluster[y] not in clus or e < clus[cluster[y]]:
                    clus[cluster[y]] = e
        to_cell[cid], to_clu[cid] = cells, clus

    engaged: dict[tuple, tuple | None] = {}
    for cid in members:
        ys = [(e, b) for b, e in to_clu[cid].items() if marked[b[0]]]
        engaged[cid] = min(ys)[1] if ys else None

    def lowest(a, c):
        common = set(to_cell[a]) & set(to_cell[c])
        return set(sorted(common, key=lambda x: cell_rank(x, ctx.tape))[:ctx.top])

    for a in members:
        cells, clus = to_cell[a], to_clu[a]
        # every cluster reaches each adjacent marked cluster
        for b, e in clus.items():
            if marked[b[0]]:
                out.add(e)
        # clusters with no marked neighbor reach every adjacent cell
        if not any(marked[c] for c in cells):
            out.update(cells.values())
            continue
        for b, e in clus.items():
            c = engaged[b]
            if c is None or cells[b[0]] != e:
                continue
            if b[0] in lowest(a, c):
                out.add(e)

    sampled = lambda rnd, c: ctx.bs_sampled(rnd, c)
    bs = bs_global(graph, remote, k, sampled)
    out |= bs
    if full:
        return K2Global(remote, center, dist, parent, cluster, members, bs, out)
    return out
