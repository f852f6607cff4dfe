"""5-spanners: a global construction and its local implementation on one shared tape.

Vertices are light (deg <= floor n^(1/3)), heavy (deg >= ceil n^(2/3)) or
medium. Heavy vertices join heavy clusters around sampled neighbors; medium
vertices join the clusters of a sampled heavy representative, or, when they
have none ("bad"), light clusters around a second family of centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphView, edge_key
from .probes import ProbeSession, make_session
from .randomness import (AlgParams, RandomTape, bucket_of, cbrt_sq_ceil, class_of, icbrt,
                         log2n, sample_center_family, scaled_size, vertex_sample)

LIGHT, HEAVY, MEDIUM, BAD = "light", "heavy", "medium-with-representative", "bad"


@dataclass(frozen=True)
class VertexRole:
    kind: str
    representative: int | None = None


class Spanner5Context:
    def __init__(self, graph, seed: int = 0, params: AlgParams | None = None,
                 strict: bool = False, shared: bool = False):
        self.session: ProbeSession = make_session(graph, shared)
        self.graph: GraphView = self.session.oracle.graph
        self.n = n = self.graph.n
        self.seed = seed
        self.params = p = params or AlgParams()
        self.tape = RandomTape(seed)
        self.cut_lo = max(1, icbrt(n))
        self.cut_hi = max(1, cbrt_sq_ceil(n))
        lg = log2n(n)
        self.heavy_levels = max(1, math.ceil(lg / 3))
        self.light_levels = max(1, math.ceil(2 * lg / 3))
        self.heavy_family = sample_center_family(n, scaled_size(n, p.c_centers, 1 / 3),
                                                 self.heavy_levels, self.tape, "S1")
        self.light_family = sample_center_family(n, scaled_size(n, p.c_centers, 2 / 3),
                                                 self.light_levels, self.tape, "S2")
        self.rep_sample = max(1, math.ceil(p.c_rep_sample * lg))
        self.strict = strict
        self.failures: set[int] = set()

    @property
    def last_ledger(self):
        return self.session.last

    def heavy_class(self, d: int) -> int:
        # deg == cut_hi counts as heavy and sits in class 1
        return class_of(d, self.cut_hi) if d > self.cut_hi else 1

    def light_class(self, d: int) -> int:
        return class_of(d, self.cut_lo)


def _dominates(du, u, dv, v):
    return du > dv or (du == dv and u > v)


# per-vertex derived values, memoized in the session

def _rep(v: int, dv: int, ctx: Spanner5Context) -> tuple[int, int] | None:
    """(representative, its degree) of a medium vertex, or None."""
    s = ctx.session

    def compute():
        hi = ctx.cut_hi
        best = None
        for j in sorted(set(vertex_sample(v, dv, ctx.rep_sample, ctx.tape, "R"))):
            w = s.neighbor(v, j)
            dw = s.degree(w)
            if dw >= hi and (best is None or w < best[0]):
                best = (w, dw)
        return best

    return s.cached(("rep", v), compute)


def _hcenters(v: int, dv: int, ctx: Spanner5Context) -> tuple[int, ...]:
    s = ctx.session

    def compute():
        adj = s.adjacency
        return tuple(x for x in ctx.heavy_family.level(ctx.heavy_class(dv)) if adj(v, x) is not None)

    return s.cached(("hc", v), compute)


def _lcenters(v: int, dv: int, ctx: Spanner5Context) -> tuple[int, ...]:
    """Non-heavy neighbors of a bad vertex in its light-family level."""
    s = ctx.session

    def compute():
        c = ctx.light_class(dv)
        fam = ctx.light_family
        if not fam.level(c):
            return ()
        out = []
        for j in range(1, dv + 1):
            y = s.neighbor(v, j)
            if fam.contains(c, y) and s.degree(y) < ctx.cut_hi:
                out.append(y)
        return tuple(sorted(out))

    return s.cached(("lc", v), compute)


def _role(v: int, dv: int, ctx: Spanner5Context) -> VertexRole:
    if dv <= ctx.cut_lo:
        return VertexRole(LIGHT)
    if dv >= ctx.cut_hi:
        return VertexRole(HEAVY)
    r = _rep(v, dv, ctx)
    return VertexRole(MEDIUM, r[0]) if r else VertexRole(BAD)


def _heavy_clusters(v: int, dv: int, ctx: Spanner5Context) -> list[tuple[int, int]]:
    """Heavy clusters (center, level) that v belongs to."""
    if dv <= ctx.cut_lo:
        return []
    if dv >= ctx.cut_hi:
        return [(x, ctx.heavy_class(dv)) for x in _hcenters(v, dv, ctx)]
    r = _rep(v, dv, ctx)
    if r is None:
        return []
    return [(x, ctx.heavy_class(r[1])) for x in _hcenters(r[0], r[1], ctx)]


def _light_clusters(v: int, dv: int, ctx: Spanner5Context) -> list[tuple[int, int]]:
    if not ctx.cut_lo < dv < ctx.cut_hi or _rep(v, dv, ctx) is not None:
        return []
    c = ctx.light_class(dv)
    return [(x, c) for x in _lcenters(v, dv, ctx)]


def _in_heavy_cluster(y: int, dy: int, x: int, c: int, ctx: Spanner5Context) -> bool:
    s = ctx.session
    if dy >= ctx.cut_hi:
        return ctx.heavy_class(dy) == c and s.adjacency(x, y) is not None
    if dy <= ctx.cut_lo:
        return False
    r = _rep(y, dy, ctx)
    if r is None or ctx.heavy_class(r[1]) != c:
        return False
    return s.adjacency(x, r[0]) is not None


def _eligible(dw, w, db, b, ctx) -> bool:
    """May w stand for its heavy cluster in the neighbor list of b?"""
    return db < ctx.cut_hi or _dominates(dw, w, db, b)


def _first_eligible(b: int, db: int, x: int, c: int, lo: int, hi: int, ctx,
                    stop: bool = True) -> int | None:
    """Smallest j in [lo, hi) with N(b)[j] eligible for b and in heavy cluster (x, c).

    With stop=False the whole range is read even after a hit.
    """
    s = ctx.session
    first = None
    for j in range(lo, hi):
        y = s.neighbor(b, j)
        if y is None:
            break
        dy = s.degree(y)
        if _eligible(dy, y, db, b, ctx) and _in_heavy_cluster(y, dy, x, c, ctx) and first is None:
            first = j
            if stop:
                break
    return first


def _light_members(x: int, c: int, ctx: Spanner5Context) -> tuple[int, ...]:
    """Members of light cluster (x, c) in order of their index in N(x)."""
    s = ctx.session

    def compute():
        lo, hi = ctx.cut_lo, ctx.cut_hi
        dx = s.degree(x)
        out = []
        for j in range(1, dx + 1):
            w = s.neighbor(x, j)
            dw = s.degree(w)
            if lo < dw < hi and ctx.light_class(dw) == c and _rep(w, dw, ctx) is None:
                out.append(w)
        return tuple(out)

    return s.cached(("lm", x, c), compute)


def _block(w: int, x: int, c: int, ctx) -> tuple[int, tuple[int, ...]]:
    members = _light_members(x, c, ctx)
    rank = members.index(w)
    size = ctx.cut_lo
    b = rank // size
    return b + 1, members[b * size:(b + 1) * size]


def _min_rank_edge(A: tuple[int, ...], B: tuple[int, ...], ctx) -> tuple[int, int] | None:
    """Minimum-rank edge of E(A, B), probing candidate pairs in rank order."""
    s = ctx.session
    cands = sorted({edge_key(a, b) for a in A for b in B if a != b})
    for lo, hi in cands:
        if s.adjacency(lo, hi) is not None:
            return (lo, hi)
    return None


def _nbr_set(a: int, ctx) -> frozenset:
    s = ctx.session

    def compute():
        nbr = s.neighbor
        return frozenset(nbr(a, j) for j in range(1, s.degree(a) + 1))

    return s.cached(("ns", a), compute)


def _min_rank_edge_by_lists(A, B, ctx) -> tuple[int, int] | None:
    """Same answer as _min_rank_edge, found by walking the members' neighbor lists."""
    Bs = set(B)
    best = None
    for a in A:
        hit = _nbr_set(a, ctx) & Bs
        if hit:
            # the smallest partner gives a's lowest-ranked edge into B
            e = edge_key(a, min(hit))
            if best is None or e < best:
                best = e
    return best


# public operations

def representative(v: int, ctx: Spanner5Context) -> int | None:
    s = ctx.session

    def op():
        dv = s.degree(v)
        if not ctx.cut_lo < dv < ctx.cut_hi:
            raise ValueError(f"vertex {v} is not medium (degree {dv})")
        r = _rep(v, dv, ctx)
        return r[0] if r else None

    return s.run(op)


def role_of(v: int, ctx: Spanner5Context) -> VertexRole:
    s = ctx.session
    return s.run(lambda: _role(v, s.degree(v), ctx))


def heavy_centers(v: int, ctx: Spanner5Context) -> tuple[int, ...]:
    s = ctx.session

    def op():
        dv = s.degree(v)
        if dv < ctx.cut_hi:
            raise ValueError(f"vertex {v} is not heavy")
        return _hcenters(v, dv, ctx)

    return s.run(op)


def light_centers(v: int, ctx: Spanner5Context) -> tuple[int, ...]:
    s = ctx.session

    def op():
        dv = s.degree(v)
        if _role(v, dv, ctx).kind != BAD:
            raise ValueError(f"vertex {v} is not bad")
        return _lcenters(v, dv, ctx)

    return s.run(op)


def light_subset_index(x: int, w: int, ctx: Spanner5Context) -> int:
    """1-based block of w among the members of x's light cluster (blocks of floor n^(1/3))."""
    s = ctx.session

    def op():
        dw = s.degree(w)
        if not ctx.cut_lo < dw < ctx.cut_hi:
            raise ValueError(f"vertex {w} is not in a light cluster")
        c = ctx.light_class(dw)
        if w not in _light_members(x, c, ctx):
            raise ValueError(f"vertex {w} is not in the light cluster of {x}")
        return _block(w, x, c, ctx)[0]

    return s.run(op)


def _query5(u: int, v: int, ctx: Spanner5Context) -> bool:
    s = ctx.session
    if ctx.strict and not ctx.graph.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    du, dv = s.degree(u), s.degree(v)
    lo, hi = ctx.cut_lo, ctx.cut_hi
    if du <= lo or dv <= lo:
        return True
    ends = ((u, du, v, dv), (v, dv, u, du))
    # edges that form clusters: heavy centers, representatives, light centers
    for x, dx, y, dy in ends:
        if dx >= hi:
            if ctx.heavy_family.contains(ctx.heavy_class(dx), y):
                return True
        else:
            r = _rep(x, dx, ctx)
            if r is not None:
                if r[0] == y:
                    return True
            elif dy < hi and ctx.light_family.contains(ctx.light_class(dx), y):
                return True
    hcl = {u: _heavy_clusters(u, du, ctx), v: _heavy_clusters(v, dv, ctx)}
    lcl = {u: _light_clusters(u, du, ctx), v: _light_clusters(v, dv, ctx)}
    for x in (u, v):
        if not hcl[x] and not lcl[x]:
            ctx.failures.add(x)
            return True
    # first eligible member of a heavy cluster in its bucket of the other list
    for w, dw, b, db in ends:
        if not hcl[w] or not _eligible(dw, w, db, b, ctx):
            continue
        i = s.adjacency(b, w)
        bk = bucket_of(i, hi)
        start = (bk - 1) * hi + 1
        for x, c in hcl[w]:
            if s.shared:
                first = s.cached(("f5", b, bk, x, c), _first_eligible, b, db, x, c, start, bk * hi + 1, ctx)
                hit = first is not None and first < i
            else:
                hit = _first_eligible(b, db, x, c, start, i, ctx, ctx.params.early_stop) is not None
            if not hit:
                return True
    # minimum-rank edge between blocks of two distinct light clusters
    if lcl[u] and lcl[v]:
        e = edge_key(u, v)
        for cu in lcl[u]:
            _, A = _block(u, cu[0], cu[1], ctx)
            for cv in lcl[v]:
                if cu == cv:
                    continue
                _, B = _block(v, cv[0], cv[1], ctx)
                if s.shared:
                    key = ("mre",) + ((A, B) if A <= B else (B, A))
                    best = s.cached(key, _min_rank_edge_by_lists, A, B, ctx)
                else:
                    best = _min_rank_edge(A, B, ctx)
                if best == e:
                    return True
    return False


def query5(u: int, v: int, ctx: Spanner5Context) -> bool:
    """Is {u, v} in the 5-spanner? The query's probes are left in ctx.last_ledger."""
    return ctx.session.run(_query5, u, v, ctx)


def build_spanner5_global(graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                          ctx: Spanner5Context | None = None) -> set[tuple[int, int]]:
    """Global construction over full neighbor lists, sharing only the tape and centers."""
    if ctx is None:
        ctx = Spanner5Context(graph, seed, params)
    n = graph.n
    adj = graph.adj_lists()
    deg = graph.degree_list()
    lo, hi = ctx.cut_lo, ctx.cut_hi
    H1, H2 = ctx.heavy_family, ctx.light_family
    out: set[tuple[int, int]] = set()

    rep: list[int | None] = [None] * n
    hcent: list[list[int]] = [[] for _ in range(n)]
    lcent: list[list[int]] = [[] for _ in range(n)]
    hcl: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for v in range(n):
        d = deg[v]
        if d >= hi:
            c = ctx.heavy_class(d)
            nb = set(adj[v])
            hcent[v] = [x for x in H1.level(c) if x in nb]
            hcl[v] = [(x, c) for x in hcent[v]]
        elif d > lo:
            picks = [adj[v][j - 1] for j in vertex_sample(v, d, ctx.rep_sample, ctx.tape, "R")]
            heavy = [w for w in picks if deg[w] >= hi]
            rep[v] = min(heavy) if heavy else None
    for v in range(n):
        d = deg[v]
        if lo < d < hi:
            if rep[v] is not None:
                r = rep[v]
                hcl[v] = [(x, ctx.heavy_class(deg[r])) for x in hcent[r]]
            else:
                c = ctx.light_class(d)
                lcent[v] = sorted(y for y in adj[v] if H2.contains(c, y) and deg[y] < hi)

    unclustered = [deg[v] > lo and not hcl[v] and not lcent[v] for v in range(n)]
    ctx.failures.update(v for v in range(n) if unclustered[v])
    for v in range(n):
        if deg[v] <= lo or unclustered[v]:
            out.update(edge_key(v, y) for y in adj[v])
        if deg[v] >= hi:
            out.update(edge_key(v, x) for x in hcent[v])
        elif deg[v] > lo:
            if rep[v] is not None:
                out.add(edge_key(v, rep[v]))
            else:
                out.update(edge_key(v, x) for x in lcent[v])

    # bucketed connections to heavy clusters
    for b in range(n):
        if deg[b] <= lo:
            continue
        seen = set()
        for j, w in enumerate(adj[b], start=1):
            if not hcl[w] or deg[w] <= lo:
                continue
            if not (deg[b] < hi or _dominates(deg[w], w, deg[b], b)):
                continue
            bk = (j - 1) // hi
            for key in hcl[w]:
                if (bk, key) not in seen:
                    seen.add((bk, key))
                    out.add(edge_key(b, w))

    # light clusters split into blocks by index in the center's list
    members: dict[tuple[int, int], list[int]] = {}
    block_of: dict[tuple[int, tuple[int, int]], int] = {}

    def blocks(key):
        if key not in members:
            x, c = key
            ms = [w for w in adj[x] if lo < deg[w] < hi and rep[w] is None and ctx.light_class(deg[w]) == c]
            members[key] = ms
            for r, w in enumerate(ms):
                block_of[(w, key)] = r // lo
        return members[key]

    # lightest edge between every pair of blocks, by sorting (pair, rank) keys
    tag_of: dict[tuple, int] = {}
    tag_cluster: list[int] = []
    mem_v, mem_t = [], []
    for v in range(n):
        if lcent[v]:
            c = ctx.light_class(deg[v])
            for x in lcent[v]:
                blocks((x, c))
                t = tag_of.setdefault(((x, c), block_of[(v, (x, c))]), len(tag_cluster))
                if t == len(tag_cluster):
                    tag_cluster.append(x * (n + 1) + c)
                mem_v.append(v)
                mem_t.append(t)
    out.update(_block_pair_minima(graph, np.array(mem_v, dtype=np.int64),
                                  np.array(mem_t, dtype=np.int64),
                                  np.array(tag_cluster, dtype=np.int64)))
    return out


def _expand(owner: np.ndarray, start: np.ndarray, cnt: np.ndarray, mem_t: np.ndarray):
    """Pair every row with each tag of its owner vertex: (row index, tag)."""
    c = cnt[owner]
    rows = np.repeat(np.arange(owner.size), c)
    first = np.repeat(start[owner] - (np.cumsum(c) - c), c)
    return rows, mem_t[first + np.arange(rows.size)]


def _first_per_key(key: np.ndarray, rank: np.ndarray, scale: int):
    """For each distinct key, the smallest rank; returns (keys, ranks)."""
    packed = np.sort(key * scale + rank)
    k = packed // scale
    keep = np.ones(k.size, dtype=bool)
    keep[1:] = k[1:] != k[:-1]
    return k[keep], packed[keep] % scale


def _block_pair_minima(graph: GraphView, mem_v, mem_t, tag_cluster) -> set[tuple[int, int]]:
    n = graph.n
    if mem_v.size == 0:
        return set()
    cnt = np.bincount(mem_v, minlength=n)
    start = np.zeros(n, dtype=np.int64)
    start[1:] = np.cumsum(cnt)[:-1]
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
    dst = graph.indices.astype(np.int64)
    sel = (cnt[src] > 0) & (cnt[dst] > 0)
    src, dst = src[sel], dst[sel]
    R = n * n
    nt = tag_cluster.size
    if nt * max(nt, n) * R >= 2 ** 62:
        raise OverflowError("graph too large for packed keys")
    rank = np.minimum(src, dst) * n + np.maximum(src, dst)
    # lightest edge from each block to each outside vertex
    rows, ta = _expand(src, start, cnt, mem_t)
    key, r = _first_per_key(ta * n + dst[rows], rank[rows], R)
    ta, y = key // n, key % n
    # then fan out over the blocks of that vertex
    rows, tb = _expand(y, start, cnt, mem_t)
    ta, r = ta[rows], r[rows]
    ok = tag_cluster[ta] != tag_cluster[tb]
    ta, tb, r = ta[ok], tb[ok], r[ok]
    lo, hi = np.minimum(ta, tb), np.maximum(ta, tb)
    _, r = _first_per_key(lo * nt + hi, r, R)
    return {(int(x // n), int(x % n)) for x in r}
