"""Immutable undirected graphs, edge keys, generators and edge-list I/O."""

from __future__ import annotations

import hashlib
import io
import math
import os
from typing import Iterable, Iterator, NamedTuple

import numpy as np


class GraphFormatError(ValueError):
    """Raised by load_graph on malformed input; the message names the line."""

    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class EdgeKey(NamedTuple):
    """Canonical undirected edge, lo < hi. Tuple order is the edge rank order."""

    lo: int
    hi: int

    @classmethod
    def of(cls, u: int, v: int) -> "EdgeKey":
        if u == v:
            raise ValueError(f"self-loop {u}")
        return cls(u, v) if u < v else cls(v, u)


def edge_key(u: int, v: int) -> tuple[int, int]:
    """Plain-tuple canonical form, used on hot paths."""
    return (u, v) if u < v else (v, u)


class GraphView:
    """Simple undirected graph on vertices 0..n-1 in CSR form.

    Neighbor order is fixed at construction; N(v)[i] (1-based) is
    ``indices[indptr[v] + i - 1]``. Arrays are read-only.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray,
                 sorted_rows: bool = False, validate: bool = True):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64 if n > 2**31 - 1 else np.int32)
        if self.indptr.shape != (self.n + 1,):
            raise ValueError("indptr must have n + 1 entries")
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        self.sorted_rows = sorted_rows
        self.m = int(self.indices.shape[0]) // 2
        self._lists: list[list[int]] | None = None
        self._degs: list[int] | None = None
        if validate:
            self._validate()

    # construction

    @classmethod
    def from_adjacency(cls, adj: list[list[int]]) -> "GraphView":
        n = len(adj)
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in adj])
        flat = [w for a in adj for w in a]
        g = cls(n, indptr, np.asarray(flat, dtype=np.int64),
                sorted_rows=all(a == sorted(a) for a in adj))
        g._lists = [list(a) for a in adj]
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "GraphView":
        """Neighbor lists follow first-occurrence order of the edge sequence."""
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        return cls.from_adjacency(adj)

    def _validate(self) -> None:
        n = self.n
        if self.indices.shape[0] % 2:
            raise ValueError("odd number of adjacency entries")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise ValueError("neighbor id out of range")
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.indptr))
        cols = self.indices.astype(np.int64)
        if np.any(rows == cols):
            raise ValueError("self-loop present")
        fwd = rows * n + cols
        if np.unique(fwd).size != fwd.size:
            raise ValueError("duplicate neighbor present")
        bwd = np.sort(cols * n + rows)
        if not np.array_equal(np.sort(fwd), bwd):
            raise ValueError("adjacency is not symmetric")

    # access (no probe accounting; LCA code goes through probes.AdjacencyOracle)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def adj_lists(self) -> list[list[int]]:
        """Neighbor lists as Python lists (cached)."""
        if self._lists is None:
            ind = self.indices.tolist()
            ptr = self.indptr.tolist()
            self._lists = [ind[ptr[v]:ptr[v + 1]] for v in range(self.n)]
        return self._lists

    def degree_list(self) -> list[int]:
        if self._degs is None:
            self._degs = np.diff(self.indptr).tolist()
        return self._degs

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        if self.sorted_rows:
            k = int(np.searchsorted(row, v))
            return k < row.size and int(row[k]) == v
        return bool(np.any(row == v))

    def edge_array(self) -> np.ndarray:
        """All edges as an (m, 2) array of (lo, hi), sorted by edge rank."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        cols = self.indices.astype(np.int64)
        keep = rows < cols
        out = np.stack([rows[keep], cols[keep]], axis=1)
        order = np.lexsort((out[:, 1], out[:, 0]))
        return out[order]

    def edges(self) -> Iterator[tuple[int, int]]:
        for lo, hi in self.edge_array().tolist():
            yield lo, hi

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edge_array().tolist()))

    def __repr__(self) -> str:
        return f"GraphView(n={self.n}, m={self.m})"


def _csr_from_upper_pairs(n: int, lo: np.ndarray, hi: np.ndarray) -> GraphView:
    """Build a CSR graph with id-sorted rows from pairs lo < hi sorted by (lo, hi)."""
    return _csr_from_chunks(n, [(lo, hi)])


def _runs_rank(sorted_keys: np.ndarray) -> np.ndarray:
    """Position of each entry within its run of equal keys."""
    idx = np.arange(sorted_keys.size, dtype=np.int64)
    if sorted_keys.size == 0:
        return idx
    start = np.ones(sorted_keys.size, dtype=bool)
    start[1:] = sorted_keys[1:] != sorted_keys[:-1]
    first = np.maximum.accumulate(np.where(start, idx, 0))
    return idx - first


def _csr_from_chunks(n: int, chunks: list[tuple[np.ndarray, np.ndarray]]) -> GraphView:
    """CSR from pair chunks that are jointly sorted by (lo, hi), one chunk at a time."""
    deg = np.zeros(n, dtype=np.int64)
    low_cnt = np.zeros(n, dtype=np.int64)
    for lo, hi in chunks:
        deg += np.bincount(lo, minlength=n)
        low_cnt += np.bincount(hi, minlength=n)
    deg += low_cnt
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    dtype = np.int32 if n < 2**31 else np.int64
    indices = np.empty(indptr[-1], dtype=dtype)
    # Row v holds its smaller neighbors first (pairs with hi == v, ascending lo),
    # then its larger neighbors (pairs with lo == v, ascending hi).
    fill_low = indptr[:-1].copy()
    fill_up = indptr[:-1] + low_cnt
    for lo, hi in chunks:
        order = np.argsort(hi, kind="stable")
        hs = hi[order]
        indices[fill_low[hs] + _runs_rank(hs)] = lo[order]
        del order, hs
        fill_low += np.bincount(hi, minlength=n)
        indices[fill_up[lo] + _runs_rank(lo)] = hi
        fill_up += np.bincount(lo, minlength=n)
    return GraphView(n, indptr, indices, sorted_rows=True, validate=False)


def _model_rng(model: str, params: tuple, seed: int) -> np.random.Generator:
    tag = hashlib.blake2b(f"{model}|{params}".encode(), digest_size=8).digest()
    return np.random.default_rng([int(seed) & (2**64 - 1), int.from_bytes(tag, "little")])


def _decode_pairs(n: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over {(i, j): i < j} (row-major) to pairs."""
    b = 2.0 * n - 1.0
    i = np.floor((b - np.sqrt(b * b - 8.0 * t.astype(np.float64))) / 2.0).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # float rounding may be off by one near row boundaries
    over = start > t
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    under = t >= nxt
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = t - start + i + 1
    return i, j


# pair indices drawn per step; part of the stream definition, so fixed
GNP_CHUNK = 1 << 21


def gnp(n: int, p: float, seed: int = 0) -> GraphView:
    """Erdos-Renyi G(n, p) by geometric skipping over the pair index."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ValueError(f"infeasible gnp parameters n={n}, p={p}")
    total = n * (n - 1) // 2
    if p == 0.0 or total == 0:
        return GraphView(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int32),
                         sorted_rows=True, validate=False)
    dtype = np.int32 if n < 2**31 else np.int64
    rng = _model_rng("gnp", (n, p), seed)
    chunks = []
    pos = -1
    while pos < total - 1:
        if p == 1.0:
            t = np.arange(pos + 1, min(total, pos + 1 + GNP_CHUNK), dtype=np.int64)
        else:
            t = np.cumsum(rng.geometric(p, size=GNP_CHUNK), dtype=np.int64) + pos
            last = int(t[-1])
            t = t[t < total]
        if t.size == 0:
            break
        i, j = _decode_pairs(n, t)
        chunks.append((i.astype(dtype), j.astype(dtype)))
        pos = int(t[-1]) if p == 1.0 else last
    return _csr_from_chunks(n, chunks)


def regular_ish(n: int, d: int, seed: int = 0) -> GraphView:
    """Configuration-model graph with target degree d; loops and repeats dropped."""
    if n < 0 or d < 0 or (n > 0 and d > n - 1):
        raise ValueError(f"infeasible regular-ish parameters n={n}, d={d}")
    rng = _model_rng("regular", (n, d), seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.shuffle(stubs)
    if stubs.size % 2:
        stubs = stubs[:-1]
    a, b = stubs[0::2], stubs[1::2]
    keep = a != b
    lo = np.minimum(a, b)[keep]
    hi = np.maximum(a, b)[keep]
    key = np.unique(lo * n + hi)
    return _csr_from_upper_pairs(n, key // n, key % n)


def planted_hubs(n: int, p: float, hubs: int, q: float, seed: int = 0) -> GraphView:
    """G(n, p) plus `hubs` random vertices each joined to every other vertex w.p. q."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0) or hubs < 0 or hubs > n:
        raise ValueError(f"infeasible planted-hubs parameters n={n}, p={p}, hubs={hubs}, q={q}")
    base = gnp(n, p, seed)
    rng = _model_rng("hubs", (n, p, hubs, q), seed)
    centers = rng.choice(n, size=hubs, replace=False) if hubs else np.zeros(0, dtype=np.int64)
    e = base.edge_array()
    extra = []
    for h in centers.tolist():
        others = np.flatnonzero(rng.random(n) < q)
        others = others[others != h]
        extra.append(np.stack([np.minimum(others, h), np.maximum(others, h)], axis=1))
    allp = np.concatenate([e] + extra) if extra else e
    key = np.unique(allp[:, 0] * n + allp[:, 1])
    return _csr_from_upper_pairs(n, key // n, key % n)


def gen_graph(model: str, params: dict | tuple, seed: int = 0) -> GraphView:
    """Dispatch to a generator. Models: gnp, regular-ish, planted-hubs."""
    if isinstance(params, dict):
        kw = params
    else:
        names = {"gnp": ("n", "p"), "regular-ish": ("n", "d"),
                 "planted-hubs": ("n", "p", "hubs", "q")}
        if model not in names:
            raise ValueError(f"unknown graph model {model!r}")
        if len(params) != len(names[model]):
            raise ValueError(f"{model} expects parameters {names[model]}")
        kw = dict(zip(names[model], params))
    if model == "gnp":
        return gnp(int(kw["n"]), float(kw["p"]), seed)
    if model == "regular-ish":
        return regular_ish(int(kw["n"]), int(kw["d"]), seed)
    if model == "planted-hubs":
        return planted_hubs(int(kw["n"]), float(kw["p"]), int(kw["hubs"]), float(kw["q"]), seed)
    raise ValueError(f"unknown graph model {model!r}")


def parse_gen_spec(spec: str, seed: int = 0) -> GraphView:
    """Parse 'gnp:<n>:<p>', 'regular:<n>:<d>' or 'hubs:<n>:<p>:<hubs>:<q>'."""
    parts = spec.split(":")
    alias = {"gnp": "gnp", "regular": "regular-ish", "regular-ish": "regular-ish",
             "hubs": "planted-hubs", "planted-hubs": "planted-hubs"}
    if parts[0] not in alias:
        raise ValueError(f"unknown generator {parts[0]!r}")
    try:
        vals = tuple(float(x) if "." in x or "e" in x.lower() else int(x) for x in parts[1:])
    except ValueError as exc:
        raise ValueError(f"bad generator spec {spec!r}") from exc
    return gen_graph(alias[parts[0]], vals, seed)


# edge-list I/O

def _open_text(source) -> tuple[io.TextIOBase, bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8"), False


def load_graph(source) -> GraphView:
    """Read the edge-list format: header 'n m', then m lines 'u v'; '#' comments."""
    fh, close = _open_text(source)
    try:
        header = None
        adj: list[list[int]] = []
        seen: set[tuple[int, int]] = set()
        n = m = 0
        count = 0
        lineno = 0
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphFormatError(lineno, f"expected two integers, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(lineno, f"expected two integers, got {line!r}") from None
            if header is None:
                if a < 0 or b < 0:
                    raise GraphFormatError(lineno, "negative header value")
                header = lineno
                n, m = a, b
                adj = [[] for _ in range(n)]
                continue
            if count >= m:
                raise GraphFormatError(lineno, f"more than the declared {m} edges")
            if a < 0 or b < 0 or a >= n or b >= n:
                raise GraphFormatError(lineno, f"vertex id out of range 0..{n - 1}")
            if a == b:
                raise GraphFormatError(lineno, f"self-loop at vertex {a}")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise GraphFormatError(lineno, f"duplicate edge {key[0]} {key[1]}")
            seen.add(key)
            adj[a].append(b)
            adj[b].append(a)
            count += 1
        if header is None:
            raise GraphFormatError(1, "missing 'n m' header")
        if count != m:
            raise GraphFormatError(lineno if count else header, f"declared {m} edges, found {count}")
        return GraphView.from_adjacency(adj)
    finally:
        if close:
            fh.close()


def save_graph(graph: GraphView, dest, edges: Iterable[tuple[int, int]] | None = None) -> None:
    """Write `graph` (or the given edge subset on its vertex set) in edge-list format."""
    arr = graph.edge_array() if edges is None else np.asarray(sorted(edge_key(*e) for e in edges),
                                                             dtype=np.int64).reshape(-1, 2)
    text = f"{graph.n} {arr.shape[0]}\n"
    body = "\n".join(f"{a} {b}" for a, b in arr.tolist())
    payload = text + body + ("\n" if body else "")
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(payload)
    elif isinstance(dest, io.TextIOBase):
        dest.write(payload)
    else:
        dest.write(payload.encode("utf-8"))
