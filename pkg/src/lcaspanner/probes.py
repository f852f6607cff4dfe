"""The adjacency-list probe oracle and per-query probe accounting."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .graph import GraphView

# Above this many adjacency entries the oracle answers from the numpy arrays
# instead of materializing Python lists.
LIST_BACKEND_LIMIT = 8_000_000


@dataclass
class ProbeLedger:
    """Probe counters for one query, or a reduction over many queries."""

    degree_probes: int = 0
    neighbor_probes: int = 0
    adjacency_probes: int = 0
    per_query_max: int = 0
    queries: int = 0

    @property
    def total(self) -> int:
        return self.degree_probes + self.neighbor_probes + self.adjacency_probes

    def merge(self, other: "ProbeLedger") -> "ProbeLedger":
        """Combine two ledgers (explicit reduction step)."""
        return ProbeLedger(
            self.degree_probes + other.degree_probes,
            self.neighbor_probes + other.neighbor_probes,
            self.adjacency_probes + other.adjacency_probes,
            max(self.per_query_max, other.per_query_max),
            self.queries + other.queries,
        )

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.degree_probes, self.neighbor_probes, self.adjacency_probes)


class AdjacencyOracle:
    """Degree, neighbor and adjacency probes on a GraphView, each counted once."""

    def __init__(self, graph: GraphView, backend: str | None = None):
        self.graph = graph
        self.n = graph.n
        self.deg_calls = 0
        self.nbr_calls = 0
        self.adj_calls = 0
        if backend is None:
            backend = "list" if graph.indices.size <= LIST_BACKEND_LIMIT else "array"
        self.backend = backend
        self._deg = graph.degree_list()
        if backend == "list":
            self._adj = graph.adj_lists()
        else:
            self._ptr = graph.indptr
            self._ind = graph.indices
            self._ptr_l = graph.indptr.tolist()
        self._pos: dict[int, dict[int, int]] = {}

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex id {v} out of range 0..{self.n - 1}")

    def degree(self, v: int) -> int:
        if not 0 <= v < self.n:
            self._check(v)
        self.deg_calls += 1
        return self._deg[v]

    def neighbor(self, v: int, i: int) -> int | None:
        """N(v)[i] with 1-based i, or None when i > deg(v)."""
        if not 0 <= v < self.n:
            self._check(v)
        if i < 1:
            raise ValueError("neighbor index must be >= 1")
        self.nbr_calls += 1
        if i > self._deg[v]:
            return None
        if self.backend == "list":
            return self._adj[v][i - 1]
        return int(self._ind[self._ptr_l[v] + i - 1])

    def adjacency(self, u: int, v: int) -> int | None:
        """The i with N(u)[i] = v, or None if not adjacent."""
        if not 0 <= u < self.n:
            self._check(u)
        if not 0 <= v < self.n:
            self._check(v)
        self.adj_calls += 1
        return self._index_of(u, v)

    def _index_of(self, u: int, v: int) -> int | None:
        if self.graph.sorted_rows:
            if self.backend == "list":
                row = self._adj[u]
                k = bisect_left(row, v)
                return k + 1 if k < len(row) and row[k] == v else None
            lo, hi = self._ptr_l[u], self._ptr_l[u + 1]
            k = int(np.searchsorted(self._ind[lo:hi], v))
            return k + 1 if lo + k < hi and int(self._ind[lo + k]) == v else None
        pos = self._pos.get(u)
        if pos is None:
            row = self._adj[u] if self.backend == "list" else self.graph.neighbors(u).tolist()
            pos = {w: k + 1 for k, w in enumerate(row)}
            self._pos[u] = pos
        return pos.get(v)

    def counts(self) -> tuple[int, int, int]:
        return (self.deg_calls, self.nbr_calls, self.adj_calls)


class CountingOracle:
    """Transparent wrapper that tallies every call made through it (for audits)."""

    def __init__(self, inner):
        self.inner = inner
        self.n = inner.n
        self.graph = inner.graph
        self.calls = {"degree": 0, "neighbor": 0, "adjacency": 0}

    def degree(self, v):
        self.calls["degree"] += 1
        return self.inner.degree(v)

    def neighbor(self, v, i):
        self.calls["neighbor"] += 1
        return self.inner.neighbor(v, i)

    def adjacency(self, u, v):
        self.calls["adjacency"] += 1
        return self.inner.adjacency(u, v)

    def counts(self):
        return self.inner.counts()


@dataclass
class ProbeSession:
    """Runs queries against an oracle, one ledger per query.

    With ``shared=False`` the memo of derived values (centers, representatives,
    BFS results) lives for one query only, so each query's ledger counts exactly
    the probes an isolated run of that query makes. With ``shared=True`` the
    memo persists across queries: answers are identical but ledgers only count
    probes not already paid for by earlier queries.
    """

    oracle: Any
    shared: bool = False
    cumulative: ProbeLedger = field(default_factory=ProbeLedger)
    last: ProbeLedger = field(default_factory=ProbeLedger)

    def __post_init__(self):
        self.memo: dict = {}
        self.degree = self.oracle.degree
        self.neighbor = self.oracle.neighbor
        self.adjacency = self.oracle.adjacency
        self._start = (0, 0, 0)
        self._depth = 0

    def _counts(self) -> tuple[int, int, int]:
        o = self.oracle
        if isinstance(o, CountingOracle):
            o = o.inner
        return (o.deg_calls, o.nbr_calls, o.adj_calls)

    def cached(self, key, fn: Callable, *args):
        """memo[key] = fn(*args), computed at most once per memo lifetime."""
        memo = self.memo
        try:
            return memo[key]
        except KeyError:
            val = fn(*args)
            memo[key] = val
            return val

    def run(self, fn: Callable, *args):
        """Run one query; returns its answer and leaves its ledger in `last`."""
        if self._depth:
            return fn(*args)
        if not self.shared:
            self.memo = {}
        start = self._counts()
        self._depth = 1
        try:
            ans = fn(*args)
        finally:
            self._depth = 0
            end = self._counts()
            d, nb, a = (end[0] - start[0], end[1] - start[1], end[2] - start[2])
            tot = d + nb + a
            self.last = ProbeLedger(d, nb, a, tot, 1)
            self.cumulative = self.cumulative.merge(self.last)
        return ans

    def reset(self) -> None:
        self.memo = {}
        self.cumulative = ProbeLedger()
        self.last = ProbeLedger()


def make_session(graph_or_oracle, shared: bool = False) -> ProbeSession:
    if isinstance(graph_or_oracle, GraphView):
        return ProbeSession(AdjacencyOracle(graph_or_oracle), shared=shared)
    return ProbeSession(graph_or_oracle, shared=shared)
