"""Experiment rows, parameter sweeps, log-log fits and CSV output."""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields

import numpy as np

from .graph import GraphView, gnp, regular_ish
from .randomness import AlgParams
from .verify import build_spanner, check_connectivity, check_stretch, make_context, query_fn

# Above this many edges a row skips the full scan: edges_kept becomes a
# sample estimate and stretch/connectivity are left blank.
FULL_LIMIT = 2_000_000


@dataclass
class ExperimentRow:
    algo: str
    n: int
    m: int
    k: int
    seed: int
    edges_kept: int
    max_probes_per_query: int
    mean_probes_per_query: float
    max_stretch: float | None
    connected: bool | None
    clustering_failures: int
    wall_time_ms: int


COLUMNS = [f.name for f in fields(ExperimentRow)]


def sample_edges(graph: GraphView, count: int | None, seed: int) -> list[tuple[int, int]]:
    """Up to `count` distinct edges, uniformly, without listing all edges."""
    if count is None or count >= graph.m:
        return list(graph.edges())
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 0x5A3])
    out: set[tuple[int, int]] = set()
    ind = graph.indices
    while len(out) < count:
        pos = rng.integers(0, ind.size, size=2 * (count - len(out)))
        rows = np.searchsorted(graph.indptr, pos, side="right") - 1
        for a, b in zip(rows.tolist(), ind[pos].tolist()):
            out.add((a, b) if a < b else (b, a))
            if len(out) == count:
                break
    return sorted(out)


def probe_profile(algo: str, graph: GraphView, edges, seed: int, params=None, k=None):
    """(max, mean, answers) of isolated per-query probe totals."""
    ctx = make_context(algo, graph, seed, params, k, shared=False)
    q = query_fn(algo)
    tot = []
    answers = []
    for u, v in edges:
        answers.append(q(u, v, ctx))
        tot.append(ctx.last_ledger.total)
    if not tot:
        return 0, 0.0, answers
    return max(tot), sum(tot) / len(tot), answers


def run_experiment(algo: str, graph: GraphView, seed: int = 0, params: AlgParams | None = None,
                   k: int | None = None, samples: int | None = None,
                   full_limit: int = FULL_LIMIT, timing: bool = True) -> ExperimentRow:
    return measure(algo, graph, seed, params, k, samples, full_limit, timing)[0]


def measure(algo: str, graph: GraphView, seed: int = 0, params: AlgParams | None = None,
            k: int | None = None, samples: int | None = None, full_limit: float = FULL_LIMIT,
            timing: bool = True, strict: bool = False):
    """(row, spanner edges or None when the full scan was skipped)."""
    t0 = time.perf_counter()
    algo = str(algo)
    kk = make_context(algo, graph, seed, params, k).k if algo in ("k2", "bs") else 0
    edges = sample_edges(graph, samples, seed)
    mx, mean, answers = probe_profile(algo, graph, edges, seed, params, k)
    if graph.m <= full_limit:
        res = build_spanner(algo, graph, seed, params, k, strict=strict)
        built = res.edges
        kept = len(res.edges)
        fails = len(res.failures)
        stretch = check_stretch(graph, res.edges, math.inf).max_stretch
        conn = check_connectivity(graph, res.edges)
    else:
        kept = round(graph.m * sum(answers) / len(answers)) if answers else 0
        stretch, conn, fails = None, None, 0
        built = None
    ms = int(round((time.perf_counter() - t0) * 1000)) if timing else 0
    return ExperimentRow(algo, graph.n, graph.m, kk, seed, kept, mx, round(mean, 3),
                         stretch, conn, fails, ms), built


def family_graph(family: str, n: int, seed: int, avg_deg: float = 8.0) -> GraphView:
    """'sparse' is G(n, avg_deg/n), 'regular' has every degree near avg_deg,
    'dense' is G(n, n^(-1/3))."""
    if family == "sparse":
        return gnp(n, min(1.0, avg_deg / n), seed)
    if family == "regular":
        return regular_ish(n, min(n - 1, round(avg_deg)), seed)
    if family == "dense":
        return gnp(n, n ** (-1 / 3), seed)
    raise ValueError(f"unknown family {family!r}; expected sparse, regular or dense")


def _cell(args) -> ExperimentRow:
    algo, family, n, seed, avg_deg, params, k, samples, full_limit, timing = args
    g = family_graph(family, n, seed, avg_deg)
    return run_experiment(algo, g, seed, params, k, samples, full_limit, timing)


def worker_count(cells: int) -> int:
    cap = os.environ.get("LOCAL_SPANNER_THREADS")
    w = os.cpu_count() or 1
    if cap:
        try:
            w = min(w, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"LOCAL_SPANNER_THREADS must be an integer, got {cap!r}")
    return max(1, min(w, cells))


def sweep(algo: str, ns, seeds, family: str = "sparse", avg_deg: float = 8.0,
          params: AlgParams | None = None, k: int | None = None, samples: int | None = 200,
          full_limit: int = FULL_LIMIT, timing: bool = True, workers: int | None = None):
    """One row per (n, seed), sorted."""
    ns, seeds = list(ns), list(seeds)
    if not ns or not seeds:
        raise ValueError("sweep grid is empty")
    cells = [(str(algo), family, n, s, avg_deg, params, k, samples, full_limit, timing)
             for n in ns for s in seeds]
    workers = workers or worker_count(len(cells))
    if workers <= 1:
        rows = [_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_cell, cells))
    return sorted(rows, key=lambda r: (r.algo, r.n, r.m, r.k, r.seed))


def fit_exponent(ns, values) -> float:
    """Slope of log(value) against log(n); per n the largest value is used."""
    top: dict[int, float] = {}
    for n, v in zip(ns, values):
        if v is not None and v > 0:
            top[n] = max(top.get(n, 0.0), float(v))
    if len(top) < 2:
        return float("nan")
    x = np.log(np.array(sorted(top), dtype=float))
    y = np.log(np.array([top[n] for n in sorted(top)]))
    return float(np.polyfit(x, y, 1)[0])


def fit_summary(rows) -> list[str]:
    ns = [r.n for r in rows]
    out = []
    for name in ("max_probes_per_query", "edges_kept"):
        e = fit_exponent(ns, [getattr(r, name) for r in rows])
        out.append(f"fit {name} ~ n^{e:.4f} over n={min(ns)}..{max(ns)}")
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.6g}"
    return str(v)


def rows_to_csv(rows, comments=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in astuple(r)])
    for c in comments:
        buf.write(f"# {c}\n")
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[dict], list[str]]:
    """Rows as dicts of strings, plus the comment lines without their '# '."""
    lines = text.splitlines()
    comments = [ln[1:].strip() for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    return list(csv.DictReader(body)), comments
