"""Command line: gen, query, build, sweep, verify.

Exit codes: 0 ok, 1 internal error, 2 bad input, 3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import re
import sys

from .bench import fit_summary, measure, rows_to_csv, sweep
from .graph import GraphFormatError, load_graph, parse_gen_spec, save_graph
from .randomness import AlgParams
from .verify import (ALGOS, build_global, build_spanner, check_cluster_invariants,
                     check_connectivity, check_stretch, make_context, query_fn)

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    """'1,2,5', '1..5', '2^10..2^16' (powers of two) or a mix, comma separated."""
    out = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"2\^(\d+)\.\.2\^(\d+)", part)
        if m:
            out.extend(2 ** e for e in range(int(m[1]), int(m[2]) + 1))
            continue
        m = re.fullmatch(r"(\d+)\.\.(\d+)", part)
        if m:
            out.extend(range(int(m[1]), int(m[2]) + 1))
            continue
        m = re.fullmatch(r"2\^(\d+)", part)
        if m:
            out.append(2 ** int(m[1]))
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise InputError(f"cannot read {part!r} as an integer list item") from None
    if not out:
        raise InputError("empty list")
    return out


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _params(a) -> AlgParams:
    return AlgParams(c_centers=a.c_centers, c_rep_sample=a.c_rep, c_L=a.c_L,
                     k=a.k if a.k is not None else 3, early_stop=a.early_stop)


def _graph(a):
    if a.graph and a.gen:
        raise InputError("give either --graph or --gen, not both")
    if a.graph:
        return load_graph(a.graph)
    if a.gen:
        return parse_gen_spec(a.gen, a.seed)
    raise InputError("a graph is required: --graph PATH or --gen SPEC")


def _add_common(p, graph=True):
    p.add_argument("--algo", choices=ALGOS, default="3")
    p.add_argument("--k", type=int, default=None, help="stretch parameter for k2/bs (default 3)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--c-centers", type=float, default=1.0)
    p.add_argument("--c-rep", type=float, default=3.0)
    p.add_argument("--c-L", type=float, default=1.0)
    p.add_argument("--early-stop", action="store_true",
                   help="end bucket scans at the first cluster member (fewer probes, same answers)")
    if graph:
        p.add_argument("--graph", help="edge-list file")
        p.add_argument("--gen", help="generator spec, e.g. gnp:1000:0.01")


def cmd_gen(a) -> int:
    if not a.gen:
        raise InputError("--gen is required")
    g = parse_gen_spec(a.gen, a.seed)
    save_graph(g, a.out if a.out else sys.stdout)
    return EXIT_OK


def cmd_query(a) -> int:
    g = _graph(a)
    u, v = a.u, a.v
    if not (0 <= u < g.n and 0 <= v < g.n) or not g.has_edge(u, v):
        raise InputError(f"({u}, {v}) is not an edge of the graph")
    ctx = make_context(a.algo, g, a.seed, _params(a), a.k, shared=False, strict=True)
    ans = query_fn(a.algo)(u, v, ctx)
    led = ctx.last_ledger
    print("YES" if ans else "NO")
    print(f"probes degree={led.degree_probes} neighbor={led.neighbor_probes} "
          f"adjacency={led.adjacency_probes} total={led.total}")
    return EXIT_OK


def cmd_build(a) -> int:
    g = _graph(a)
    prm = _params(a)
    row, edges = measure(a.algo, g, a.seed, prm, a.k, samples=a.samples,
                         full_limit=math.inf, timing=not a.no_timing, strict=a.strict)
    if a.out:
        save_graph(g, a.out, edges)
    sys.stdout.write(rows_to_csv([row]))
    return EXIT_OK


def cmd_sweep(a) -> int:
    ns = _int_list(a.ns)
    seeds = _int_list(a.seeds)
    rows = sweep(a.algo, ns, seeds, a.family, a.avg_deg, _params(a), a.k, a.samples,
                 a.full_limit, timing=not a.no_timing)
    text = rows_to_csv(rows, fit_summary(rows))
    if a.csv:
        with open(a.csv, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _default_bound(algo: str, k: int) -> float:
    return {"3": 3.0, "5": 5.0, "bs": 2.0 * k - 1}.get(algo, math.inf)


def cmd_verify(a) -> int:
    g = _graph(a)
    prm = _params(a)
    res = build_spanner(a.algo, g, a.seed, prm, a.k)
    k = getattr(res.ctx, "k", 0)
    bound = a.bound if a.bound is not None else _default_bound(a.algo, k)
    rep = check_stretch(g, res.edges, bound, len(res.failures))
    conn = check_connectivity(g, res.edges)
    ok = rep.passed and conn
    print(f"edges {len(res.edges)}/{g.m}  removed {rep.removed}  max_stretch {rep.max_stretch:g}  "
          f"bound {bound:g}  stretch {'pass' if rep.passed else 'FAIL'}")
    print(f"connectivity {'pass' if conn else 'FAIL'}  clustering_failures {len(res.failures)}")
    if a.equivalence:
        ref = build_global(a.algo, g, a.seed, prm, a.k).edges
        same = ref == res.edges
        ok &= same
        print(f"global reference {'agrees' if same else 'DIFFERS'} "
              f"(local-only {len(res.edges - ref)}, global-only {len(ref - res.edges)})")
    if a.algo == "k2":
        cr = check_cluster_invariants(g, seed=a.seed, params=prm, k=a.k)
        ok &= cr.passed
        print(f"clusters {cr.clusters} in {cr.cells} cells  bound {cr.count_bound:.1f}  "
              f"invariants {'pass' if cr.passed else 'FAIL'}")
        for p in cr.problems:
            print(f"  {p}")
    for (e, d) in rep.worst[:3]:
        print(f"  worst {e[0]} {e[1]} -> {d:g}")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lcaspanner", description="Local spanner queries and experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    p.add_argument("--gen", required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("query", help="answer one edge and print its probe counts")
    _add_common(p)
    p.add_argument("u", type=int)
    p.add_argument("v", type=int)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("build", help="scan every edge, write the spanner, print a summary row")
    _add_common(p)
    p.add_argument("--out")
    p.add_argument("--samples", type=int, default=200, help="edges queried in isolation for probe stats")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="report wall_time_ms as 0")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("sweep", help="rows over an n x seed grid, with log-log fits")
    _add_common(p, graph=False)
    p.add_argument("--ns", required=True, help="e.g. 2^10..2^16 or 1000,2000")
    p.add_argument("--seeds", default="1..5")
    p.add_argument("--family", choices=("sparse", "regular", "dense"), default="sparse")
    p.add_argument("--avg-deg", type=float, default=8.0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--full-limit", type=int, default=2_000_000)
    p.add_argument("--csv")
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="build and check stretch, connectivity and structure")
    _add_common(p)
    p.add_argument("--bound", type=float, default=None)
    p.add_argument("--equivalence", action="store_true", help="also compare with the global reference")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return a.fn(a)
    except (InputError, GraphFormatError, ValueError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last resort
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
