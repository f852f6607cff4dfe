"""Ask single-edge questions and watch what each answer costs.

Every query reads the graph only through degree, neighbor and adjacency
probes, and no state survives between queries. The answers still agree with
one fixed spanner, which we confirm by rebuilding it from scratch.
"""

from lcaspanner.graph import gnp
from lcaspanner.verify import build_global, make_context, query_fn

g = gnp(1500, 0.08, seed=11)
print(f"graph: n={g.n}, m={g.m}, max degree {int(g.degrees().max())}")
edges = list(g.edges())[::9000][:5]

for algo in ("3", "5", "k2"):
    ctx = make_context(algo, g, seed=11, shared=False)
    ask = query_fn(algo)
    reference = build_global(algo, g, seed=11).edges
    print(f"\nalgorithm {algo}")
    for u, v in edges:
        ans = ask(u, v, ctx)
        led = ctx.last_ledger
        print(f"  ({u:4d}, {v:4d}) -> {'YES' if ans else 'NO ':3s}  probes {led.total:6d} "
              f"(deg {led.degree_probes}, nbr {led.neighbor_probes}, adj {led.adjacency_probes})"
              f"  reference agrees: {ans == ((u, v) in reference)}")
