"""How the worst query cost grows with the graph.

On G(n, n^-1/3) the 3-spanner's costliest query should grow roughly like
sqrt(n) and the 5-spanner's like n^(2/3), up to log factors. This runs a
small grid; the command line `sweep` runs the full one.
"""

from lcaspanner.bench import fit_exponent, sweep

ns = [2 ** e for e in range(9, 14)]
for algo in ("3", "5"):
    rows = sweep(algo, ns, [1, 2], family="dense", samples=100, full_limit=0, timing=False)
    for r in rows:
        print(f"algo {algo}  n={r.n:6d}  m={r.m:9d}  max probes {r.max_probes_per_query:7d}")
    fit = fit_exponent([r.n for r in rows], [r.max_probes_per_query for r in rows])
    print(f"algo {algo}: max probes grow like n^{fit:.2f}\n")
