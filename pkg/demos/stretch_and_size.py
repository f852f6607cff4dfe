"""Build every spanner on one graph and check what it promises.

The 3- and 5-spanners must keep every removed edge's endpoints within 3 or 5
hops. The k-dependent construction trades a larger stretch for fewer edges.
"""

import math

from lcaspanner.graph import gnp
from lcaspanner.randomness import AlgParams
from lcaspanner.verify import build_spanner, check_connectivity, check_stretch

g = gnp(1000, 0.1, seed=5)
print(f"graph: n={g.n}, m={g.m}\n")
print(f"{'algo':>6} {'kept':>8} {'share':>6} {'stretch':>8} {'connected':>10} {'failures':>9}")

runs = [("3", None, None), ("5", None, None), ("k2", 2, AlgParams(c_centers=0.02, c_L=0.3)),
        ("k2", 3, AlgParams(c_centers=0.02, c_L=0.3))]
for algo, k, prm in runs:
    res = build_spanner(algo, g, seed=5, params=prm, k=k)
    rep = check_stretch(g, res.edges, math.inf)
    name = algo if k is None else f"{algo},k={k}"
    print(f"{name:>6} {len(res.edges):8d} {len(res.edges) / g.m:6.1%} {rep.max_stretch:8g} "
          f"{str(check_connectivity(g, res.edges)):>10} {len(res.failures):9d}")
