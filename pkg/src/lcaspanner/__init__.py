"""Local computation algorithms for sparse graph spanners.

Each LCA answers "is this edge in the spanner?" from degree, neighbor and
adjacency probes plus a shared random tape, so that all answers agree with
one fixed spanner.
"""

from .graph import (GraphFormatError, GraphView, edge_key, gen_graph, gnp, load_graph,
                    parse_gen_spec, planted_hubs, regular_ish, save_graph)
from .probes import AdjacencyOracle, CountingOracle, ProbeLedger, ProbeSession
from .randomness import AlgParams, RandomTape, bucket_of, class_of
from .spanner3 import Spanner3Context, build_spanner3_global, query3
from .spanner5 import Spanner5Context, build_spanner5_global, query5
from .spanner_k2 import (ClusterDescriptor, ClusteringFailure, K2Context, bs_query,
                         build_spanner_k2_global, query_k2, query_main)
from .verify import (StretchReport, build_global, build_spanner, check_connectivity,
                     check_stretch, contract_voronoi)
from .bench import ExperimentRow, run_experiment, sweep

__version__ = "0.1.0"

__all__ = [
    "AdjacencyOracle", "AlgParams", "ClusterDescriptor", "ClusteringFailure", "CountingOracle",
    "ExperimentRow", "GraphFormatError", "GraphView", "K2Context", "ProbeLedger", "ProbeSession",
    "RandomTape", "Spanner3Context", "Spanner5Context", "StretchReport", "bs_query",
    "bucket_of", "build_global", "build_spanner", "build_spanner3_global",
    "build_spanner5_global", "build_spanner_k2_global", "check_connectivity", "check_stretch",
    "class_of", "contract_voronoi", "edge_key", "gen_graph", "gnp", "load_graph",
    "parse_gen_spec", "planted_hubs", "query3", "query5", "query_k2", "query_main",
    "regular_ish", "run_experiment", "save_graph", "sweep",
]
