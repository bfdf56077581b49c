"""Density-matrix simulation of dephased, locally encoded probe states."""
__version__ = "0.1.0"

from .kernels import BACKEND
from .operators import Bipartition, all_bipartitions, partial_trace, partial_transpose
from .states import EncodingMask, GraphSpec, cluster_mask, ghz, graph_state, linear_cluster
from .channels import NoiseSpec, canonical_pipeline, dephase, run_pipeline
from .metrics import concurrence, entropy, fidelity, negativity, purity, qfi
from .coherence import robustness
from .families import make_family
from .metrology import fringe, phase_variance, snl_crossover

__all__ = [
    "BACKEND", "Bipartition", "EncodingMask", "GraphSpec", "NoiseSpec", "all_bipartitions",
    "canonical_pipeline", "cluster_mask", "concurrence", "dephase", "entropy", "fidelity",
    "fringe", "ghz", "graph_state", "linear_cluster", "make_family", "negativity",
    "partial_trace", "partial_transpose", "phase_variance", "purity", "qfi", "robustness",
    "run_pipeline", "snl_crossover",
]
