"""Fractional-conductivity random walks on graphs: forward model,
recovery from partially observed walks, and graph reconstruction."""

from .errors import FracwalkError, NumericalError, ValidationError
from .gauge import check_conditions, gauge_action, recover_interaction, solve_gauge
from .graph_core import Graph, all_pairs_distances, check_admissibility, generate_admissible_graph
from .recovery import recover_canonical, recovered_vertex_count, verify_redundancy
from .reconstruct import reconstruct_full
from .simulator import simulate_observations
from .walk_model import build_interaction, exact_observation_data, normalize, transition_matrix

__version__ = "0.1.0"

__all__ = [
    "FracwalkError",
    "Graph",
    "NumericalError",
    "ValidationError",
    "all_pairs_distances",
    "build_interaction",
    "check_admissibility",
    "check_conditions",
    "exact_observation_data",
    "gauge_action",
    "generate_admissible_graph",
    "normalize",
    "reconstruct_full",
    "recover_canonical",
    "recover_interaction",
    "recovered_vertex_count",
    "simulate_observations",
    "solve_gauge",
    "transition_matrix",
    "verify_redundancy",
]
