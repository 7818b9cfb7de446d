"""Generating functions of walks on non-compact metric graphs."""

from .chain import VertexChain, chain_to_edge_model, edge_model_to_chain
from .errors import *  # noqa: F401,F403
from .families import make_family
from .genfun import GenFunMatrix, Resolvent, coupling, d_matrix, eval_T, eval_T_directed, neumann_T
from .graph import ExternalLine, InternalLine, MetricGraph, Walk, build_graph, make_walk, reverse, vertex_sequence
from .scattering import (
    BoundaryConditions,
    ScatterResult,
    bc_from_M,
    fourier_quadrature,
    fourier_series_S,
    fourier_walk_coefficient,
    global_bc,
    local_bc,
    single_vertex_S,
    solve_scattering,
    vertex_S_collection,
)
from .stats import (
    MeanReport,
    aggregate,
    mean_length,
    mean_reflections,
    mean_transitions,
    mean_traversals,
    mean_visits,
    simulate,
)
from .transition import BigM, TransitionCollection, assemble_big_m, classify, matrix_norm_max
from .walks import (
    beta0_bound,
    boundary_limit,
    enumerate_walks,
    score_coefficients,
    series_T,
    series_T_directed,
    walk_weight,
)

__version__ = "0.1.0"
