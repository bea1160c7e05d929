"""Irreversible Langevin samplers, variance estimation, and the graph limit."""

from .potentials import (BOWL, DOUBLE_WELL, GibbsSpec, InputError, Scenario,
                         get_scenario, scenario_names)
from .drift import DriftField, verify_conditions
from .sde import SimConfig, Trajectory, simulate, simulate_ensemble
from .reeb import GraphPoint, GraphTopology, build_graph, project
from .edges import EdgeCoefficients, gluing_weights, tabulate_edge_coefficients
from .variance import (VarianceEstimate, batch_means_variance, ergodic_average,
                       poisson_oracle_2d, replica_variance)
from .graphdiff import (graph_mean, limiting_variance, simulate_graph,
                        solve_graph_poisson)

__all__ = [
    "BOWL", "DOUBLE_WELL", "GibbsSpec", "InputError", "Scenario",
    "get_scenario", "scenario_names", "DriftField", "verify_conditions",
    "SimConfig", "Trajectory", "simulate", "simulate_ensemble",
    "GraphPoint", "GraphTopology", "build_graph", "project",
    "EdgeCoefficients", "gluing_weights", "tabulate_edge_coefficients",
    "VarianceEstimate", "batch_means_variance", "ergodic_average",
    "poisson_oracle_2d", "replica_variance",
    "graph_mean", "limiting_variance", "simulate_graph", "solve_graph_poisson",
]

__version__ = "0.1.0"
