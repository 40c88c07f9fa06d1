"""Symmetric interior penalty DG / average-vector-field solver for Cahn-Hilliard."""
from .assembly import (
    CoefficientField,
    assemble_avf_nonlinear,
    assemble_load,
    assemble_mass,
    assemble_nonlinear,
    assemble_stiffness,
)
from .basis import reference_basis
from .config import ConfigError, RunConfig, parse_config, preset_config
from .diagnostics import DiagnosticsSeries, convergence_order, discrete_energy, l2_error, total_mass
from .mesh import Mesh, build_rect_mesh, edge_geometry
from .model import MobilitySpec, PotentialSpec, ProblemPreset, make_preset, mobility_eval, potential_eval
from .quadrature import edge_quadrature, triangle_quadrature
from .solver import AVFSolver, NewtonSettings, StateVector, StepFailure, run
from .space import DgSpace, eval_field, project_l2

__version__ = "0.1.0"

__all__ = [
    "assemble_avf_nonlinear",
    "assemble_load",
    "assemble_mass",
    "assemble_nonlinear",
    "assemble_stiffness",
    "AVFSolver",
    "build_rect_mesh",
    "CoefficientField",
    "ConfigError",
    "convergence_order",
    "DgSpace",
    "DiagnosticsSeries",
    "discrete_energy",
    "edge_geometry",
    "edge_quadrature",
    "eval_field",
    "l2_error",
    "make_preset",
    "Mesh",
    "mobility_eval",
    "MobilitySpec",
    "NewtonSettings",
    "parse_config",
    "potential_eval",
    "PotentialSpec",
    "preset_config",
    "ProblemPreset",
    "project_l2",
    "reference_basis",
    "run",
    "RunConfig",
    "StateVector",
    "StepFailure",
    "total_mass",
    "triangle_quadrature",
]
