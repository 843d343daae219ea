"""Finite volume heat solver on Sierpinski simplices."""

__version__ = "0.1.0"

from .errors import (
    CFLViolationError,
    ConfigError,
    ConvergenceError,
    FVMError,
    InvalidLetterError,
    NonFiniteError,
    SizeBudgetError,
)
from .graphs import build_cell_graph, build_cell_laplacian, build_vertex_laplacian, cell_laplacian
from .simplex import MeasureSpec, SimplexSpace, apply_contraction, cell_barycenter, cell_measure, vertex_count
from .solver import InitialCondition, SchemeConfig, assemble, initial_state, run
from .spectral import cfl_max_h, direct_spectrum, phi, phi_branches, spectral_radius, verify_decimation

__all__ = [
    "CFLViolationError",
    "ConfigError",
    "ConvergenceError",
    "FVMError",
    "InitialCondition",
    "InvalidLetterError",
    "MeasureSpec",
    "NonFiniteError",
    "SchemeConfig",
    "SimplexSpace",
    "SizeBudgetError",
    "apply_contraction",
    "assemble",
    "build_cell_graph",
    "build_cell_laplacian",
    "build_vertex_laplacian",
    "cell_barycenter",
    "cell_laplacian",
    "cell_measure",
    "cfl_max_h",
    "direct_spectrum",
    "initial_state",
    "phi",
    "phi_branches",
    "run",
    "spectral_radius",
    "verify_decimation",
    "vertex_count",
]
