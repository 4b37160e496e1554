"""Quasi-Sierpinski truss: geometry, closed-form uniform-load solution built
on Takagi-class functions, and a direct-stiffness check."""

from .closed_form import AnalysisResult, analyze
from .errors import (
    AssemblyError,
    DomainError,
    NonCompressiveSupportError,
    SolverError,
    ValidationError,
)
from .fractal import (
    DyadicPoint,
    ExplicitList,
    GeometricTail,
    RatioSequence,
    cantor_pseudo_inverse,
    dyadic_coefficients,
    j_function,
    psi,
    takagi_class,
)
from .structure import Boundary, NodeId, StructureConfig, Topology, build_topology, node_position

__version__ = "0.1.0"
