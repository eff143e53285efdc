"""Self-dual Einstein metrics with a Heisenberg symmetry.

Modules
-------
heisenberg   the group, its left-invariant frame and chart points
jets         truncated Taylor arithmetic used for exact derivatives
geometry     metrics from frame evolutions and their curvature
solutions    the solution catalog with closed forms and ODE systems
evolution    integrators, the rho flow and ODE/closed-form crosschecks
geodesics    geodesic equation and incompleteness probes
campaign     verification campaigns and reports
cli          the ``heisenqk`` command
"""

from .geometry import MetricField, curvature_report, einstein_residual, select_orientation
from .solutions import CONSTRAINTS, Family, InvalidBranchError, ParameterError, SolutionSpec

__version__ = "0.1.0"

__all__ = [
    "CONSTRAINTS",
    "Family",
    "InvalidBranchError",
    "MetricField",
    "ParameterError",
    "SolutionSpec",
    "curvature_report",
    "einstein_residual",
    "select_orientation",
]
