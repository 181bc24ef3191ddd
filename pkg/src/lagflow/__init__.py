"""Spectral and approximation tools for boundary control of harmonic flows."""

from . import cauchy, disk, fd_oracle, flow, runge, steklov
from .cauchy import (
    BoundaryData,
    SeriesField,
    compatibility,
    design_control_for_target,
    solve_cauchy,
    solve_mixed,
)
from .disk import DiskGeometry, approximate_control, duality_identity_residual
from .flow import JordanCurve, advect, curve_distance, enclosed_area
from .runge import bump_partition, runge_approximate, time_varying_runge
from .steklov import DIRICHLET, NEUMANN, InvalidInput, LateralCondition, RectangleDomain

__version__ = "0.1.0"
