"""Semiclassical underbarrier wave functions for tunneling from a non-homogeneous wire."""

__version__ = "0.1.0"

from .branches import trace_branches
from .critical import critical_set, find_critical_width, find_extrema, find_folds, unfold_cubic
from .errors import EXIT_CODES, UnderbarrierError
from .hj_solver import BranchCurve, SaddlePoint, TraceConfig, action, solve_saddle, trace_branch
from .impurity import enhancement_report, sigma1
from .oned_stokes import reflect_cosh_barrier, stokes_lines_1d, wire_overbarrier_reflection
from .potential import BarrierParams, ImpurityParams, PhysicalParams
from .trajectory import find_threshold, penetration, two_route

__all__ = [
    "BarrierParams",
    "BranchCurve",
    "EXIT_CODES",
    "ImpurityParams",
    "PhysicalParams",
    "SaddlePoint",
    "TraceConfig",
    "UnderbarrierError",
    "action",
    "critical_set",
    "enhancement_report",
    "find_critical_width",
    "find_extrema",
    "find_folds",
    "find_threshold",
    "penetration",
    "reflect_cosh_barrier",
    "sigma1",
    "solve_saddle",
    "stokes_lines_1d",
    "trace_branch",
    "trace_branches",
    "two_route",
    "unfold_cubic",
    "wire_overbarrier_reflection",
]
