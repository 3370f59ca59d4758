"""Digital differential analyzers for circle generation.

One-step DDA schemes (simultaneous, sequential, exact) and the two-step
explicit midpoint family, with orbit diagnostics and a shift-add
integer engine.
"""

from .schemes import (
    Cost,
    DeltaForm,
    DeltaSpec,
    OneStepMatrix,
    SchemeSpec,
    StepRangeError,
    catalog,
    evaluate_delta,
    evaluate_one_step,
    explicit_midpoint,
    get_scheme,
    sequentialize,
)
from .generator import Trajectory, generate, init_two_step, step_one, step_two
from .analysis import classify, eigen, empirical_k, solve_best_third_order, spiral_analysis
from .metrics import check_xi_conservation, measure_period, radial_drift, xi, xi_step_matrix
from .fixedpoint import FixedPointConfig, FixedPointEngine, cost_report, init_x1_series

__version__ = "0.1.0"

__all__ = [
    "Cost", "DeltaForm", "DeltaSpec", "OneStepMatrix", "SchemeSpec", "StepRangeError",
    "catalog", "evaluate_delta", "evaluate_one_step", "explicit_midpoint", "get_scheme",
    "sequentialize", "Trajectory", "generate", "init_two_step", "step_one", "step_two",
    "classify", "eigen", "empirical_k", "solve_best_third_order", "spiral_analysis",
    "check_xi_conservation", "measure_period", "radial_drift", "xi", "xi_step_matrix",
    "FixedPointConfig", "FixedPointEngine", "cost_report", "init_x1_series",
]
