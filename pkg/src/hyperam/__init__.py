"""Hyperelliptic am/al functions, reality conditions and loop solitons."""

__version__ = "0.1.0"

from .amfun import am_genus1_oracle, am_point, hyper_am, hyper_am_function
from .contour_quad import IntegrandSpec, du_over_dphi, integrate_phi, periods, u_of_phi
from .curve_model import Curve, PhiChart, chart, eval_y_squared, new_curve, x_of_phi
from .divisor_flow import (
    DivisorState,
    FlowSpec,
    energy,
    flow_velocity,
    initial_state,
    step,
    trajectory,
)
from .errors import HyperamError
from .reality import (
    CaseClass,
    RealityReport,
    check_reality,
    classify_case,
    predicted_winding,
    synthesize_curve,
)
from .soliton import mkdv_residual, shape, smkdv_residual, tangent, winding_number

__all__ = [
    "Curve", "PhiChart", "new_curve", "eval_y_squared", "chart", "x_of_phi",
    "RealityReport", "CaseClass", "check_reality", "classify_case", "predicted_winding",
    "synthesize_curve", "IntegrandSpec", "du_over_dphi", "integrate_phi", "u_of_phi", "periods",
    "am_point", "hyper_am", "hyper_am_function", "am_genus1_oracle", "DivisorState", "FlowSpec",
    "initial_state", "flow_velocity", "step", "trajectory", "energy", "tangent", "shape",
    "winding_number", "smkdv_residual", "mkdv_residual", "HyperamError",
]
