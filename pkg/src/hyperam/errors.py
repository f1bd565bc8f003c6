"""Exception hierarchy.

Every error carries the module and operation that raised it so the CLI can
emit ``ERROR <module>.<op>: <message>`` lines without inspecting tracebacks.
"""


class HyperamError(Exception):
    module = "hyperam"
    op = "?"
    #: reality-condition rejections map to exit code 2 in the CLI
    reality = False

    def __init__(self, message: str = "", *, op: str | None = None):
        super().__init__(message)
        if op is not None:
            self.op = op

    def tag(self) -> str:
        return f"{self.module}.{self.op}"


# curve_model
class DuplicateBranchPoint(HyperamError, ValueError):
    module, op = "curve_model", "new_curve"


class EvenCount(HyperamError, ValueError):
    module, op = "curve_model", "new_curve"


# reality
class NonRealBranchPoint(HyperamError):
    module, op, reality = "reality", "check_reality", True


class UnclassifiableSigns(HyperamError):
    module, op, reality = "reality", "classify_case", True


class EmptyAdmissibleRange(HyperamError):
    module, op, reality = "reality", "classify_case", True


class DegenerateSynthesis(HyperamError, ValueError):
    module, op = "reality", "synthesize_curve"


# contour_quad
class OutsideAdmissibleRange(HyperamError, ValueError):
    module, op = "contour_quad", "du_over_dphi"


class SingularInterior(HyperamError):
    module, op = "contour_quad", "integrate_phi"


class NoConvergence(HyperamError, ArithmeticError):
    module, op = "contour_quad", "integrate_phi"


class WrongGenus(HyperamError, ValueError):
    module, op = "contour_quad", "periods"


class UnclassifiedChart(HyperamError):
    module, op = "contour_quad", "periods"


# amfun
class InversionFailure(HyperamError, ArithmeticError):
    module, op = "amfun", "am_point"


# divisor_flow
class DegenerateDivisor(HyperamError, ArithmeticError):
    module, op = "divisor_flow", "flow_velocity"


class NonRealVelocity(HyperamError, ArithmeticError):
    module, op = "divisor_flow", "flow_velocity"


class StepFailure(HyperamError, ArithmeticError):
    module, op = "divisor_flow", "step"


# soliton
class PeriodMismatch(HyperamError, ValueError):
    module, op = "soliton", "winding_number"


class GridTooCoarse(HyperamError, ValueError):
    module, op = "soliton", "smkdv_residual"


class PhaseUnwrapFailure(HyperamError, ArithmeticError):
    module, op = "soliton", "mkdv_residual"


class NearSingularTimeMix(HyperamError, ArithmeticError):
    module, op = "soliton", "mkdv_residual"
