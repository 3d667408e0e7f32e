"""
Exception hierarchy shared by every layer.

Numerical failures derive from SolverError; bad input derives from ValueError.
Iteration caps that are reached without meeting a tolerance are reported in
result objects, never raised.
"""
from typing import Optional


class SolverError(RuntimeError):
    """Base class for numerical failures."""


class ShiftedSolveError(SolverError):
    """Shifted system is singular or its solution is not finite."""


class AdiError(SolverError):
    """ADI produced non-finite iterates (operator not stable)."""


class NewtonDivergenceError(SolverError):
    """Newton-Kleinman residual kept growing."""


class StartupError(SolverError):
    """The initial peer window cannot be built."""


class RichardsonError(SolverError):
    """Reference refinement did not settle within the allowed halvings."""


class StructureError(SolverError):
    """An assembled factor does not have its closed-form column count."""


class StageSolveError(SolverError):
    """
    Failure inside one stage of one time step.

    Attributes:
        step: Time step index (1-based)
        stage: Stage index (1-based)
    """

    def __init__(self, message: str, step: Optional[int] = None, stage: Optional[int] = None):
        super().__init__(f"step {step}, stage {stage}: {message}")
        self.step = step
        self.stage = stage


class DimensionError(ValueError):
    """Row or column counts do not match."""


class CoefficientError(ValueError):
    """
    Coefficient set could not be parsed or breaks an invariant.

    Attributes:
        rule: Short name of the violated rule (e.g. 'c_s=1')
    """

    def __init__(self, message: str, rule: str = 'parse'):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule


class ProblemLoadError(ValueError):
    """Problem files are missing, malformed or inconsistent."""


class DenseCapError(ValueError):
    """Dense conversion requested above the configured size cap."""


class ConfigError(ValueError):
    """Run settings do not fit the problem or the chosen scheme."""
