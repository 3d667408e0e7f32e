"""
Types shared by the peer integrators: step options, peer windows and
per-stage reports.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config.constants import COMPRESS_TOL, STARTUP_SUBSTEPS
from factored.ldl_pair import column_compress, ldl_concat
from solvers.lyap_adi import AdiConfig
from solvers.riccati_newton import NewtonConfig


@dataclass
class StepOptions:
    """
    Everything a time step needs besides the problem and the coefficients.

    Attributes:
        newton: Newton-Kleinman settings (implicit scheme)
        adi: ADI settings (Rosenbrock-type schemes; Newton carries its own)
        compress_tol: Tolerance for every column compression, None means n * eps
        startup_substeps: Substeps per tau when building the first window
    """
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    adi: AdiConfig = field(default_factory=AdiConfig)
    compress_tol: Optional[float] = COMPRESS_TOL
    startup_substeps: int = STARTUP_SUBSTEPS


@dataclass
class PeerState:
    """
    Window of s stage values X_{k-1,j} ~ X(t_base + c_j tau).

    Attributes:
        stages: Stage values in factored form
        t_base: Window base time
        tau: Step size
        step: Number of peer steps taken so far (0 after startup)
        factors: Cached Riccati operator factors of the stages, if computed
        factors_layout: True if `factors` include the C^T block
    """
    stages: list
    t_base: float
    tau: float
    step: int = 0
    factors: Optional[list] = None
    factors_layout: Optional[bool] = None

    @property
    def end_time(self) -> float:
        return self.t_base + self.tau

    def stage_times(self, c: np.ndarray) -> np.ndarray:
        return self.t_base + np.asarray(c) * self.tau


@dataclass
class AuxWindow:
    """
    Window of the auxiliary-variable scheme: Y_{k-1,j} = sum_l g_jl X_{k-1,l}
    together with the reconstructed X_{k-1,j}.
    """
    aux: list
    stages: list
    t_base: float
    tau: float
    step: int = 0

    @property
    def end_time(self) -> float:
        return self.t_base + self.tau

    @staticmethod
    def from_state(state: PeerState, G: np.ndarray, compress_tol: Optional[float] = None) -> 'AuxWindow':
        """Build Y = (G kron I) X from a plain window."""
        aux = combine_stages(G, state.stages, compress_tol)
        return AuxWindow(aux, list(state.stages), state.t_base, state.tau, state.step)


@dataclass
class StageReport:
    """
    Record of one stage solve.

    Attributes:
        step: Step index (1-based)
        stage: Stage index (1-based)
        time: Stage time
        rank: Columns of the compressed stage value
        rhs_columns: Width of the assembled right-hand-side factor before compression
        newton_iterations: Newton iterations (0 for Rosenbrock-type schemes)
        adi_iterations: ADI steps summed over the stage
        residual: Final relative residual (ARE for implicit, ALE for Rosenbrock-type)
        converged: Whether the inner solvers met their tolerances
    """
    step: int
    stage: int
    time: float
    rank: int
    rhs_columns: int
    newton_iterations: int
    adi_iterations: int
    residual: float
    converged: bool = True


def combine_stages(weights: np.ndarray, values: list, compress_tol: Optional[float] = None) -> list:
    """
    Row-wise combinations Z_i = sum_{l<=i} w_il V_l of factored values.

    Args:
        weights: Lower triangular s x s weights
        values: s factored values
        compress_tol: Compression tolerance

    Returns:
        List of s compressed factored values
    """
    n = values[0].n
    combined = []
    for i in range(len(values)):
        parts = [(values[l].L, values[l].D, float(weights[i, l])) for l in range(i + 1) if weights[i, l] != 0.0]
        combined.append(column_compress(ldl_concat(parts, n=n), compress_tol))
    return combined
