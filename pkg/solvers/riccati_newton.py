"""
Newton-Kleinman iteration for the stage Riccati equations

    A~^T X + X A~ - X S~ X + W~ = 0,   A~ = scale * A + shift * I,   S~ = scale * B B^T

Each iterate solves one Lyapunov equation with the closed-loop operator
A~ - S~ X_prev by low-rank ADI.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from config.constants import COMPRESS_TOL, NEWTON_DIVERGENCE_STREAK, NEWTON_MAX_ITER, NEWTON_TOL
from factored.ldl_pair import LdlPair, column_compress, ldl_concat, ldl_frob_norm
from linops.shifted_operator import ShiftedOperator, SparseLuCache
from linops.sparse_ops import as_columns, spmv_t
from shared.errors import DimensionError, NewtonDivergenceError
from shared.log import get_logger
from solvers.lyap_adi import AdiConfig, AleProblem, adi_solve

logger = get_logger('solvers.riccati_newton')


@dataclass
class NewtonConfig:
    """
    Newton-Kleinman settings.

    Attributes:
        tol: Relative ARE residual target (relative to ||W~||_F)
        max_iter: Iteration cap
        divergence_streak: Consecutive residual increases that count as divergence
        adi: Settings for the inner Lyapunov solves
        compress_tol: Compression tolerance for iterates, None means n * machine epsilon
    """
    tol: float = NEWTON_TOL
    max_iter: int = NEWTON_MAX_ITER
    divergence_streak: int = NEWTON_DIVERGENCE_STREAK
    adi: AdiConfig = field(default_factory=AdiConfig)
    compress_tol: Optional[float] = COMPRESS_TOL


@dataclass
class AreStageProblem:
    """
    One stage Riccati equation.

    Attributes:
        A: Sparse system matrix at the stage time
        scale: Factor tau * g_ii (or 1 for the scaled variants)
        B: n x m input factor, S~ = scale * B B^T
        rhs: Constant term W~ in factored form
        x0: Starting iterate (must make A~ - S~ x0 stable)
        shift: Diagonal shift of A~
    """
    A: sp.csr_matrix
    scale: float
    B: np.ndarray
    rhs: LdlPair
    x0: LdlPair
    shift: float = -0.5

    def __post_init__(self):
        n = self.A.shape[0]
        self.B = as_columns(self.B, n)
        if self.rhs.n != n or self.x0.n != n:
            raise DimensionError(f"stage data must have {n} rows")


@dataclass
class NewtonReport:
    """Iteration record of one Newton-Kleinman solve."""
    iterations: int = 0
    residuals: list = field(default_factory=list)
    adi_iterations: int = 0
    converged: bool = True


def are_residual(prob: AreStageProblem, x: LdlPair) -> float:
    """
    Frobenius norm of A~^T X + X A~ - X S~ X + W~ in factored form.

    Uses T = [A~^T L, L, L_w] with core [[0, D, 0], [D, -D L^T S~ L D, 0], [0, 0, D_w]].
    """
    L, D = x.L, x.D
    AtL = prob.scale * spmv_t(prob.A, L) + prob.shift * L
    LtB = L.T @ prob.B
    k = x.k
    core = np.zeros((2 * k, 2 * k))
    core[:k, k:] = D
    core[k:, :k] = D
    core[k:, k:] = -prob.scale * (D @ LtB @ LtB.T @ D)
    pair = ldl_concat([(np.hstack([AtL, L]), core, 1.0), (prob.rhs.L, prob.rhs.D, 1.0)], n=x.n)
    return ldl_frob_norm(pair)


def newton_solve(prob: AreStageProblem, cfg: Optional[NewtonConfig] = None,
                 cache: Optional[SparseLuCache] = None) -> tuple[LdlPair, NewtonReport]:
    """
    Solve a stage Riccati equation by Newton-Kleinman with low-rank ADI.

    Iterate l solves
        (A~ - S~ X_{l-1})^T X + X (A~ - S~ X_{l-1}) = -(W~ + X_{l-1} S~ X_{l-1})
    whose right-hand side is [W~ factors | X_{l-1} B] with core diag(D_w, scale * I_m).

    Args:
        prob: Stage equation
        cfg: Newton settings
        cache: Sparse LU cache shared by the iterates

    Returns:
        (X, report); X is column-compressed

    Raises:
        NewtonDivergenceError: The residual grew on too many consecutive iterations
    """
    cfg = cfg or NewtonConfig()
    n = prob.A.shape[0]
    cache = cache if cache is not None else SparseLuCache()
    rhs_norm = ldl_frob_norm(prob.rhs)
    report = NewtonReport()
    if rhs_norm == 0.0:
        report.residuals.append(0.0)
        return LdlPair.zeros(n), report

    x = prob.x0
    residual = are_residual(prob, x) / rhs_norm
    report.residuals.append(residual)
    if residual <= cfg.tol:
        return x, report

    m = prob.B.shape[1]
    streak = 0
    for iteration in range(1, cfg.max_iter + 1):
        XB = x.times(prob.B)
        op = ShiftedOperator(prob.A, U=prob.B, V=XB, alpha=prob.scale, sigma=prob.shift, cache=cache)
        rhs = ldl_concat([(prob.rhs.L, prob.rhs.D, 1.0), (XB, np.eye(m), prob.scale)], n=n)
        x_new, adi_report = adi_solve(AleProblem.from_pair(op, rhs), cfg.adi)
        x = column_compress(x_new, cfg.compress_tol)

        previous = residual
        residual = are_residual(prob, x) / rhs_norm
        report.residuals.append(residual)
        report.iterations = iteration
        report.adi_iterations += adi_report.iterations
        logger.debug(f"Newton step {iteration}: relative residual {residual:.5e}, "
                     f"{adi_report.iterations} ADI steps, rank {x.k}")

        if residual <= cfg.tol:
            break
        streak = streak + 1 if residual > previous else 0
        if streak >= cfg.divergence_streak:
            raise NewtonDivergenceError(f"residual increased {streak} times in a row "
                                        f"(now {residual:.3e}) after {iteration} iterations")

    report.converged = residual <= cfg.tol
    if not report.converged:
        logger.warning(f"Newton tolerance not achieved ({residual:.3e} > {cfg.tol:.3e}) "
                       f"after {cfg.max_iter} iterations")
    return x, report
