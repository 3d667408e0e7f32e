"""
Low-rank LDL^T-ADI for algebraic Lyapunov equations

    F^T X + X F = -G S G^T

with a stable sparse-plus-low-rank F. The residual is carried in factored
form W S W^T, so its norm is available at every step for free.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config.constants import (ADI_COMPRESS_EVERY, ADI_MAX_ITER, ADI_SHIFT_COUNT, ADI_STAGNATION_FACTOR,
                              ADI_STAGNATION_FLOOR, ADI_STAGNATION_WINDOW, ADI_TOL, COMPRESS_TOL)
from factored.ldl_pair import LdlPair, column_compress, ldl_concat, ldl_frob_norm, swap_core
from linops.shifted_operator import ShiftedOperator
from linops.sparse_ops import as_columns
from shared.errors import AdiError, DimensionError
from shared.log import get_logger
from solvers.adi_shifts import compute_shifts

logger = get_logger('solvers.lyap_adi')


@dataclass
class AdiConfig:
    """
    ADI settings.

    Attributes:
        rel_tol: Relative residual target, None means n * machine epsilon
        max_iter: Cap on ADI steps (a complex double step counts as two)
        shift_count: Target number of shifts
        compress_every: Compress the solution factor every this many steps
        compress_tol: Compression tolerance, None means n * machine epsilon
        stagnation_window: Stop when the residual dropped less than 10% over this many steps
    """
    rel_tol: Optional[float] = ADI_TOL
    max_iter: int = ADI_MAX_ITER
    shift_count: int = ADI_SHIFT_COUNT
    compress_every: int = ADI_COMPRESS_EVERY
    compress_tol: Optional[float] = COMPRESS_TOL
    stagnation_window: int = ADI_STAGNATION_WINDOW


@dataclass
class AleProblem:
    """
    Lyapunov equation F^T X + X F = -G S G^T.

    Attributes:
        op: Stable operator F
        G: n x c right-hand-side factor
        S: c x c symmetric core
    """
    op: ShiftedOperator
    G: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.G = as_columns(self.G, self.op.n)
        self.S = np.atleast_2d(np.asarray(self.S, dtype=float))
        if self.S.shape != (self.G.shape[1], self.G.shape[1]):
            raise DimensionError(f"core {self.S.shape} does not fit {self.G.shape[1]} columns")

    @staticmethod
    def from_pair(op: ShiftedOperator, rhs: LdlPair) -> 'AleProblem':
        return AleProblem(op, np.array(rhs.L), np.array(rhs.D))


@dataclass
class AdiReport:
    """Iteration record of one ADI solve."""
    iterations: int = 0
    residuals: list = field(default_factory=list)
    converged: bool = True
    stagnated: bool = False
    shifts: list = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else 0.0


def adi_solve(prob: AleProblem, cfg: Optional[AdiConfig] = None,
              shifts: Optional[list] = None) -> tuple[LdlPair, AdiReport]:
    """
    Solve F^T X + X F = -G S G^T by low-rank LDL^T-ADI.

    Real shifts add the block V (-2p S) V^T; a conjugate pair is handled by
    one complex solve and two real blocks with core -4 Re(p) S.

    Args:
        prob: Lyapunov equation
        cfg: ADI settings
        shifts: Precomputed shifts (reused across stages); computed when None

    Returns:
        (X, report); X is column-compressed

    Raises:
        AdiError: Iterates became non-finite
    """
    cfg = cfg or AdiConfig()
    op = prob.op
    n = op.n
    rhs_norm = ldl_frob_norm(LdlPair(prob.G, prob.S))
    if rhs_norm == 0.0:
        return LdlPair.zeros(n), AdiReport(residuals=[0.0])

    rel_tol = cfg.rel_tol if cfg.rel_tol is not None else n * np.finfo(float).eps
    compress_tol = cfg.compress_tol if cfg.compress_tol is not None else n * np.finfo(float).eps
    if not shifts:
        shifts = compute_shifts(op, cfg.shift_count)
    report = AdiReport(shifts=list(shifts))

    S = prob.S
    W = prob.G.copy()
    X = LdlPair.zeros(n)
    blocks: list = []
    steps = 0
    since_compress = 0
    index = 0

    while steps < cfg.max_iter:
        p = shifts[index % len(shifts)]
        if isinstance(p, complex) and p.imag != 0.0:
            V = op.solve_t(p, W)
            d = p.real / p.imag
            V_re = V.real + d * V.imag
            V_im = np.sqrt(d ** 2 + 1.0) * V.imag
            W = W - 4.0 * p.real * V_re
            blocks.append((V_re, S, -4.0 * p.real))
            blocks.append((V_im, S, -4.0 * p.real))
            index += 2
            steps += 2
            since_compress += 2
        else:
            p = float(np.real(p))
            V = np.real(op.solve_t(p, W))
            W = W - 2.0 * p * V
            blocks.append((V, S, -2.0 * p))
            index += 1
            steps += 1
            since_compress += 1

        if not np.all(np.isfinite(W)):
            raise AdiError(f"non-finite residual factor after {steps} ADI steps")

        residual = ldl_frob_norm(LdlPair(W, S)) / rhs_norm
        report.residuals.append(residual)
        logger.debug(f"ADI step {steps}: relative residual {residual:.5e}")

        if since_compress >= cfg.compress_every:
            X = column_compress(ldl_concat([(X.L, X.D, 1.0)] + blocks, n=n), compress_tol)
            blocks = []
            since_compress = 0

        if residual <= rel_tol:
            break
        window = cfg.stagnation_window
        if (residual <= ADI_STAGNATION_FLOOR and len(report.residuals) > window
                and residual > ADI_STAGNATION_FACTOR * report.residuals[-window - 1]):
            report.stagnated = True
            break

    report.iterations = steps
    report.converged = bool(report.residuals) and report.residuals[-1] <= rel_tol
    X = column_compress(ldl_concat([(X.L, X.D, 1.0)] + blocks, n=n), compress_tol)

    if report.stagnated and not report.converged:
        logger.info(f"ADI stagnated at relative residual {report.final_residual:.3e} "
                    f"(target {rel_tol:.3e}) after {steps} steps")
    elif not report.converged:
        logger.warning(f"Prescribed relative residual tolerance was not achieved "
                       f"({report.final_residual:.3e} > {rel_tol:.3e}) after {steps} ADI steps")
    return X, report


def ale_residual(prob: AleProblem, x: LdlPair) -> float:
    """
    Frobenius norm of F^T X + X F + G S G^T in factored form.

    Uses T = [F^T L, L, G] with core diag(H(D), S).
    """
    op = prob.op
    FtL = op.apply_t(x.L)
    pair = ldl_concat([(np.hstack([FtL, x.L]), swap_core(x.D), 1.0), (prob.G, prob.S, 1.0)], n=op.n)
    return ldl_frob_norm(pair)
