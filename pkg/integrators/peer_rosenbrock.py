"""
Rosenbrock-type peer schemes for DREs, in the standard form and in the
auxiliary-variable (modified) form.

Both linearize around X_k = X_{k-1,s} with the closed-loop matrix
A^_k = A(t_k) - B B^T X_k, so every stage is a single Lyapunov equation with
the same operator; the ADI shifts are computed once per step.

Standard stage i:   A~ = tau gamma A^_k - I/2,       unknown X_{k,i}
Modified stage i:   A~ = A^_k - I/(2 tau gamma),     unknown Y_{k,i} = sum_{j<=i} g_ij X_{k,j}
"""
import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp

from factored.ldl_pair import LdlPair, column_compress, ldl_concat, swap_core
from integrators.coefficients import PeerCoefficients, TransformedCoefficients, transform
from integrators.riccati_factors import linear_part, quadratic_core, riccati_op_factors
from integrators.stepping import AuxWindow, PeerState, StageReport, StepOptions, combine_stages
from linops.shifted_operator import ShiftedOperator, SparseLuCache
from linops.sparse_ops import shifted_sparse, spmv_t
from problems.dre_problem import DreProblem
from shared.errors import SolverError, StageSolveError, StructureError
from shared.log import get_logger, log_event
from solvers.adi_shifts import compute_shifts
from solvers.lyap_adi import AleProblem, adi_solve

logger = get_logger('integrators.peer_rosenbrock')


def _hswap(m: int) -> np.ndarray:
    return swap_core(np.eye(m))


def standard_rhs_width(coeffs: PeerCoefficients, i: int, q: int, m: int, previous_ranks: list,
                       current_ranks: list, autonomous: bool) -> int:
    """
    Closed-form column count of the standard scheme's stage factor (i 0-based).

    Non-autonomous: 2 sum_{j<i} n_{k,j} + 2 sum_{j<s} n_{k-1,j} + n_{L_k} + s q + 2 m
    Autonomous:     2 sum_{j<i} n_{k,j} + sum_{j<=s} n_{k-1,j} + q + 2 m
    """
    s = coeffs.s
    current = 2 * sum(current_ranks[:i])
    if autonomous:
        return current + sum(previous_ranks) + q + 2 * m
    return current + 2 * sum(previous_ranks[:s - 1]) + previous_ranks[-1] + s * q + 2 * m


def modified_rhs_width(coeffs: PeerCoefficients, i: int, q: int, m: int, aux_ranks: list,
                       previous_ranks: list, current_aux_ranks: list, autonomous: bool) -> int:
    """
    Closed-form column count of the modified scheme's stage factor (i 0-based).

    Non-autonomous: sum_{j<i} n^_{k,j} + 2 sum_{j<=s} (n^_{k-1,j} + n_{k-1,j}) + s q + 2 m
    Autonomous:     sum_{j<i} n^_{k,j} + sum_{j<=s} n^_{k-1,j} + q + (s + 1) m
    """
    s = coeffs.s
    current = sum(current_aux_ranks[:i])
    if autonomous:
        return current + sum(aux_ranks) + q + (s + 1) * m
    return current + 2 * (sum(aux_ranks) + sum(previous_ranks)) + s * q + 2 * m


def stage_operator(A_k: sp.csr_matrix, B: np.ndarray, XkB: np.ndarray, alpha: float, sigma: float,
                   cache: Optional[SparseLuCache] = None) -> ShiftedOperator:
    """alpha * (A_k - B (X_k B)^T) + sigma * I."""
    return ShiftedOperator(A_k, U=B, V=XkB, alpha=alpha, sigma=sigma, cache=cache)


def assemble_standard_rhs(problem: DreProblem, coeffs: PeerCoefficients, state: PeerState, i: int,
                          current: list, A_k: sp.csr_matrix, autonomous: bool) -> LdlPair:
    """
    Stage factor of the standard scheme (i 0-based).

    Non-autonomous column order:
        [T_{k,1..i-1} | X_k B, K | T^_{k,i,1..s-1} | C^T | L_k]
    with T_{k,j} = [A_k^T L, L] (core tau g_ij H(D)), the swap core H(I_m) on
    [X_k B, K], T^ = [C^T, A^^T L, L] with A^ = tau a_ij (A_{k-1,j} - A_k) + b_ij/2 I
    (core diag(tau a_ij I_q, [[0, D], [D, -tau a_ij D L^T B B^T L D]])),
    tau a_is I_q on C^T and b_is D_k on L_k. The autonomous layout merges the C^T
    blocks (weight tau sum_j a_ij) and keeps only L_{k-1,j} with
    core b_ij D - tau a_ij D L^T B B^T L D.
    """
    tau = state.tau
    B, C = problem.B, problem.C
    s = coeffs.s
    a, b, g = coeffs.A[i], coeffs.B[i], coeffs.G[i]
    x_k = state.stages[-1]
    XkB = x_k.times(B)

    K = (a[s - 1] / 2.0) * XkB
    for j in range(s - 1):
        K = K + a[j] * state.stages[j].times(B)
    for j in range(i):
        K = K - g[j] * current[j].times(B)
    K = tau * K

    parts = []
    for j in range(i):
        T, core = linear_part(A_k, current[j])
        parts.append((T, core, tau * g[j]))
    parts.append((np.hstack([XkB, K]), _hswap(problem.m), 1.0))

    if autonomous:
        parts.append((C.T, 1.0, tau * np.sum(a)))
        for j in range(s - 1):
            x = state.stages[j]
            parts.append((x.L, b[j] * x.D - tau * a[j] * quadratic_core(x, B), 1.0))
    else:
        times = state.stage_times(coeffs.c)
        for j in range(s - 1):
            x = state.stages[j]
            k = x.k
            A_check = shifted_sparse(problem.A.at(times[j]) - A_k, tau * a[j], b[j] / 2.0)
            AhatL = spmv_t(A_check, x.L)
            q = C.shape[0]
            core = np.zeros((q + 2 * k, q + 2 * k))
            core[:q, :q] = tau * a[j] * np.eye(q)
            core[q:, q:] = swap_core(x.D)
            core[q + k:, q + k:] = -tau * a[j] * quadratic_core(x, B)
            parts.append((np.hstack([C.T, AhatL, x.L]), core, 1.0))
        parts.append((C.T, 1.0, tau * a[s - 1]))

    parts.append((x_k.L, x_k.D, b[s - 1]))
    return ldl_concat(parts, n=problem.n)


def standard_step(problem: DreProblem, coeffs: PeerCoefficients, state: PeerState,
                  options: Optional[StepOptions] = None,
                  autonomous: Optional[bool] = None) -> tuple[PeerState, list]:
    """
    Advance the window by one standard Rosenbrock-type peer step.

    Args:
        problem: DRE
        coeffs: Rosenbrock-type coefficients (constant diagonal gamma)
        state: Window X_{k-1,1..s}
        options: Solver settings
        autonomous: Layout override, defaults to the problem's

    Returns:
        (new window, stage reports)

    Raises:
        StageSolveError: A stage solve failed
        StructureError: Assembled width differs from the closed form
    """
    options = options or StepOptions()
    autonomous = problem.autonomous if autonomous is None else autonomous
    tau = state.tau
    step = state.step + 1
    t_k = state.end_time
    A_k = problem.A.at(t_k)
    x_k = state.stages[-1]
    op = stage_operator(A_k, problem.B, x_k.times(problem.B), tau * coeffs.gamma, -0.5, SparseLuCache())
    shifts = _step_shifts(op, options, step)
    previous_ranks = [x.k for x in state.stages]

    stages: list = []
    reports: list = []
    for i in range(coeffs.s):
        rhs = assemble_standard_rhs(problem, coeffs, state, i, stages, A_k, autonomous)
        expected = standard_rhs_width(coeffs, i, problem.q, problem.m, previous_ranks,
                                      [x.k for x in stages], autonomous)
        _check_width(rhs, expected, i)
        x, report = _solve_stage(op, column_compress(rhs, options.compress_tol), options, shifts, step, i)
        stages.append(x)
        reports.append(_stage_report(step, i, t_k + coeffs.c[i] * tau, x, expected, report))

    return PeerState(stages, t_k, tau, step), reports


def assemble_modified_rhs(problem: DreProblem, coeffs: PeerCoefficients, tc: TransformedCoefficients,
                          window: AuxWindow, i: int, current_aux: list, A_k: sp.csr_matrix,
                          autonomous: bool) -> LdlPair:
    """
    Stage factor of the auxiliary-variable scheme (i 0-based).

    Non-autonomous column order:
        [T^_{k-1,i,1..s} | X_k B, K | T_{k-1,1..s-1} | C^T | A_k^T L_k, L_k | L^_{k,1..i-1}]
    with T^ = [A^^T L^, L^], A^ = a_ij A_k - b_ij/(2 tau) I (bold tables), core -H(D^);
    Riccati factors of X_{k-1,j} weighted a_ij; a_is I_q; a_is H(D_k); and
    -g_ij/tau D^_{k,j} (bold G). Autonomous:
        [C^T | X_{k-1,1..s-1} B | X_k B, K | L^_{k-1,1..s} | L^_{k,1..i-1}]
    with cores sum_j a_ij I_q, -a_ij I_m, H(I_m), b_ij/tau D^, -g_ij/tau D^.
    K = (sum_j a_ij Y_{k-1,j} - a_is/2 X_k) B with the bold A table.
    """
    tau = window.tau
    B, C = problem.B, problem.C
    s = coeffs.s
    m = problem.m
    a = coeffs.A[i]
    bold_a, bold_b, bold_g = tc.boldA[i], tc.boldB[i], tc.Ginv[i]
    x_k = window.stages[-1]
    XkB = x_k.times(B)

    K = -(a[s - 1] / 2.0) * XkB
    for j in range(s):
        K = K + bold_a[j] * window.aux[j].times(B)

    parts = []
    if autonomous:
        parts.append((C.T, 1.0, np.sum(a)))
        for j in range(s - 1):
            parts.append((window.stages[j].times(B), 1.0, -a[j]))
        parts.append((np.hstack([XkB, K]), _hswap(m), 1.0))
        for j in range(s):
            y = window.aux[j]
            parts.append((y.L, y.D, bold_b[j] / tau))
    else:
        for j in range(s):
            y = window.aux[j]
            A_check = shifted_sparse(A_k, bold_a[j], -bold_b[j] / (2.0 * tau))
            AhatL = spmv_t(A_check, y.L)
            parts.append((np.hstack([AhatL, y.L]), swap_core(y.D), -1.0))
        parts.append((np.hstack([XkB, K]), _hswap(m), 1.0))
        times = window.t_base + coeffs.c * tau
        for j in range(s - 1):
            f = riccati_op_factors(problem.A.at(times[j]), B, C, window.stages[j], include_output=True)
            parts.append((f.T, f.M, a[j]))
        parts.append((C.T, 1.0, a[s - 1]))
        T, core = linear_part(A_k, x_k)
        parts.append((T, core, a[s - 1]))

    for j in range(i):
        y = current_aux[j]
        parts.append((y.L, y.D, -bold_g[j] / tau))
    return ldl_concat(parts, n=problem.n)


def modified_step(problem: DreProblem, coeffs: PeerCoefficients, window: AuxWindow,
                  options: Optional[StepOptions] = None, autonomous: Optional[bool] = None,
                  tc: Optional[TransformedCoefficients] = None) -> tuple[AuxWindow, list]:
    """
    Advance the auxiliary-variable window by one step.

    The stage unknowns are Y_{k,i}; afterwards X_{k,i} = sum_{l<=i} (G^{-1})_il Y_{k,l}.

    Args:
        problem: DRE
        coeffs: Rosenbrock-type coefficients
        window: Y and X values of the previous step
        options: Solver settings
        autonomous: Layout override, defaults to the problem's
        tc: Transformed tables (computed when None)

    Returns:
        (new window, stage reports)
    """
    options = options or StepOptions()
    autonomous = problem.autonomous if autonomous is None else autonomous
    tc = tc or transform(coeffs)
    tau = window.tau
    step = window.step + 1
    t_k = window.end_time
    A_k = problem.A.at(t_k)
    x_k = window.stages[-1]
    op = stage_operator(A_k, problem.B, x_k.times(problem.B), 1.0, -1.0 / (2.0 * tau * coeffs.gamma),
                        SparseLuCache())
    shifts = _step_shifts(op, options, step)
    aux_ranks = [y.k for y in window.aux]
    previous_ranks = [x.k for x in window.stages]

    aux: list = []
    reports: list = []
    for i in range(coeffs.s):
        rhs = assemble_modified_rhs(problem, coeffs, tc, window, i, aux, A_k, autonomous)
        expected = modified_rhs_width(coeffs, i, problem.q, problem.m, aux_ranks, previous_ranks,
                                      [y.k for y in aux], autonomous)
        _check_width(rhs, expected, i)
        y, report = _solve_stage(op, column_compress(rhs, options.compress_tol), options, shifts, step, i)
        aux.append(y)
        reports.append(_stage_report(step, i, t_k + coeffs.c[i] * tau, y, expected, report))

    stages = combine_stages(tc.Ginv, aux, options.compress_tol)
    for report, x in zip(reports, stages):
        report.rank = x.k
    return AuxWindow(aux, stages, t_k, tau, step), reports


def _step_shifts(op: ShiftedOperator, options: StepOptions, step: int) -> list:
    try:
        return compute_shifts(op, options.adi.shift_count)
    except SolverError as e:
        raise StageSolveError(f"shift computation failed: {e}", step=step, stage=1) from e


def _check_width(rhs: LdlPair, expected: int, i: int):
    if rhs.k != expected:
        raise StructureError(f"stage {i + 1}: right-hand side has {rhs.k} columns, expected {expected}")


def _solve_stage(op: ShiftedOperator, rhs: LdlPair, options: StepOptions, shifts: list, step: int, i: int):
    try:
        x, report = adi_solve(AleProblem.from_pair(op, rhs), options.adi, shifts)
    except SolverError as e:
        raise StageSolveError(str(e), step=step, stage=i + 1) from e
    return column_compress(x, options.compress_tol), report


def _stage_report(step: int, i: int, t: float, x: LdlPair, columns: int, report) -> StageReport:
    log_event(logger, 'stage', level=logging.DEBUG, step=step, stage=i + 1, rank=x.k, columns=columns,
              adi=report.iterations, residual=report.final_residual)
    return StageReport(step=step, stage=i + 1, time=float(t), rank=x.k, rhs_columns=columns,
                       newton_iterations=0, adi_iterations=report.iterations,
                       residual=report.final_residual, converged=report.converged)
