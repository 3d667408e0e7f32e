"""
Implicit two-step peer scheme for DREs.

Stage i of step k solves the Riccati equation
    A~^T X + X A~ - X S~ X + W~ = 0,
    A~ = tau g_ii A(t_ki) - I/2,   S~ = tau g_ii B B^T,
    W~ = tau g_ii C^T C + sum_j b_ij X_{k-1,j} + tau sum_j a_ij R(X_{k-1,j})
         + tau sum_{j<i} g_ij R(X_{k,j}),
with W~ assembled as one LDL^T factor from the stored Riccati factors.
"""
import logging
from typing import Optional

import numpy as np

from factored.ldl_pair import LdlPair, column_compress, ldl_concat
from integrators.coefficients import PeerCoefficients
from integrators.riccati_factors import RiccatiOpFactors, riccati_op_factors
from integrators.stepping import PeerState, StageReport, StepOptions
from linops.shifted_operator import SparseLuCache
from problems.dre_problem import DreProblem
from shared.errors import SolverError, StageSolveError, StructureError
from shared.log import get_logger, log_event
from solvers.riccati_newton import AreStageProblem, newton_solve

logger = get_logger('integrators.peer_implicit')


def implicit_rhs_width(coeffs: PeerCoefficients, i: int, q: int, m: int, previous_ranks: list,
                       current_ranks: list, autonomous: bool) -> int:
    """
    Closed-form column count of the stage right-hand side including the Newton block.

    Non-autonomous: (s + i) q + 3 sum_j n_{k-1,j} + 2 sum_{j<i} n_{k,j} + m
    Autonomous:     q + 3 sum_j n_{k-1,j} + 2 sum_{j<i} n_{k,j} + m
    (i is 1-based in these formulas.)
    """
    s = coeffs.s
    stage_number = i + 1
    leading = q if autonomous else (s + stage_number) * q
    return leading + 3 * sum(previous_ranks) + 2 * sum(current_ranks[:i]) + m


def window_factors(problem: DreProblem, state: PeerState, coeffs: PeerCoefficients,
                   include_output: bool) -> list:
    """Riccati factors of the window stages, reusing the cached ones when the layout matches."""
    if state.factors is not None and state.factors_layout == include_output:
        return state.factors
    times = state.stage_times(coeffs.c)
    return [riccati_op_factors(problem.A.at(t), problem.B, problem.C, x, include_output)
            for t, x in zip(times, state.stages)]


def assemble_implicit_rhs(problem: DreProblem, coeffs: PeerCoefficients, state: PeerState, i: int,
                          current_factors: list, newton_iterate: Optional[LdlPair] = None,
                          autonomous: Optional[bool] = None, previous_factors: Optional[list] = None) -> LdlPair:
    """
    Assemble W~ (and optionally the Newton block) for stage i (0-based).

    Column order: [C^T | L_{k-1,1..s} | T_{k-1,1..s} | T_{k,1..i-1} | X B], cores
    diag(tau g_ii I_q, b_ij D_{k-1,j}, tau a_ij M_{k-1,j}, tau g_ij M_{k,j}, tau g_ii I_m).
    In the autonomous layout the T blocks carry no C^T columns and the single
    C^T block has weight tau (sum_j a_ij + sum_{j<=i} g_ij).

    Args:
        problem: DRE
        coeffs: Implicit peer coefficients
        state: Window of the previous step
        i: Stage index (0-based)
        current_factors: Riccati factors of the stages already solved in this step
        newton_iterate: If given, append X B with core tau g_ii I_m
        autonomous: Layout override, defaults to the problem's
        previous_factors: Riccati factors of the window (computed when None)

    Returns:
        Uncompressed LdlPair
    """
    autonomous = problem.autonomous if autonomous is None else autonomous
    tau = state.tau
    B, C = problem.B, problem.C
    a, b, g = coeffs.A[i], coeffs.B[i], coeffs.G[i]
    if previous_factors is None:
        previous_factors = window_factors(problem, state, coeffs, not autonomous)

    if autonomous:
        output_weight = tau * (np.sum(a) + np.sum(g[:i + 1]))
    else:
        output_weight = tau * g[i]
    parts = [(C.T, 1.0, output_weight)]
    parts += [(x.L, x.D, b[j]) for j, x in enumerate(state.stages)]
    parts += [(f.T, f.M, tau * a[j]) for j, f in enumerate(previous_factors)]
    parts += [(f.T, f.M, tau * g[j]) for j, f in enumerate(current_factors[:i])]
    if newton_iterate is not None:
        parts.append((newton_iterate.times(B), 1.0, tau * g[i]))
    return ldl_concat(parts, n=problem.n)


def implicit_peer_step(problem: DreProblem, coeffs: PeerCoefficients, state: PeerState,
                       options: Optional[StepOptions] = None,
                       autonomous: Optional[bool] = None) -> tuple[PeerState, list]:
    """
    Advance the window by one implicit peer step.

    Stage i warm-starts Newton from stage i-1 (stage 1 from X_{k-1,s}).

    Args:
        problem: DRE
        coeffs: Implicit peer coefficients
        state: Window X_{k-1,1..s}
        options: Solver settings
        autonomous: Layout override, defaults to the problem's

    Returns:
        (new window, stage reports)

    Raises:
        StageSolveError: A stage solve failed (carries step and stage)
        StructureError: Assembled width differs from the closed form
    """
    options = options or StepOptions()
    autonomous = problem.autonomous if autonomous is None else autonomous
    include_output = not autonomous
    tau = state.tau
    step = state.step + 1
    t_new = state.t_base + tau
    previous_factors = window_factors(problem, state, coeffs, include_output)
    previous_ranks = [x.k for x in state.stages]
    cache = SparseLuCache()

    stages: list = []
    factors: list[RiccatiOpFactors] = []
    reports: list = []
    guess = state.stages[-1]
    for i in range(coeffs.s):
        t_stage = t_new + coeffs.c[i] * tau
        A_stage = problem.A.at(t_stage)
        rhs = assemble_implicit_rhs(problem, coeffs, state, i, factors, autonomous=autonomous,
                                    previous_factors=previous_factors)
        expected = implicit_rhs_width(coeffs, i, problem.q, problem.m, previous_ranks,
                                      [x.k for x in stages], autonomous)
        if rhs.k + problem.m != expected:
            raise StructureError(f"stage {i + 1}: right-hand side has {rhs.k + problem.m} columns, "
                                 f"expected {expected}")
        rhs = column_compress(rhs, options.compress_tol)

        stage_problem = AreStageProblem(A_stage, tau * coeffs.G[i, i], problem.B, rhs, guess)
        try:
            x, newton_report = newton_solve(stage_problem, options.newton, cache)
        except SolverError as e:
            raise StageSolveError(str(e), step=step, stage=i + 1) from e

        stages.append(x)
        factors.append(riccati_op_factors(A_stage, problem.B, problem.C, x, include_output))
        reports.append(StageReport(step=step, stage=i + 1, time=float(t_stage), rank=x.k, rhs_columns=expected,
                                   newton_iterations=newton_report.iterations,
                                   adi_iterations=newton_report.adi_iterations,
                                   residual=newton_report.residuals[-1], converged=newton_report.converged))
        log_event(logger, 'stage', level=logging.DEBUG, step=step, stage=i + 1, rank=x.k, columns=expected,
                  newton=newton_report.iterations, adi=newton_report.adi_iterations,
                  residual=newton_report.residuals[-1])
        guess = x

    new_state = PeerState(stages, t_new, tau, step, factors=factors, factors_layout=include_output)
    return new_state, reports
