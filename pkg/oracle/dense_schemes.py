"""
Dense versions of the three peer schemes.

Small problems only; used as an independent check of the low-rank code and
to compute reference solutions.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from config.constants import DENSE_NEWTON_MAX_ITER, DENSE_NEWTON_TOL, KRONECKER_CAP, ORACLE_DENSE_CAP, STARTUP_SUBSTEPS
from factored.ldl_pair import ldl_to_dense
from integrators.coefficients import PeerCoefficients, TransformedCoefficients, builtin, transform
from integrators.startup import startup_values
from problems.dre_problem import DreProblem
from shared.errors import DenseCapError, SolverError
from shared.log import get_logger

logger = get_logger('oracle.dense_schemes')


@dataclass
class DenseState:
    """
    Dense peer window.

    Attributes:
        stages: X_{k-1,j} as n x n arrays
        t_base: Window base time (X_{k-1,j} ~ X(t_base + c_j tau))
        tau: Step size
        step: Steps taken so far
        aux: Y_{k-1,j} of the auxiliary-variable scheme, if in use
    """
    stages: list
    t_base: float
    tau: float
    step: int = 0
    aux: Optional[list] = None

    @property
    def end_time(self) -> float:
        return self.t_base + self.tau


def dense_lyap(F: np.ndarray, rhs: np.ndarray, method: str = 'auto') -> np.ndarray:
    """
    Solve F^T X + X F = -rhs.

    Args:
        F: n x n matrix
        rhs: Symmetric n x n matrix
        method: 'auto' (Bartels-Stewart) or 'kronecker' (n <= KRONECKER_CAP)

    Returns:
        Symmetric solution

    Raises:
        SolverError: Singular Lyapunov operator
        DenseCapError: Kronecker path requested above its cap
    """
    n = F.shape[0]
    if method == 'kronecker':
        if n > KRONECKER_CAP:
            raise DenseCapError(f"Kronecker Lyapunov solve limited to n <= {KRONECKER_CAP}, got {n}")
        identity = np.eye(n)
        system = np.kron(identity, F.T) + np.kron(F.T, identity)
        try:
            vec = np.linalg.solve(system, -rhs.flatten(order='F'))
        except np.linalg.LinAlgError as e:
            raise SolverError(f"singular Lyapunov operator: {e}") from e
        X = vec.reshape((n, n), order='F')
    elif method == 'auto':
        X = scipy.linalg.solve_continuous_lyapunov(F.T, -rhs)
    else:
        raise ValueError(f"unknown Lyapunov method '{method}'")

    X = 0.5 * (X + X.T)
    residual = np.linalg.norm(F.T @ X + X @ F + rhs)
    scale = 2.0 * np.linalg.norm(F) * np.linalg.norm(X) + np.linalg.norm(rhs)
    if not np.all(np.isfinite(X)) or residual > 1e-8 * max(scale, np.finfo(float).tiny):
        raise SolverError(f"singular Lyapunov operator (relative residual {residual / max(scale, 1e-300):.3e})")
    return X


def dense_riccati_op(A: np.ndarray, B: np.ndarray, C: np.ndarray, X: np.ndarray) -> np.ndarray:
    """R(X) = C^T C + A^T X + X A - X B B^T X."""
    XB = X @ B
    return C.T @ C + A.T @ X + X @ A - XB @ XB.T


def dense_newton(At: np.ndarray, St: np.ndarray, Wt: np.ndarray, X0: np.ndarray,
                 tol: float = DENSE_NEWTON_TOL, max_iter: int = DENSE_NEWTON_MAX_ITER) -> tuple[np.ndarray, int]:
    """
    Newton-Kleinman for At^T X + X At - X St X + Wt = 0.

    Returns:
        (X, iterations)
    """
    w_norm = np.linalg.norm(Wt)
    if w_norm == 0.0:
        return np.zeros_like(Wt), 0

    def residual(X):
        return np.linalg.norm(At.T @ X + X @ At - X @ St @ X + Wt) / w_norm

    X = X0
    value = residual(X)
    iterations = 0
    while value > tol and iterations < max_iter:
        X = dense_lyap(At - St @ X, Wt + X @ St @ X)
        value = residual(X)
        iterations += 1
    if value > tol:
        logger.warning(f"dense Newton stopped at relative residual {value:.3e} after {iterations} iterations")
    return X, iterations


def _dense_problem_data(problem: DreProblem):
    if problem.n > ORACLE_DENSE_CAP:
        raise DenseCapError(f"dense oracle limited to n <= {ORACLE_DENSE_CAP}, got {problem.n}")
    B, C = problem.B, problem.C
    return B, C, B @ B.T


def dense_step(scheme: str, problem: DreProblem, coeffs: PeerCoefficients, state: DenseState,
               tables: Optional[TransformedCoefficients] = None) -> DenseState:
    """
    One dense peer step with the same stage equations as the low-rank code.

    Args:
        scheme: 'implicit', 'ros-peer' or 'mod-ros-peer'
        problem: DRE (n <= ORACLE_DENSE_CAP)
        coeffs: Coefficients of matching kind
        state: Previous window
        tables: Transformed tables for 'mod-ros-peer' (computed when None)

    Returns:
        New window
    """
    B, C, BBt = _dense_problem_data(problem)
    n = problem.n
    tau = state.tau
    s = coeffs.s
    t_k = state.end_time
    identity = np.eye(n)
    previous_times = state.t_base + coeffs.c * tau
    R_prev = [dense_riccati_op(problem.A.at(t).toarray(), B, C, X) for t, X in zip(previous_times, state.stages)]

    if scheme == 'implicit':
        stages: list = []
        R_cur: list = []
        guess = state.stages[-1]
        for i in range(s):
            A_i = problem.A.at(t_k + coeffs.c[i] * tau).toarray()
            g_ii = coeffs.G[i, i]
            Wt = tau * g_ii * (C.T @ C)
            Wt = Wt + sum(coeffs.B[i, j] * state.stages[j] + tau * coeffs.A[i, j] * R_prev[j] for j in range(s))
            Wt = Wt + sum((tau * coeffs.G[i, j] * R_cur[j] for j in range(i)), np.zeros((n, n)))
            X, _ = dense_newton(tau * g_ii * A_i - 0.5 * identity, tau * g_ii * BBt, Wt, guess)
            stages.append(X)
            R_cur.append(dense_riccati_op(A_i, B, C, X))
            guess = X
        return DenseState(stages, t_k, tau, state.step + 1)

    X_k = state.stages[-1]
    A_hat = problem.A.at(t_k).toarray() - BBt @ X_k

    def jac(U):
        return A_hat.T @ U + U @ A_hat

    if scheme == 'ros-peer':
        F = tau * coeffs.gamma * A_hat - 0.5 * identity
        stages = []
        for i in range(s):
            Wt = sum(coeffs.B[i, j] * state.stages[j]
                     + tau * coeffs.A[i, j] * (R_prev[j] - jac(state.stages[j])) for j in range(s))
            Wt = Wt + sum((tau * coeffs.G[i, j] * jac(stages[j]) for j in range(i)), np.zeros((n, n)))
            stages.append(dense_lyap(F, Wt))
        return DenseState(stages, t_k, tau, state.step + 1)

    if scheme == 'mod-ros-peer':
        tables = tables or transform(coeffs)
        aux_prev = state.aux
        if aux_prev is None:
            aux_prev = [sum(coeffs.G[j, l] * state.stages[l] for l in range(j + 1)) for j in range(s)]
        F = A_hat - identity / (2.0 * tau * coeffs.gamma)
        aux: list = []
        for i in range(s):
            Wt = sum((tables.boldB[i, j] / tau) * aux_prev[j] + coeffs.A[i, j] * R_prev[j]
                     - tables.boldA[i, j] * jac(aux_prev[j]) for j in range(s))
            Wt = Wt - sum(((tables.Ginv[i, j] / tau) * aux[j] for j in range(i)), np.zeros((n, n)))
            aux.append(dense_lyap(F, Wt))
        stages = [sum(tables.Ginv[i, l] * aux[l] for l in range(i + 1)) for i in range(s)]
        return DenseState(stages, t_k, tau, state.step + 1, aux=aux)

    raise ValueError(f"unknown scheme '{scheme}'")


def dense_initial_window(problem: DreProblem, coeffs: PeerCoefficients, tau: float,
                         substeps: int = STARTUP_SUBSTEPS) -> DenseState:
    """Dense counterpart of integrators.startup.initial_window."""
    X0 = ldl_to_dense(problem.X0)
    if coeffs.s == 1:
        return DenseState([X0], problem.t0 - tau, tau)

    euler = builtin('rosenbrock-1')
    euler_tables = transform(euler)

    def one_step(X, t, h):
        return dense_step('mod-ros-peer', problem, euler, DenseState([X], t - h, h), euler_tables).stages[-1]

    values = startup_values(coeffs.c, problem.t0, tau, X0, one_step, substeps)
    return DenseState(values, problem.t0, tau)


def dense_integrate(problem: DreProblem, scheme: str, coeffs: PeerCoefficients, tau: float,
                    substeps: int = STARTUP_SUBSTEPS) -> tuple[list, list]:
    """
    Integrate a DRE densely over [t0, tf].

    Returns:
        (times, values) of the window end points, t0 first
    """
    total_steps = problem.step_count(tau)
    tables = transform(coeffs) if scheme == 'mod-ros-peer' else None
    state = dense_initial_window(problem, coeffs, tau, substeps)
    times = [problem.t0]
    values = [ldl_to_dense(problem.X0)]
    if coeffs.s > 1:
        times.append(state.end_time)
        values.append(state.stages[-1])
    for _ in range(total_steps - (1 if coeffs.s > 1 else 0)):
        state = dense_step(scheme, problem, coeffs, state, tables)
        times.append(state.end_time)
        values.append(state.stages[-1])
    return times, values
