"""Tests for the Newton-Kleinman stage Riccati solver."""
import numpy as np
import pytest
import scipy.sparse as sp

from factored.ldl_pair import LdlPair, ldl_to_dense
from oracle.dense_schemes import dense_newton
from problems.fdm import FdmSpec, fdm_generate
from shared.errors import NewtonDivergenceError
from solvers.riccati_newton import AreStageProblem, NewtonConfig, are_residual, newton_solve


def test_scalar_equation():
    """-2 X - X^2 + 3 = 0 has the stabilizing root X = 1."""
    prob = AreStageProblem(sp.csr_matrix([[-0.5]]), 1.0, np.array([[1.0]]),
                           LdlPair(np.array([[1.0]]), np.array([[3.0]])), LdlPair.zeros(1))
    X, report = newton_solve(prob)
    assert report.converged
    assert 1 <= report.iterations <= 10
    assert ldl_to_dense(X)[0, 0] == pytest.approx(1.0, rel=1e-9)
    assert report.residuals[-1] <= NewtonConfig().tol


def test_warm_start_at_solution():
    prob = AreStageProblem(sp.csr_matrix([[-0.5]]), 1.0, np.array([[1.0]]),
                           LdlPair(np.array([[1.0]]), np.array([[3.0]])),
                           LdlPair(np.array([[1.0]]), np.array([[1.0]])))
    X, report = newton_solve(prob)
    assert report.iterations == 0
    assert X is prob.x0


def test_zero_constant_term():
    prob = AreStageProblem(sp.csr_matrix([[-0.5]]), 1.0, np.array([[1.0]]), LdlPair.zeros(1), LdlPair.zeros(1))
    X, report = newton_solve(prob)
    assert X.k == 0
    assert report.residuals == [0.0]


def fdm_stage(scale=0.01):
    A, B, C = fdm_generate(FdmSpec(n0=6, f1=10.0, f2=2.0))
    rhs = LdlPair(C.T, np.array([[scale]]))
    return AreStageProblem(A, scale, B, rhs, LdlPair.zeros(A.shape[0]))


def test_matches_dense_newton():
    prob = fdm_stage()
    X, report = newton_solve(prob)
    n = prob.A.shape[0]
    At = prob.scale * prob.A.toarray() + prob.shift * np.eye(n)
    St = prob.scale * prob.B @ prob.B.T
    expected, _ = dense_newton(At, St, ldl_to_dense(prob.rhs), np.zeros((n, n)))
    assert report.converged
    assert report.adi_iterations > 0
    assert np.linalg.norm(ldl_to_dense(X) - expected) <= 1e-8 * np.linalg.norm(expected)


def test_residual_in_factored_form():
    prob = fdm_stage()
    rng = np.random.default_rng(3)
    L = rng.standard_normal((prob.A.shape[0], 2))
    x = LdlPair(L, np.diag([0.3, -0.1]))
    X = ldl_to_dense(x)
    n = X.shape[0]
    At = prob.scale * prob.A.toarray() + prob.shift * np.eye(n)
    St = prob.scale * prob.B @ prob.B.T
    dense = At.T @ X + X @ At - X @ St @ X + ldl_to_dense(prob.rhs)
    assert are_residual(prob, x) == pytest.approx(np.linalg.norm(dense), rel=1e-10)


def test_divergence_is_detected(monkeypatch):
    prob = AreStageProblem(sp.csr_matrix([[-0.5]]), 1.0, np.array([[1.0]]),
                           LdlPair(np.array([[1.0]]), np.array([[3.0]])), LdlPair.zeros(1))
    growing = iter(range(100))
    monkeypatch.setattr('solvers.riccati_newton.are_residual', lambda p, x: 10.0 ** next(growing))
    with pytest.raises(NewtonDivergenceError):
        newton_solve(prob, NewtonConfig(divergence_streak=3))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
