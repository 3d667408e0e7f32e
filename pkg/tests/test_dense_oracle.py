"""Tests for the dense oracle schemes and the reference solution."""
import numpy as np
import pytest

from config.constants import SCHEMES
from oracle.dense_schemes import dense_integrate, dense_lyap, dense_newton, dense_riccati_op
from oracle.reference import ReferenceSolution, read_reference, reference_solution, write_reference
from integrators.coefficients import builtin
from problems.catalog import build_problem
from shared.errors import DenseCapError, RichardsonError, SolverError


def stable_matrix(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)) - 2.0 * np.sqrt(n) * np.eye(n)


def test_lyapunov_methods_agree():
    F = stable_matrix(6)
    rng = np.random.default_rng(1)
    G = rng.standard_normal((6, 2))
    rhs = G @ G.T
    X = dense_lyap(F, rhs)
    assert np.allclose(X, dense_lyap(F, rhs, method='kronecker'), atol=1e-10)
    assert np.allclose(F.T @ X + X @ F, -rhs, atol=1e-10)


def test_lyapunov_errors():
    with pytest.raises(DenseCapError):
        dense_lyap(stable_matrix(61), np.eye(61), method='kronecker')
    with pytest.raises(SolverError):
        dense_lyap(np.zeros((3, 3)), np.eye(3), method='kronecker')
    with pytest.raises(ValueError):
        dense_lyap(stable_matrix(3), np.eye(3), method='schur')


def test_dense_newton_scalar():
    X, iterations = dense_newton(np.array([[-1.0]]), np.array([[1.0]]), np.array([[3.0]]), np.zeros((1, 1)))
    assert X[0, 0] == pytest.approx(1.0, rel=1e-10)
    assert iterations >= 1


def test_riccati_operator():
    A = np.array([[-1.0, 2.0], [0.0, -3.0]])
    B = np.array([[1.0], [0.5]])
    C = np.array([[1.0, 1.0]])
    X = np.array([[2.0, 0.5], [0.5, 1.0]])
    expected = C.T @ C + A.T @ X + X @ A - X @ B @ B.T @ X
    assert np.allclose(dense_riccati_op(A, B, C, X), expected)


def test_dense_scheme_on_tanh():
    problem = build_problem('scalar-tanh')
    times, values = dense_integrate(problem, 'mod-ros-peer', builtin('rosenbrock-2'), 0.01)
    assert times[-1] == pytest.approx(0.5)
    assert len(values) == 51
    assert values[-1][0, 0] == pytest.approx(np.tanh(0.5), abs=1e-4)


def test_dense_scheme_rejects_large_problems():
    problem = build_problem('fdm-lti')
    with pytest.raises(DenseCapError):
        dense_integrate(problem, 'implicit', builtin('implicit-1'), 0.01)


def test_reference_matches_tanh():
    problem = build_problem('scalar-tanh')
    reference = reference_solution(problem, [0.25, 0.5], tau_min=0.05)
    assert reference.change < 1e-9
    assert reference.at(0.25)[0, 0] == pytest.approx(np.tanh(0.25), abs=1e-9)
    assert reference.at(0.5)[0, 0] == pytest.approx(np.tanh(0.5), abs=1e-9)
    with pytest.raises(KeyError):
        reference.at(0.3)


def test_reference_gives_up():
    problem = build_problem('scalar-tanh')
    with pytest.raises(RichardsonError):
        reference_solution(problem, [0.5], tau_min=0.1, max_halvings=0)


def test_reference_dump(tmp_path):
    values = [np.array([[1.0, 2.0], [2.0, 5.0]]), np.array([[0.5, 0.0], [0.0, 0.25]])]
    reference = ReferenceSolution(np.array([0.1, 0.2]), values, 1e-4, 1e-10)
    path = str(tmp_path / 'reference.bin')
    write_reference(path, reference)
    scheme_id, loaded = read_reference(path)
    assert scheme_id == SCHEMES['mod-ros-peer']
    assert len(loaded) == 2
    assert all(np.array_equal(a, b) for a, b in zip(loaded, values))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
