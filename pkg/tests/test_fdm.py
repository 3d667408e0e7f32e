"""Tests for the finite-difference problem generator and presets."""
import numpy as np
import pytest
import scipy.sparse as sp

from problems.catalog import build_problem, make_ltv, scalar_problem
from problems.fdm import FdmSpec, box_indicator, fdm_generate, fdm_matrix, grid_index
from shared.errors import ProblemLoadError


def test_grid_index_runs_xi1_fastest():
    assert grid_index(0, 0, 4) == 0
    assert grid_index(1, 0, 4) == 1
    assert grid_index(0, 1, 4) == 4


def test_laplacian_diagonal():
    A = fdm_matrix(FdmSpec(n0=3))
    assert np.allclose(A.diagonal(), -64.0)
    A = fdm_matrix(FdmSpec(n0=3, f3=2.5))
    assert np.allclose(A.diagonal(), -66.5)


def test_kronecker_structure_without_convection():
    n0 = 5
    h = 1.0 / (n0 + 1)
    T = sp.diags([np.ones(n0 - 1), -2.0 * np.ones(n0), np.ones(n0 - 1)], [-1, 0, 1]) / h ** 2
    identity = sp.identity(n0)
    expected = sp.kron(identity, T) + sp.kron(T, identity)
    assert np.allclose(fdm_matrix(FdmSpec(n0=n0)).toarray(), expected.toarray())


def test_convection_signs():
    A = fdm_matrix(FdmSpec(n0=3, f1=4.0, f2=2.0)).toarray()
    # h = 1/4: 1/h^2 = 16, f1/(2h) = 8, f2/(2h) = 4
    assert A[0, 1] == pytest.approx(8.0)
    assert A[1, 0] == pytest.approx(24.0)
    assert A[0, 3] == pytest.approx(12.0)
    assert A[3, 0] == pytest.approx(20.0)
    assert A[0, 2] == 0.0


def test_boxes_and_snapping():
    B = box_indicator(3, ((0.0, 0.35), (0.0, 0.35)))
    assert np.flatnonzero(B).tolist() == [0]
    C = box_indicator(3, ((0.0, 1.0), (0.95, 1.0)))
    assert np.flatnonzero(C).tolist() == [6, 7, 8]
    with pytest.raises(ProblemLoadError):
        box_indicator(3, ((0.0, 1.0), (0.95, 1.0)), snap=False)
    with pytest.raises(ProblemLoadError):
        box_indicator(3, ((0.5, 0.5), (0.0, 1.0)))


@pytest.mark.parametrize('n0', [0, 1])
def test_grid_needs_two_points_per_direction(n0):
    with pytest.raises(ProblemLoadError):
        fdm_matrix(FdmSpec(n0=n0))
    with pytest.raises(ProblemLoadError):
        build_problem('fdm-ltv', n0=n0)
    assert fdm_matrix(FdmSpec(n0=2)).shape == (4, 4)


def test_generate_shapes():
    A, B, C = fdm_generate(FdmSpec(n0=9, f1=20.0, f2=5.0))
    assert A.shape == (81, 81)
    assert B.shape == (81, 1)
    assert C.shape == (1, 81)
    assert B.sum() == 9.0
    assert C.sum() == 9.0


def test_presets():
    ltv = build_problem('fdm-ltv')
    assert (ltv.n, ltv.m, ltv.q) == (81, 1, 1)
    assert not ltv.autonomous
    assert ltv.step_count(0.01) == 50
    lti = build_problem('fdm-ltv', n0=4)
    assert lti.n == 16
    tanh = build_problem('scalar-tanh')
    assert tanh.autonomous
    assert tanh.X0.k == 0


def test_make_ltv_scales_operator():
    problem = scalar_problem(-1.0, 1.0, 1.0, 0.0, 0.0, 1.0)
    ltv = make_ltv(problem, amplitude=0.5, frequency=2.0)
    assert ltv.A.at(0.25).toarray()[0, 0] == pytest.approx(-1.5)
    with pytest.raises(ValueError):
        ltv.step_count(0.3)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
