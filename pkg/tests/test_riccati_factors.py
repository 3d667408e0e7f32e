"""Tests for the factored Riccati operator T M T^T against dense evaluation."""
import numpy as np
import pytest
import scipy.sparse as sp

from factored.ldl_pair import LdlPair, ldl_to_dense
from integrators.riccati_factors import linear_part, quadratic_core, riccati_op_factors
from oracle.dense_schemes import dense_riccati_op


def random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 31))
    k = int(rng.integers(1, min(n, 6) + 1))
    m = int(rng.integers(1, 4))
    q = int(rng.integers(1, 4))
    D = rng.standard_normal((k, k))
    x = LdlPair(rng.standard_normal((n, k)), D + D.T)
    A = sp.csr_matrix(rng.standard_normal((n, n)))
    return A, rng.standard_normal((n, m)), rng.standard_normal((q, n)), x


@pytest.mark.parametrize('seed', range(100))
def test_factors_reproduce_dense_operator(seed):
    A, B, C, x = random_instance(seed)
    X = ldl_to_dense(x)
    expected = dense_riccati_op(A.toarray(), B, C, X)

    full = riccati_op_factors(A, B, C, x)
    assert full.width == C.shape[0] + 2 * x.k
    assert np.linalg.norm(ldl_to_dense(full.pair()) - expected) <= 1e-12 * np.linalg.norm(expected)

    packed = riccati_op_factors(A, B, C, x, include_output=False)
    assert packed.q == 0
    assert packed.width == 2 * x.k
    without_output = expected - C.T @ C
    assert np.linalg.norm(ldl_to_dense(packed.pair()) - without_output) <= 1e-12 * np.linalg.norm(without_output)


def test_linear_and_quadratic_parts():
    A, B, C, x = random_instance(7)
    X = ldl_to_dense(x)
    T, core = linear_part(A, x)
    assert np.allclose(T @ core @ T.T, A.toarray().T @ X + X @ A.toarray())
    XB = X @ B
    assert np.allclose(x.L @ quadratic_core(x, B) @ x.L.T, XB @ XB.T)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
