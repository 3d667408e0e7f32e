"""
Factored Riccati operator R(t, X) = C^T C + A^T X + X A - X B B^T X.

For X = L D L^T the operator is T M T^T with
    T = [C^T, A^T L, L],  M = diag(I_q, [[0, D], [D, -D L^T B B^T L D]]).
The autonomous layout drops C^T (it is gathered into one block elsewhere).
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from factored.ldl_pair import LdlPair
from linops.sparse_ops import spmv_t


@dataclass(frozen=True, eq=False)
class RiccatiOpFactors:
    """
    T M T^T representation of R(t, X).

    Attributes:
        T: n x (q + 2k) factor (n x 2k without the C^T column block)
        M: Matching symmetric core
        q: Number of leading C^T columns (0 in the autonomous layout)
    """
    T: np.ndarray
    M: np.ndarray
    q: int

    @property
    def width(self) -> int:
        return self.T.shape[1]

    def pair(self) -> LdlPair:
        return LdlPair(self.T, self.M)


def quadratic_core(x: LdlPair, B: np.ndarray) -> np.ndarray:
    """D L^T B B^T L D, the k x k core of X B B^T X."""
    LtB = x.L.T @ B
    DLtB = x.D @ LtB
    return DLtB @ DLtB.T


def linear_part(A: sp.csr_matrix, x: LdlPair) -> tuple[np.ndarray, np.ndarray]:
    """Factor [A^T L, L] and core H(D) of A^T X + X A."""
    k = x.k
    core = np.zeros((2 * k, 2 * k))
    core[:k, k:] = x.D
    core[k:, :k] = x.D
    return np.hstack([spmv_t(A, x.L), x.L]), core


def riccati_op_factors(A: sp.csr_matrix, B: np.ndarray, C: np.ndarray, x: LdlPair,
                       include_output: bool = True) -> RiccatiOpFactors:
    """
    Factor R(t, X) for X = L D L^T.

    Args:
        A: System matrix at the evaluation time
        B: n x m input factor
        C: q x n output factor
        x: Current value in factored form
        include_output: Keep the leading C^T block (non-autonomous layout)

    Returns:
        RiccatiOpFactors with width q + 2k (or 2k)
    """
    T, core = linear_part(A, x)
    k = x.k
    core[k:, k:] = -quadratic_core(x, B)
    if not include_output:
        return RiccatiOpFactors(T, core, 0)
    q = C.shape[0]
    M = np.zeros((q + 2 * k, q + 2 * k))
    M[:q, :q] = np.eye(q)
    M[q:, q:] = core
    return RiccatiOpFactors(np.hstack([C.T, T]), M, q)
