"""
Sparse-plus-low-rank operators and their shifted solves.

An operator F = alpha * (M - U V^T) + sigma * I is never formed densely.
Solves with F^T + p I use a sparse LU of alpha * M^T + (sigma + p) I and a
Woodbury correction through an r x r capacitance system.
"""
from collections import OrderedDict
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from config.constants import LU_CACHE_SIZE, SHIFTED_SOLVE_REFINE_TOL
from linops.sparse_ops import as_columns, as_csr, shifted_sparse
from shared.errors import DimensionError, ShiftedSolveError
from shared.log import get_logger

logger = get_logger('linops.shifted_operator')

Shift = Union[float, complex]


def _canonical_shift(value: Shift) -> Shift:
    value = complex(value)
    return value.real if value.imag == 0.0 else value


class SparseLuCache:
    """
    Bounded cache of sparse LU factorizations of alpha * M^T + shift * I.

    Keys use the identity of M, so a cache may be shared by every operator
    built on the same sparse matrix (Newton iterates, Rosenbrock stages).
    """

    def __init__(self, max_size: int = LU_CACHE_SIZE):
        self.max_size = max_size
        self._cache: OrderedDict = OrderedDict()
        self.hits = 0
        self.misses = 0

    def factor(self, M: sp.csr_matrix, alpha: float, shift: Shift) -> spla.SuperLU:
        """
        Return a (possibly cached) factorization of alpha * M^T + shift * I.

        Raises:
            ShiftedSolveError: The shifted matrix is singular
        """
        key = (id(M), alpha, shift)
        entry = self._cache.get(key)
        if entry is not None and entry[0] is M:
            self._cache.move_to_end(key)
            self.hits += 1
            return entry[1]

        self.misses += 1
        K = shifted_sparse(M.T, alpha, shift).tocsc()
        try:
            lu = spla.splu(K)
        except RuntimeError as e:
            raise ShiftedSolveError(f"shifted matrix is singular for shift {shift}: {e}") from e

        self._cache[key] = (M, lu)
        if len(self._cache) > self.max_size:
            self._cache.popitem(last=False)
        return lu

    def clear(self):
        """Drop every cached factorization."""
        self._cache.clear()


class ShiftedOperator:
    """
    F = alpha * (M - U V^T) + sigma * I with sparse M and thin U, V.

    Attributes:
        M: n x n sparse matrix
        U: n x r
        V: n x r
        alpha: Scalar factor on the sparse-plus-low-rank part
        sigma: Diagonal shift
    """

    def __init__(self, M, U: Optional[np.ndarray] = None, V: Optional[np.ndarray] = None,
                 alpha: float = 1.0, sigma: float = 0.0, cache: Optional[SparseLuCache] = None):
        self.M = M if isinstance(M, sp.csr_matrix) else as_csr(M)
        n = self.M.shape[0]
        self.U = np.zeros((n, 0)) if U is None else as_columns(U, n)
        self.V = np.zeros((n, 0)) if V is None else as_columns(V, n)
        if self.U.shape != self.V.shape:
            raise DimensionError(f"U {self.U.shape} and V {self.V.shape} must match")
        self.alpha = float(alpha)
        self.sigma = float(sigma)
        self.cache = cache if cache is not None else SparseLuCache()
        self._woodbury: dict = {}

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Compute F x."""
        return self.alpha * (self.M @ x - self.U @ (self.V.T @ x)) + self.sigma * x

    def apply_t(self, x: np.ndarray) -> np.ndarray:
        """Compute F^T x."""
        return self.alpha * (self.M.T @ x - self.V @ (self.U.T @ x)) + self.sigma * x

    def dense(self) -> np.ndarray:
        """Dense F, for tests and small oracles."""
        return self.alpha * (self.M.toarray() - self.U @ self.V.T) + self.sigma * np.eye(self.n)

    def solve_t(self, p: Shift, b: np.ndarray) -> np.ndarray:
        """
        Solve (F^T + p I) y = b.

        Args:
            p: Real or complex shift
            b: Right-hand side, n or n x c

        Returns:
            Solution with b's shape (complex if p is complex)

        Raises:
            ShiftedSolveError: Singular system or non-finite solution
        """
        b = np.asarray(b)
        if b.shape[0] != self.n:
            raise DimensionError(f"right-hand side has {b.shape[0]} rows, operator has {self.n}")

        y = self._solve_once(p, b)
        residual = b - (self.apply_t(y) + p * y)
        b_norm = np.linalg.norm(b)
        if b_norm > 0 and np.linalg.norm(residual) > SHIFTED_SOLVE_REFINE_TOL * b_norm:
            # One sweep of iterative refinement
            y = y + self._solve_once(p, residual)

        if not np.all(np.isfinite(y)):
            raise ShiftedSolveError(f"non-finite solution for shift {p}")
        return y

    def _solve_once(self, p: Shift, b: np.ndarray) -> np.ndarray:
        total = _canonical_shift(self.sigma + p)
        lu = self.cache.factor(self.M, self.alpha, total)
        if isinstance(total, complex):
            y0 = lu.solve(b.astype(complex))
        elif np.iscomplexobj(b):
            y0 = lu.solve(b.real.astype(float)) + 1j * lu.solve(b.imag.astype(float))
        else:
            y0 = lu.solve(b.astype(float))
        if self.rank == 0:
            return y0

        Z, cap = self._woodbury_terms(total, lu)
        correction = scipy.linalg.lu_solve(cap, self.U.T @ y0)
        return y0 + Z @ correction

    def _woodbury_terms(self, total: Shift, lu: spla.SuperLU):
        # (K - P U^T)^{-1} = K^{-1} + K^{-1} P (I - U^T K^{-1} P)^{-1} U^T K^{-1}, P = alpha V
        terms = self._woodbury.get(total)
        if terms is not None:
            return terms
        P = self.alpha * self.V
        Z = lu.solve(P.astype(complex) if isinstance(total, complex) else P)
        capacitance = np.eye(self.rank) - self.U.T @ Z
        try:
            cap = scipy.linalg.lu_factor(capacitance, check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as e:
            raise ShiftedSolveError(f"capacitance system failed for shift {total}: {e}") from e
        if np.any(np.diag(cap[0]) == 0):
            raise ShiftedSolveError(f"singular capacitance matrix for shift {total}")
        self._woodbury[total] = (Z, cap)
        return Z, cap

    def __repr__(self) -> str:
        return f"ShiftedOperator(n={self.n}, rank={self.rank}, alpha={self.alpha}, sigma={self.sigma})"


def shifted_solve(op: ShiftedOperator, p: Shift, b: np.ndarray) -> np.ndarray:
    """Solve (F^T + p I) y = b; see ShiftedOperator.solve_t."""
    return op.solve_t(p, b)
