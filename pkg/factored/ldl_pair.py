"""
Symmetric low-rank factorizations X = L D L^T.

Holds the LdlPair value type plus the operations every solver builds on:
weighted concatenation, column compression and Frobenius norms computed
without forming the n x n matrix.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from config.constants import DENSE_CAP
from shared.errors import DenseCapError, DimensionError


Weight = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class LdlPair:
    """
    Symmetric matrix in factored form X = L D L^T.

    Attributes:
        L: n x k factor
        D: k x k symmetric core (stored symmetrized)
    """
    L: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        if L.ndim != 2 or D.ndim != 2:
            raise DimensionError("L and D must be two-dimensional")
        if D.shape != (L.shape[1], L.shape[1]):
            raise DimensionError(f"core {D.shape} does not match factor with {L.shape[1]} columns")
        D = 0.5 * (D + D.T)
        L = L.copy()
        L.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, 'L', L)
        object.__setattr__(self, 'D', D)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def k(self) -> int:
        return self.L.shape[1]

    @staticmethod
    def zeros(n: int) -> 'LdlPair':
        """Empty factorization of the n x n zero matrix."""
        return LdlPair(np.zeros((n, 0)), np.zeros((0, 0)))

    @staticmethod
    def from_dense(X: np.ndarray, rel_tol: float = 0.0) -> 'LdlPair':
        """
        Factor a dense symmetric matrix through its eigendecomposition.

        Args:
            X: Symmetric n x n matrix
            rel_tol: Drop eigenvalues with |lambda| <= rel_tol * max |lambda|

        Returns:
            LdlPair with orthonormal L and diagonal D
        """
        X = np.asarray(X, dtype=float)
        w, V = np.linalg.eigh(0.5 * (X + X.T))
        if w.size == 0 or np.max(np.abs(w)) == 0.0:
            return LdlPair.zeros(X.shape[0])
        keep = np.abs(w) > rel_tol * np.max(np.abs(w))
        return LdlPair(V[:, keep], np.diag(w[keep]))

    def scaled(self, alpha: float) -> 'LdlPair':
        """Return alpha * X (same factor, scaled core)."""
        return LdlPair(self.L, alpha * self.D)

    def times(self, M: np.ndarray) -> np.ndarray:
        """Compute X @ M as L (D (L^T M)) without forming X."""
        return self.L @ (self.D @ (self.L.T @ M))

    def save(self, path: str, t: float = 0.0):
        """Write the factors to an .npz file."""
        np.savez(path, L=self.L, D=self.D, t=np.array(t))

    @staticmethod
    def load(path: str) -> tuple['LdlPair', float]:
        """Read factors written by save(); returns (pair, time)."""
        with np.load(path) as data:
            return LdlPair(data['L'], data['D']), float(data['t'])

    def __repr__(self) -> str:
        return f"LdlPair(n={self.n}, k={self.k})"


@dataclass(frozen=True)
class SwapCore:
    """
    The 2p x 2p block core H(I_p) = [[0, I_p], [I_p, 0]].

    [P, Q] H(I) [P, Q]^T equals P Q^T + Q P^T.
    """
    p: int

    def matrix(self, block: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Dense core, H(I_p) or H(block) = [[0, block], [block, 0]].

        Args:
            block: Optional p x p symmetric block replacing I_p
        """
        block = np.eye(self.p) if block is None else np.asarray(block, dtype=float)
        zero = np.zeros_like(block)
        return np.block([[zero, block], [block, zero]])


def swap_core(block: np.ndarray) -> np.ndarray:
    """Shortcut for SwapCore(len(block)).matrix(block)."""
    block = np.atleast_2d(np.asarray(block, dtype=float))
    return SwapCore(block.shape[0]).matrix(block)


def ldl_concat(parts: Sequence[tuple[np.ndarray, Union[np.ndarray, float], Weight]], n: Optional[int] = None) -> LdlPair:
    """
    Represent sum_i L_i (w_i D_i) L_i^T as one factorization.

    Parts with zero columns are skipped. A weight is either a scalar or a
    matrix conformable with D_i (applied as w_i @ D_i).

    Args:
        parts: Sequence of (L_i, D_i, w_i); D_i may be a scalar for identity cores
        n: Row count, required only if every part is empty

    Returns:
        LdlPair with horizontally stacked L and block-diagonal D (no compression)

    Raises:
        DimensionError: Row counts differ or a core/weight does not fit its factor
    """
    factors = []
    cores = []
    for index, (L, D, weight) in enumerate(parts):
        L = np.asarray(L, dtype=float)
        if L.ndim == 1:
            L = L[:, None]
        if n is None:
            n = L.shape[0]
        elif L.shape[0] != n:
            raise DimensionError(f"part {index} has {L.shape[0]} rows, expected {n}")
        k = L.shape[1]
        if np.isscalar(D) or np.ndim(D) == 0:
            core = float(D) * np.eye(k)
        else:
            core = np.atleast_2d(np.asarray(D, dtype=float))
        if core.shape != (k, k):
            raise DimensionError(f"part {index}: core {core.shape} does not fit {k} columns")
        if np.isscalar(weight) or np.ndim(weight) == 0:
            core = float(weight) * core
        else:
            weight = np.atleast_2d(np.asarray(weight, dtype=float))
            if weight.shape != (k, k):
                raise DimensionError(f"part {index}: weight {weight.shape} does not fit {k} columns")
            core = weight @ core
        if k == 0:
            continue
        factors.append(L)
        cores.append(core)

    if n is None:
        raise DimensionError("cannot infer the row count of an empty concatenation")
    if not factors:
        return LdlPair.zeros(n)
    return LdlPair(np.hstack(factors), scipy.linalg.block_diag(*cores))


def column_compress(x: LdlPair, rel_tol: Optional[float] = None) -> LdlPair:
    """
    Remove linearly dependent and negligible directions from a factorization.

    A pivoted QR of L projects the core to R D R^T; eigenvalues with
    |lambda| <= rel_tol * max|lambda| / sqrt(n) are dropped, so the discarded
    part has Frobenius norm at most rel_tol * ||X||_F and compressing twice
    changes nothing.

    Args:
        x: Factorization to compress
        rel_tol: Relative tolerance, defaults to n * machine epsilon

    Returns:
        LdlPair with orthonormal L and diagonal D, no more columns than x
    """
    n, k = x.n, x.k
    if k == 0:
        return x
    if rel_tol is None:
        rel_tol = n * np.finfo(float).eps

    Q, R, perm = scipy.linalg.qr(x.L, mode='economic', pivoting=True)
    R_cols = np.empty_like(R)
    R_cols[:, perm] = R
    core = R_cols @ x.D @ R_cols.T
    w, V = np.linalg.eigh(0.5 * (core + core.T))

    w_max = np.max(np.abs(w)) if w.size else 0.0
    if w_max == 0.0:
        return LdlPair.zeros(n)
    keep = np.abs(w) > rel_tol * w_max / np.sqrt(n)
    return LdlPair(Q @ V[:, keep], np.diag(w[keep]))


def ldl_frob_norm(x: LdlPair) -> float:
    """
    Frobenius norm of L D L^T from a thin QR of L.

    ||L D L^T||_F = ||R D R^T||_F with L = Q R, at O(n k^2) cost.
    """
    if x.k == 0:
        return 0.0
    R = np.linalg.qr(x.L, mode='r')
    return float(np.linalg.norm(R @ x.D @ R.T, 'fro'))


def ldl_diff_norm(x: LdlPair, y: LdlPair) -> float:
    """Frobenius norm of X - Y evaluated in factored form."""
    if x.n != y.n:
        raise DimensionError(f"cannot compare {x.n} x {x.n} with {y.n} x {y.n}")
    return ldl_frob_norm(ldl_concat([(x.L, x.D, 1.0), (y.L, y.D, -1.0)], n=x.n))


def ldl_to_dense(x: LdlPair, cap: int = DENSE_CAP) -> np.ndarray:
    """
    Form the dense matrix L D L^T.

    Raises:
        DenseCapError: n exceeds cap
    """
    if x.n > cap:
        raise DenseCapError(f"refusing to densify a {x.n} x {x.n} matrix (cap {cap})")
    X = x.L @ x.D @ x.L.T
    return 0.5 * (X + X.T)
