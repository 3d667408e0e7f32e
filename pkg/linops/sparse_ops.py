"""
Sparse matrix helpers and time-dependent system operators.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from shared.errors import DimensionError


def as_csr(matrix) -> sp.csr_matrix:
    """
    Convert anything scipy understands into canonical CSR (sorted, no duplicates).

    Args:
        matrix: Dense array or any scipy sparse matrix

    Returns:
        CSR matrix with float entries
    """
    csr = sp.csr_matrix(matrix, dtype=float)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


def spmv_t(a: sp.csr_matrix, x: np.ndarray) -> np.ndarray:
    """
    Compute A^T x for a vector or a block of columns.

    Raises:
        DimensionError: x does not have A's row count
    """
    x = np.asarray(x)
    if x.shape[0] != a.shape[0]:
        raise DimensionError(f"A^T x: A has {a.shape[0]} rows, x has {x.shape[0]}")
    return np.asarray(a.T @ x)


def as_columns(x, n: int) -> np.ndarray:
    """
    View a vector or block of columns as an n x c float array (c may be 0).

    Raises:
        DimensionError: x does not have n rows
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != n:
        raise DimensionError(f"expected {n} rows, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class Sinusoid:
    """Scalar factor mu(t) = amplitude * sin(frequency * pi * t) + 1."""
    amplitude: float
    frequency: float

    def __call__(self, t: float) -> float:
        return self.amplitude * math.sin(self.frequency * math.pi * t) + 1.0


class TimeVaryingOperator:
    """
    System matrix A(t) in one of three modes.

    'constant': A(t) = A0, returned as the same object at every t
    'scaled':   A(t) = mu(t) * A0
    'general':  A(t) = provider(t)

    Attributes:
        base: A0 (for 'general', provider(t0) evaluated once for shape checks)
        mode: One of 'constant', 'scaled', 'general'
        horizon: Optional (t_start, t_end) outside of which evaluation fails
    """

    def __init__(self, base, mode: str = 'constant', mu: Optional[Callable[[float], float]] = None,
                 provider: Optional[Callable[[float], object]] = None,
                 horizon: Optional[tuple[float, float]] = None):
        if mode not in ('constant', 'scaled', 'general'):
            raise ValueError(f"unknown operator mode '{mode}'")
        if mode == 'scaled' and mu is None:
            raise ValueError("scaled operator needs mu(t)")
        if mode == 'general' and provider is None:
            raise ValueError("general operator needs a provider")
        self.base = as_csr(base)
        if self.base.shape[0] != self.base.shape[1]:
            raise DimensionError(f"system matrix must be square, got {self.base.shape}")
        self.mode = mode
        self.mu = mu
        self.provider = provider
        self.horizon = horizon

    @property
    def n(self) -> int:
        return self.base.shape[0]

    @property
    def autonomous(self) -> bool:
        return self.mode == 'constant'

    def at(self, t: float) -> sp.csr_matrix:
        """Evaluate A(t); see eval_operator."""
        return eval_operator(self, t)

    def __repr__(self) -> str:
        return f"TimeVaryingOperator(n={self.n}, mode={self.mode})"


def eval_operator(op: TimeVaryingOperator, t: float) -> sp.csr_matrix:
    """
    Evaluate A(t).

    Args:
        op: Time-varying operator
        t: Evaluation time

    Returns:
        CSR matrix; the stored base object itself in 'constant' mode

    Raises:
        ValueError: t lies outside the configured horizon
    """
    if op.horizon is not None:
        start, end = op.horizon
        slack = 1e-9 * max(1.0, abs(end - start))
        if t < start - slack or t > end + slack:
            raise ValueError(f"t={t} outside operator horizon [{start}, {end}]")

    if op.mode == 'constant':
        return op.base
    if op.mode == 'scaled':
        return as_csr(op.mu(t) * op.base)

    value = as_csr(op.provider(t))
    if value.shape != op.base.shape:
        raise DimensionError(f"A({t}) has shape {value.shape}, expected {op.base.shape}")
    return value


def shifted_sparse(a: sp.spmatrix, alpha: float, shift) -> sp.csr_matrix:
    """
    Assemble alpha * A + shift * I in CSR form.

    The result is complex exactly when the shift is.
    """
    dtype = complex if isinstance(shift, complex) else float
    csr = sp.csr_matrix(alpha * a + shift * sp.identity(a.shape[0], dtype=dtype, format='csr'), dtype=dtype)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr
