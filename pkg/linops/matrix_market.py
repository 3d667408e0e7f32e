"""
Matrix Market input/output for system matrices and dense factor blocks.
"""
import os

import numpy as np
import scipy.io
import scipy.sparse as sp

from linops.sparse_ops import as_csr
from shared.errors import ProblemLoadError


def read_sparse(path: str) -> sp.csr_matrix:
    """
    Read a Matrix Market file (coordinate or array) as CSR.

    Raises:
        ProblemLoadError: Missing or malformed file
    """
    return as_csr(_read(path))


def read_dense(path: str) -> np.ndarray:
    """
    Read a Matrix Market file as a dense 2-D array.

    Raises:
        ProblemLoadError: Missing or malformed file
    """
    data = _read(path)
    if sp.issparse(data):
        data = data.toarray()
    return np.atleast_2d(np.asarray(data, dtype=float))


def write_sparse(path: str, matrix: sp.spmatrix, comment: str = ''):
    """Write a sparse matrix in coordinate format."""
    scipy.io.mmwrite(path, sp.coo_matrix(matrix), comment=comment)


def write_dense(path: str, array: np.ndarray, comment: str = ''):
    """Write a dense matrix in array format."""
    scipy.io.mmwrite(path, np.atleast_2d(np.asarray(array, dtype=float)), comment=comment)


def _read(path: str):
    if not os.path.exists(path):
        raise ProblemLoadError(f"missing file: {path}")
    try:
        return scipy.io.mmread(path)
    except (ValueError, OSError, IndexError) as e:
        raise ProblemLoadError(f"cannot parse Matrix Market file {path}: {e}") from e
