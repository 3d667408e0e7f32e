"""
Finite-difference convection-diffusion test matrices on the unit square.

    v_t = Laplace(v) - f1 dv/dxi1 - f2 dv/dxi2 - f3 v

discretized on the n0 x n0 interior grid (h = 1/(n0 + 1)) with the 5-point
stencil and centered first differences, lexicographic ordering with xi1
running fastest. Inputs and outputs are indicator vectors of boxes.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from config.problem_presets import INPUT_BOX, OUTPUT_BOX
from linops.sparse_ops import as_csr
from shared.errors import ProblemLoadError
from shared.log import get_logger

logger = get_logger('problems.fdm')

Box = tuple[tuple[float, float], tuple[float, float]]


@dataclass(frozen=True)
class FdmSpec:
    """
    FDM problem parameters.

    Attributes:
        n0: Interior grid points per direction (n = n0^2)
        f1: Convection coefficient in xi1
        f2: Convection coefficient in xi2
        f3: Reaction coefficient
        input_box: ((lo1, hi1), (lo2, hi2)) selecting the B indicator
        output_box: Box selecting the C indicator
        snap_to_grid: Replace boxes without grid points by the nearest grid lines
    """
    n0: int
    f1: float = 0.0
    f2: float = 0.0
    f3: float = 0.0
    input_box: Box = INPUT_BOX
    output_box: Box = OUTPUT_BOX
    snap_to_grid: bool = True


def grid_index(i: int, j: int, n0: int) -> int:
    """Lexicographic index of grid point (xi1 index i, xi2 index j), both 0-based."""
    return j * n0 + i


def fdm_matrix(spec: FdmSpec) -> sp.csr_matrix:
    """
    Assemble A0 (diagonal -4/h^2 - f3, neighbors 1/h^2 -/+ f/(2h)).

    Raises:
        ProblemLoadError: n0 < 2
    """
    n0 = spec.n0
    if n0 < 2:
        raise ProblemLoadError(f"grid needs n0 >= 2, got {n0}")
    h = 1.0 / (n0 + 1)
    diffusion = 1.0 / h ** 2
    rows, cols, vals = [], [], []

    for j in range(n0):
        for i in range(n0):
            center = grid_index(i, j, n0)
            rows.append(center)
            cols.append(center)
            vals.append(-4.0 * diffusion - spec.f3)
            # (neighbor offset, convection coefficient, direction sign)
            for di, dj, f, sign in ((1, 0, spec.f1, 1.0), (-1, 0, spec.f1, -1.0),
                                    (0, 1, spec.f2, 1.0), (0, -1, spec.f2, -1.0)):
                ni, nj = i + di, j + dj
                if 0 <= ni < n0 and 0 <= nj < n0:
                    rows.append(center)
                    cols.append(grid_index(ni, nj, n0))
                    vals.append(diffusion - sign * f / (2.0 * h))

    n = n0 * n0
    return as_csr(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


def _axis_points(n0: int, lo: float, hi: float, snap: bool, label: str) -> np.ndarray:
    coords = np.arange(1, n0 + 1) / (n0 + 1)
    inside = np.flatnonzero((coords > lo) & (coords < hi))
    if inside.size:
        return inside
    if not snap:
        raise ProblemLoadError(f"{label} box ({lo}, {hi}) contains no grid point for n0={n0}")
    center = 0.5 * (lo + hi)
    nearest = int(np.argmin(np.abs(coords - center)))
    logger.warning(f"{label} box ({lo}, {hi}) has no grid point for n0={n0}, "
                   f"using the grid line at {coords[nearest]:.4f}")
    return np.array([nearest])


def box_indicator(n0: int, box: Box, snap: bool = True, label: str = 'region') -> np.ndarray:
    """
    Indicator vector of the grid points strictly inside a box.

    Raises:
        ProblemLoadError: Degenerate box, or no grid point inside and snap is off
    """
    (lo1, hi1), (lo2, hi2) = box
    if not (lo1 < hi1 and lo2 < hi2):
        raise ProblemLoadError(f"{label} box {box} is empty")
    vector = np.zeros(n0 * n0)
    for j in _axis_points(n0, lo2, hi2, snap, f"{label} xi2"):
        for i in _axis_points(n0, lo1, hi1, snap, f"{label} xi1"):
            vector[grid_index(int(i), int(j), n0)] = 1.0
    return vector


def fdm_generate(spec: FdmSpec) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
    """
    Assemble the FDM system.

    Returns:
        (A0 as n x n CSR, B as n x 1, C as 1 x n)
    """
    A0 = fdm_matrix(spec)
    B = box_indicator(spec.n0, spec.input_box, spec.snap_to_grid, 'input')[:, None]
    C = box_indicator(spec.n0, spec.output_box, spec.snap_to_grid, 'output')[None, :]
    return A0, B, C
