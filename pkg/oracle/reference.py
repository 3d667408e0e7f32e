"""
Reference solutions for convergence studies.

The dense auxiliary-variable Rosenbrock scheme of order 2 runs with
tau_ref = tau_min / 32; tau_ref is halved until two successive runs agree at
the end point, and the Richardson-extrapolated samples are returned.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config.constants import (REFERENCE_COEFFICIENTS, REFERENCE_MAX_HALVINGS, REFERENCE_REFINEMENT,
                              REFERENCE_SCHEME, RICHARDSON_TOL, SCHEMES)
from integrators.coefficients import builtin
from oracle.dense_schemes import dense_integrate
from problems.dre_problem import DreProblem
from shared.errors import RichardsonError
from shared.log import get_logger

logger = get_logger('oracle.reference')


@dataclass
class ReferenceSolution:
    """
    Dense reference values on a time grid.

    Attributes:
        times: Sample times
        values: Dense X at those times
        tau_ref: Finest step size used
        change: Relative end point change between the last two refinements
        scheme: Scheme name
    """
    times: np.ndarray
    values: list
    tau_ref: float
    change: float
    scheme: str = REFERENCE_SCHEME

    def at(self, t: float) -> np.ndarray:
        index = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[index] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no reference sample at t={t}")
        return self.values[index]


def _sample(problem: DreProblem, grid: np.ndarray, tau: float) -> list:
    horizon = problem.with_horizon(float(grid[-1]))
    coeffs = builtin(REFERENCE_COEFFICIENTS)
    times, values = dense_integrate(horizon, REFERENCE_SCHEME, coeffs, tau)
    times = np.asarray(times)
    samples = []
    for t in grid:
        index = int(round((t - problem.t0) / tau))
        if abs(times[index] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"grid point {t} is not a multiple of tau_ref={tau:g} from t0")
        samples.append(values[index])
    return samples


def reference_solution(problem: DreProblem, t_grid: Sequence[float], tau_min: Optional[float] = None,
                       refinement: int = REFERENCE_REFINEMENT, tol: float = RICHARDSON_TOL,
                       max_halvings: int = REFERENCE_MAX_HALVINGS) -> ReferenceSolution:
    """
    Richardson-checked dense reference at the grid points.

    Args:
        problem: DRE (dense-sized)
        t_grid: Sample times in (t0, tf]
        tau_min: Smallest step size of the experiment (defaults to the smallest grid spacing)
        refinement: tau_ref = tau_min / refinement
        tol: Required relative end point change between successive halvings
        max_halvings: Halvings tried before giving up

    Returns:
        ReferenceSolution with extrapolated values

    Raises:
        RichardsonError: The end point did not settle
    """
    grid = np.sort(np.asarray(t_grid, dtype=float))
    if grid.size == 0 or grid[0] <= problem.t0:
        raise ValueError("reference grid must be non-empty and lie after t0")
    if tau_min is None:
        tau_min = float(np.min(np.diff(np.concatenate([[problem.t0], grid]))))
    tau = tau_min / refinement

    coarse = _sample(problem, grid, tau)
    change = np.inf
    for halving in range(max_halvings):
        tau = tau / 2.0
        fine = _sample(problem, grid, tau)
        scale = np.linalg.norm(fine[-1])
        change = np.linalg.norm(fine[-1] - coarse[-1]) / (scale if scale > 0 else 1.0)
        logger.info(f"reference tau={tau:.3e}: relative end point change {change:.3e}")
        if change < tol:
            values = [f + (f - c) / 3.0 for f, c in zip(fine, coarse)]
            return ReferenceSolution(grid, values, tau, float(change))
        coarse = fine

    raise RichardsonError(f"reference did not settle: change {change:.3e} >= {tol:.1e} "
                          f"after {max_halvings} halvings (tau_ref={tau:.3e})")


def write_reference(path: str, ref: ReferenceSolution):
    """
    Binary dump: int64 header (n, grid length, scheme id), then row-major float64 matrices.
    """
    n = ref.values[0].shape[0]
    header = np.array([n, len(ref.values), SCHEMES[ref.scheme]], dtype=np.int64)
    with open(path, 'wb') as f:
        header.tofile(f)
        for value in ref.values:
            np.ascontiguousarray(value, dtype=np.float64).tofile(f)


def read_reference(path: str) -> tuple[int, list]:
    """
    Read a binary dump.

    Returns:
        (scheme id, list of n x n arrays)
    """
    with open(path, 'rb') as f:
        n, count, scheme_id = np.fromfile(f, dtype=np.int64, count=3)
        data = np.fromfile(f, dtype=np.float64, count=int(count * n * n))
    if data.size != count * n * n:
        raise ValueError(f"{path}: truncated reference dump")
    return int(scheme_id), [block.reshape(n, n) for block in data.reshape(int(count), int(n * n))]
