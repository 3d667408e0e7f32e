"""
ADI shift parameters.

Ritz values of F and F^{-1} from a short two-sided Arnoldi sweep, then the
greedy min-max selection of Penzl. Falls back to one Gershgorin-based real
shift when the sweep yields no stable candidates.
"""
from typing import Callable

import numpy as np
import scipy.linalg

from config.constants import ARNOLDI_BREAKDOWN_TOL, ARNOLDI_STEPS_FORWARD, ARNOLDI_STEPS_INVERSE
from linops.shifted_operator import ShiftedOperator
from shared.errors import ShiftedSolveError
from shared.log import get_logger

logger = get_logger('solvers.adi_shifts')


def arnoldi_ritz(apply: Callable[[np.ndarray], np.ndarray], n: int, steps: int) -> np.ndarray:
    """
    Ritz values of a linear map from `steps` Arnoldi iterations.

    The start vector is the normalized all-ones vector. A breakdown ends the
    sweep early (the Krylov space is invariant and the Ritz values are exact).

    Args:
        apply: x -> operator applied to x
        n: Dimension
        steps: Maximum Krylov dimension

    Returns:
        Array of Ritz values (possibly complex)
    """
    steps = min(steps, n)
    basis = np.zeros((n, steps + 1))
    hessenberg = np.zeros((steps + 1, steps))
    basis[:, 0] = 1.0 / np.sqrt(n)

    size = steps
    for j in range(steps):
        w = np.real_if_close(apply(basis[:, j]))
        w = np.asarray(w, dtype=float)
        scale = np.linalg.norm(w)
        # Modified Gram-Schmidt, applied twice
        for _ in range(2):
            for i in range(j + 1):
                h = basis[:, i] @ w
                hessenberg[i, j] += h
                w = w - h * basis[:, i]
        h_next = np.linalg.norm(w)
        hessenberg[j + 1, j] = h_next
        if h_next <= ARNOLDI_BREAKDOWN_TOL * max(scale, 1.0) or j + 1 == n:
            size = j + 1
            break
        basis[:, j + 1] = w / h_next

    return scipy.linalg.eigvals(hessenberg[:size, :size])


def gershgorin_shift(op: ShiftedOperator) -> float:
    """
    Single real negative shift from Gershgorin discs of the sparse part of F.

    Returns:
        -sqrt(lower * upper) with the smallest and largest disc bounds on |lambda|
    """
    M = op.M.tocsr()
    diag = op.alpha * M.diagonal() + op.sigma
    abs_rows = np.asarray(abs(M).sum(axis=1)).ravel()
    radii = abs(op.alpha) * (abs_rows - np.abs(M.diagonal()))
    upper = float(np.max(np.abs(diag) + radii)) if diag.size else 1.0
    lower = float(np.min(np.abs(diag) - radii)) if diag.size else 1.0
    if upper <= 0.0:
        return -1.0
    lower = max(lower, 1e-6 * upper)
    return -float(np.sqrt(lower * upper))


def _adi_magnitude(shifts: list, x: complex) -> float:
    value = 1.0
    for p in shifts:
        value *= abs((p - x) / (p + x))
    return value


def select_shifts(candidates: np.ndarray, count: int) -> list:
    """
    Greedy min-max shift selection over a candidate set.

    The first shift minimizes the largest ADI rational magnitude over the
    candidates; every further shift is the candidate where the current
    rational function is largest. Complex shifts enter with their conjugate
    directly after them.

    Args:
        candidates: Stable Ritz values (Re < 0)
        count: Target number of shifts

    Returns:
        List of shifts, real values as float, closed under conjugation
    """
    unique = []
    for value in candidates:
        value = complex(value)
        if abs(value.imag) <= 1e-12 * abs(value):
            value = complex(value.real, 0.0)
        elif value.imag < 0:
            value = value.conjugate()
        if not any(abs(value - u) <= 1e-12 * abs(u) for u in unique):
            unique.append(value)

    pool = unique + [u.conjugate() for u in unique if u.imag != 0]

    def add(chosen: list, value: complex):
        if value.imag == 0:
            chosen.append(float(value.real))
        else:
            chosen.extend([complex(value.real, abs(value.imag)), complex(value.real, -abs(value.imag))])

    first = min(unique, key=lambda p: max(_adi_magnitude([p], x) for x in pool))
    chosen: list = []
    add(chosen, first)
    remaining = [u for u in unique if u != first]

    while len(chosen) < count and remaining:
        worst = max(remaining, key=lambda x: _adi_magnitude(chosen, x))
        add(chosen, worst)
        remaining.remove(worst)

    return chosen


def compute_shifts(op: ShiftedOperator, count: int) -> list:
    """
    Shift parameters for ADI on F^T X + X F = -G S G^T.

    Args:
        op: Stable operator F
        count: Target number of shifts

    Returns:
        Non-empty list of shifts with negative real parts, closed under
        conjugation, conjugate pairs adjacent
    """
    n = op.n
    ritz = [arnoldi_ritz(op.apply, n, ARNOLDI_STEPS_FORWARD)]
    try:
        inverse = arnoldi_ritz(lambda x: op.solve_t(0.0, x), n, ARNOLDI_STEPS_INVERSE)
        nonzero = inverse[np.abs(inverse) > 0]
        ritz.append(1.0 / nonzero)
    except ShiftedSolveError:
        logger.debug("operator is singular, skipping inverse Arnoldi sweep")

    values = np.concatenate(ritz)
    stable = values[np.isfinite(values) & (values.real < 0)]
    if stable.size == 0:
        shift = gershgorin_shift(op)
        logger.warning(f"no stable Ritz values, falling back to Gershgorin shift {shift:.3e}")
        return [shift]

    shifts = select_shifts(stable, count)
    logger.debug(f"selected {len(shifts)} shifts from {stable.size} Ritz values")
    return shifts
