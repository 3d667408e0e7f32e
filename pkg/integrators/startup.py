"""
Initial peer window.

A two-step peer scheme needs s values X(t0 + c_j tau) before the first step.
They come from the one-stage modified Rosenbrock-type scheme on a uniform
grid of `substeps` steps per tau; each node is reached by one reduced step
branching off the last grid point at or before it.
"""
import math
from typing import Callable, Optional

import numpy as np

from integrators.coefficients import PeerCoefficients, builtin, transform
from integrators.peer_rosenbrock import modified_step
from integrators.stepping import AuxWindow, PeerState, StepOptions
from problems.dre_problem import DreProblem
from shared.errors import StartupError
from shared.log import get_logger

logger = get_logger('integrators.startup')

OneStep = Callable[[object, float, float], object]


def startup_values(c: np.ndarray, t0: float, tau: float, x0, one_step: OneStep, substeps: int) -> list:
    """
    Approximate X(t0 + c_j tau) for every node.

    Args:
        c: Stage nodes, each in (0, 1]
        t0: Start time
        tau: Peer step size
        x0: Value at t0 (any representation one_step understands)
        one_step: (x, t, h) -> value at t + h
        substeps: Grid steps per tau

    Returns:
        Values in node order

    Raises:
        StartupError: A node lies outside (0, 1]
    """
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0) or np.any(c > 1.0):
        raise StartupError(f"startup needs nodes in (0, 1], got {c.tolist()}")
    h = tau / substeps
    values: list = [None] * len(c)
    x = x0
    done = 0
    for j in sorted(range(len(c)), key=lambda j: c[j]):
        target = c[j] * substeps
        full = int(math.floor(target + 1e-9))
        while done < full:
            x = one_step(x, t0 + done * h, h)
            done += 1
        rest = (target - full) * h
        values[j] = one_step(x, t0 + full * h, rest) if rest > 1e-9 * h else x
    return values


def initial_window(problem: DreProblem, coeffs: PeerCoefficients, tau: float,
                   options: Optional[StepOptions] = None, autonomous: Optional[bool] = None) -> PeerState:
    """
    Build the first low-rank window.

    For s = 1 the window is X0 itself (t_base = t0 - tau); otherwise the
    window holds X(t0 + c_j tau) with t_base = t0.

    Returns:
        PeerState with step 0
    """
    options = options or StepOptions()
    if coeffs.s == 1:
        return PeerState([problem.X0], problem.t0 - tau, tau, 0)

    euler = builtin('rosenbrock-1')
    euler_tables = transform(euler)

    def one_step(x, t, h):
        window = AuxWindow([x], [x], t - h, h, 0)
        new_window, _ = modified_step(problem, euler, window, options, autonomous, euler_tables)
        return new_window.stages[-1]

    if coeffs.order > 2 and options.startup_substeps < 1.0 / tau:
        logger.warning(f"startup with {options.startup_substeps} first-order substeps may limit "
                       f"order {coeffs.order} accuracy at tau={tau:g}")
    values = startup_values(coeffs.c, problem.t0, tau, problem.X0, one_step, options.startup_substeps)
    logger.debug(f"startup window built, ranks {[x.k for x in values]}")
    return PeerState(values, problem.t0, tau, 0)
