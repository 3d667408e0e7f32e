"""
Time-stepping driver shared by the three low-rank peer schemes.
"""
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from config.constants import SCHEMES
from factored.ldl_pair import LdlPair
from integrators.coefficients import PeerCoefficients, transform
from integrators.peer_implicit import implicit_peer_step
from integrators.peer_rosenbrock import modified_step, standard_step
from integrators.startup import initial_window
from integrators.stepping import AuxWindow, StepOptions
from problems.dre_problem import DreProblem
from shared.errors import ConfigError
from shared.log import get_logger, log_event

logger = get_logger('integrators.trajectory')


@dataclass
class Trajectory:
    """
    Endpoint values X(t_k) of a run plus every stage report.

    Attributes:
        scheme: 'implicit', 'ros-peer' or 'mod-ros-peer'
        coefficients: Coefficient set name
        tau: Step size
        times: Window end times (t0 first)
        endpoints: X at those times in factored form
        reports: StageReport per stage solve
        windows: Full stage windows per step, when requested
        wall_time: Seconds spent integrating
    """
    scheme: str
    coefficients: str
    tau: float
    times: list = field(default_factory=list)
    endpoints: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    windows: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def final(self) -> LdlPair:
        return self.endpoints[-1]

    @property
    def max_rank(self) -> int:
        return max((x.k for x in self.endpoints), default=0)

    def stage_solves_per_step(self) -> dict:
        """Number of stage solves recorded for every step index."""
        return dict(Counter(report.step for report in self.reports))

    def __repr__(self) -> str:
        return (f"Trajectory({self.scheme}/{self.coefficients}, tau={self.tau:g}, "
                f"steps={len(self.times) - 1}, max_rank={self.max_rank})")


def integrate(problem: DreProblem, scheme: str, coeffs: PeerCoefficients, tau: float,
              options: Optional[StepOptions] = None, keep_stages: bool = False,
              autonomous: Optional[bool] = None) -> Trajectory:
    """
    Integrate a DRE over [t0, tf] with a low-rank peer scheme.

    Args:
        problem: DRE
        scheme: 'implicit', 'ros-peer' or 'mod-ros-peer'
        coeffs: Coefficients matching the scheme kind
        tau: Step size (must divide the horizon)
        options: Solver settings
        keep_stages: Also keep every stage window
        autonomous: Layout override, defaults to the problem's

    Returns:
        Trajectory with one endpoint per window

    Raises:
        ConfigError: Unknown scheme, coefficient kind mismatch or a tau that does not divide the horizon
    """
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme '{scheme}' (known: {', '.join(SCHEMES)})")
    expected_kind = 'implicit' if scheme == 'implicit' else 'rosenbrock'
    if coeffs.kind != expected_kind:
        raise ConfigError(f"scheme '{scheme}' needs {expected_kind} coefficients, got {coeffs.kind} set '{coeffs.name}'")
    options = options or StepOptions()
    total_steps = problem.step_count(tau)

    started = time.perf_counter()
    trajectory = Trajectory(scheme, coeffs.name, tau)
    trajectory.times.append(problem.t0)
    trajectory.endpoints.append(problem.X0)

    state = initial_window(problem, coeffs, tau, options, autonomous)
    if coeffs.s > 1:
        _record(trajectory, state, keep_stages)
    remaining = total_steps - (1 if coeffs.s > 1 else 0)

    if scheme == 'mod-ros-peer':
        tables = transform(coeffs)
        window = AuxWindow.from_state(state, coeffs.G, options.compress_tol)
        for _ in range(remaining):
            window, reports = modified_step(problem, coeffs, window, options, autonomous, tables)
            trajectory.reports.extend(reports)
            _record(trajectory, window, keep_stages)
    else:
        advance = implicit_peer_step if scheme == 'implicit' else standard_step
        for _ in range(remaining):
            state, reports = advance(problem, coeffs, state, options, autonomous)
            trajectory.reports.extend(reports)
            _record(trajectory, state, keep_stages)

    trajectory.wall_time = time.perf_counter() - started
    logger.info(f"{problem.name}: {scheme}/{coeffs.name} tau={tau:g} finished {total_steps} steps "
                f"in {trajectory.wall_time:.2f}s, max rank {trajectory.max_rank}")
    return trajectory


def _record(trajectory: Trajectory, window, keep_stages: bool):
    trajectory.times.append(window.end_time)
    trajectory.endpoints.append(window.stages[-1])
    if keep_stages:
        trajectory.windows.append(list(window.stages))
    log_event(logger, 'step', step=window.step, time=window.end_time, rank=window.stages[-1].k)
