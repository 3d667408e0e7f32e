"""
Benchmark harness behind the command line: solve, convergence and compare runs.

Each command takes a RunConfig, writes CSV files plus run_config.json into the
output directory and returns a process exit code.
"""
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config.constants import (ADI_MAX_ITER, ADI_TOL, COMPARE_CSV, COMPRESS_TOL, CONVERGENCE_CSV,
                              CSV_FLOAT_FORMAT, ENDPOINT_FILE, MAX_DEFAULT_JOBS, NEWTON_MAX_ITER, NEWTON_TOL,
                              ORACLE_DENSE_CAP, ORDER_FIT_POINTS, RUN_CONFIG_FILE, SCHEME_LABELS, SCHEMES,
                              STARTUP_SUBSTEPS, SUMMARY_FILE, TRAJECTORY_CSV)
from config.problem_presets import CONVERGENCE_TAUS
from factored.ldl_pair import ldl_to_dense
from integrators.coefficients import PeerCoefficients, resolve
from integrators.stepping import StepOptions
from integrators.trajectory import Trajectory, integrate
from oracle.reference import reference_solution
from problems.catalog import build_problem
from problems.dre_problem import DreProblem
from problems.problem_loader import load_problem
from shared.errors import CoefficientError, ConfigError, DenseCapError, ProblemLoadError, SolverError
from shared.log import get_logger
from solvers.lyap_adi import AdiConfig
from solvers.riccati_newton import NewtonConfig

logger = get_logger('harness')

TRAJECTORY_HEADER = ['step', 'time', 'stage', 'rank', 'newton_iters', 'adi_iters', 'residual', 'rhs_columns']


def default_jobs() -> int:
    """Worker threads for independent runs: every core, at most MAX_DEFAULT_JOBS."""
    return min(MAX_DEFAULT_JOBS, os.cpu_count() or 1)


@dataclass
class RunConfig:
    """
    Settings of one CLI run.

    Attributes:
        command: 'solve', 'convergence' or 'compare'
        problem: Preset name or problem directory
        n0: Grid size override for FDM presets
        schemes: Scheme labels (e.g. 'implicit-2', 'mod-ros-peer-1', 'rosenbrock-1')
        coeffs: Coefficient set name or file overriding the label's set
        taus: Step sizes (empty means the problem's default / the convergence list)
        steps: Steps of the largest tau; overrides the problem's end time
        newton_tol, newton_max, adi_max, adi_tol, compress_tol, startup_substeps: Solver settings
        out: Output directory
        jobs: Worker threads for independent runs (defaults to default_jobs())
        dump_endpoint: Also write the final factors (solve)
    """
    command: str
    problem: str = 'fdm-ltv'
    n0: Optional[int] = None
    schemes: List[str] = field(default_factory=list)
    coeffs: Optional[str] = None
    taus: List[float] = field(default_factory=list)
    steps: Optional[int] = None
    newton_tol: float = NEWTON_TOL
    newton_max: int = NEWTON_MAX_ITER
    adi_max: int = ADI_MAX_ITER
    adi_tol: Optional[float] = ADI_TOL
    compress_tol: Optional[float] = COMPRESS_TOL
    startup_substeps: int = STARTUP_SUBSTEPS
    out: str = 'results'
    jobs: int = field(default_factory=default_jobs)
    dump_endpoint: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'RunConfig':
        return RunConfig(**data)

    def step_options(self) -> StepOptions:
        adi = AdiConfig(rel_tol=self.adi_tol, max_iter=self.adi_max, compress_tol=self.compress_tol)
        newton = NewtonConfig(tol=self.newton_tol, max_iter=self.newton_max, adi=adi,
                              compress_tol=self.compress_tol)
        return StepOptions(newton=newton, adi=adi, compress_tol=self.compress_tol,
                           startup_substeps=self.startup_substeps)


def resolve_scheme(label: Optional[str], coeffs: Optional[str], problem: DreProblem) -> tuple[str, PeerCoefficients]:
    """
    Turn a scheme label and an optional coefficient override into (scheme, coefficients).

    Labels are shorthand ids ('mod-ros-peer-2'), bare scheme names ('implicit') or
    coefficient set names; Rosenbrock-type sets given without a scheme use the
    modified scheme on autonomous problems and the standard one otherwise.

    Raises:
        CoefficientError: Unknown label or coefficient set
        ConfigError: The coefficient override does not fit the scheme
    """
    if label in SCHEME_LABELS:
        scheme, default_set = SCHEME_LABELS[label]
        return scheme, _checked_kind(scheme, resolve(coeffs or default_set))
    if label in SCHEMES:
        default_set = 'implicit-1' if label == 'implicit' else 'rosenbrock-1'
        return label, _checked_kind(label, resolve(coeffs or default_set))

    peer = resolve(coeffs or label or 'rosenbrock-1')
    if peer.kind == 'implicit':
        return 'implicit', peer
    return ('mod-ros-peer' if problem.autonomous else 'ros-peer'), peer


def _checked_kind(scheme: str, coeffs: PeerCoefficients) -> PeerCoefficients:
    expected = 'implicit' if scheme == 'implicit' else 'rosenbrock'
    if coeffs.kind != expected:
        raise ConfigError(f"scheme '{scheme}' needs {expected} coefficients, "
                          f"'{coeffs.name}' is a {coeffs.kind} set")
    return coeffs


def check_taus(problem: DreProblem, taus: List[float]):
    """
    Reject step sizes that do not divide the problem's horizon.

    Raises:
        ConfigError: With the offending step size
    """
    for tau in taus:
        problem.step_count(tau)


def load_problem_arg(cfg: RunConfig) -> DreProblem:
    """Problem directory or preset, with the horizon adjusted to --steps."""
    problem = load_problem(cfg.problem) if os.path.isdir(cfg.problem) else build_problem(cfg.problem, cfg.n0)
    if cfg.jobs < 1:
        raise ConfigError(f"--jobs must be at least 1, got {cfg.jobs}")
    if cfg.steps is not None:
        if cfg.steps < 1:
            raise ConfigError(f"--steps must be positive, got {cfg.steps}")
        tau = max(cfg.taus) if cfg.taus else problem.tau
        if tau is None:
            raise ProblemLoadError(f"problem '{problem.name}' has no default step size, pass --tau")
        problem = problem.with_horizon(problem.t0 + cfg.steps * tau)
    return problem


def format_value(value: Any) -> str:
    """CSV cell: floats with 6 significant digits, everything else as str."""
    if isinstance(value, (float, np.floating)):
        return CSV_FLOAT_FORMAT.format(float(value))
    return str(value)


def write_csv(path: str, header: List[str], rows: List[list]):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])


def save_run_config(cfg: RunConfig):
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, RUN_CONFIG_FILE), 'w', encoding='utf-8') as f:
        json.dump(cfg.to_dict(), f, indent=2)


def relative_error(trajectory: Trajectory, reference: np.ndarray) -> float:
    """Relative Frobenius error of the trajectory's end point."""
    X = ldl_to_dense(trajectory.final, cap=ORACLE_DENSE_CAP)
    scale = np.linalg.norm(reference)
    return float(np.linalg.norm(X - reference) / (scale if scale > 0 else 1.0))


def observed_order(taus: List[float], errors: List[float], points: int = ORDER_FIT_POINTS) -> float:
    """Least-squares slope of log(error) over log(tau) on the finest `points` step sizes."""
    pairs = sorted(zip(taus, errors))[:points]
    if len(pairs) < 2:
        return float('nan')
    log_tau = np.log([tau for tau, _ in pairs])
    log_err = np.log([max(err, np.finfo(float).tiny) for _, err in pairs])
    return float(np.polyfit(log_tau, log_err, 1)[0])


def cmd_solve(cfg: RunConfig) -> int:
    """Integrate one scheme and write the per-stage trajectory log."""
    problem = load_problem_arg(cfg)
    scheme, coeffs = resolve_scheme(cfg.schemes[0] if cfg.schemes else None, cfg.coeffs, problem)
    tau = cfg.taus[0] if cfg.taus else problem.tau
    if tau is None:
        raise ProblemLoadError(f"problem '{problem.name}' has no default step size, pass --tau")

    check_taus(problem, [tau])
    print(f"Solving {problem.name} (n={problem.n}) with {scheme}/{coeffs.name}, tau={tau:g}")
    save_run_config(cfg)
    trajectory = integrate(problem, scheme, coeffs, tau, cfg.step_options())

    rows = [[r.step, r.time, r.stage, r.rank, r.newton_iterations, r.adi_iterations, r.residual, r.rhs_columns]
            for r in trajectory.reports]
    path = os.path.join(cfg.out, TRAJECTORY_CSV)
    write_csv(path, TRAJECTORY_HEADER, rows)
    print(f"Wrote {path}")

    if cfg.dump_endpoint:
        endpoint = os.path.join(cfg.out, ENDPOINT_FILE)
        trajectory.final.save(endpoint, trajectory.times[-1])
        print(f"Wrote {endpoint}")
    print(f"Final rank {trajectory.final.k}, {trajectory.wall_time:.2f}s")
    return 0


def _run_all(problem: DreProblem, runs: List[tuple], options: StepOptions, jobs: int) -> List[Trajectory]:
    def run(item):
        scheme, coeffs, tau = item
        return integrate(problem, scheme, coeffs, tau, options)

    if jobs <= 1:
        return [run(item) for item in runs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, runs))


def _reference_endpoint(problem: DreProblem, tau_min: float) -> np.ndarray:
    if problem.n > ORACLE_DENSE_CAP:
        raise DenseCapError(f"reference solution needs n <= {ORACLE_DENSE_CAP}, problem has n={problem.n}")
    return reference_solution(problem, [problem.tf], tau_min=tau_min).values[-1]


def cmd_convergence(cfg: RunConfig) -> int:
    """Error against the dense reference over a list of step sizes, plus the fitted order."""
    problem = load_problem_arg(cfg)
    taus = list(cfg.taus) or [1.0 / divisor for divisor in CONVERGENCE_TAUS]
    labels = cfg.schemes or [None]
    resolved = [resolve_scheme(label, cfg.coeffs, problem) for label in labels]

    check_taus(problem, taus)
    print(f"Convergence study on {problem.name} (n={problem.n}), {len(resolved)} scheme(s), {len(taus)} step sizes")
    save_run_config(cfg)
    reference = _reference_endpoint(problem, min(taus))
    runs = [(scheme, coeffs, tau) for scheme, coeffs in resolved for tau in taus]
    trajectories = _run_all(problem, runs, cfg.step_options(), cfg.jobs)

    rows = []
    orders = {}
    for scheme, coeffs in resolved:
        label = f"{scheme}/{coeffs.name}"
        mine = [t for t in trajectories if t.scheme == scheme and t.coefficients == coeffs.name]
        errors = [relative_error(t, reference) for t in mine]
        for t, err in zip(mine, errors):
            rows.append([label, t.tau, len(t.times) - 1, err, t.wall_time, t.max_rank])
        orders[label] = observed_order([t.tau for t in mine], errors)
        print(f"{label}: observed order {orders[label]:.3f}")

    write_csv(os.path.join(cfg.out, CONVERGENCE_CSV),
              ['scheme', 'tau', 'steps', 'rel_frob_err_endpoint', 'wall_time', 'max_rank'], rows)
    with open(os.path.join(cfg.out, SUMMARY_FILE), 'w', encoding='utf-8') as f:
        json.dump({'problem': problem.name, 'observed_order': orders}, f, indent=2)
    print(f"Wrote {os.path.join(cfg.out, CONVERGENCE_CSV)}")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    """One row per scheme: wall time and end point error at a single step size."""
    if not cfg.schemes:
        print("error: compare needs at least one --scheme", file=sys.stderr)
        return 2
    problem = load_problem_arg(cfg)
    tau = cfg.taus[0] if cfg.taus else problem.tau
    if tau is None:
        raise ProblemLoadError(f"problem '{problem.name}' has no default step size, pass --tau")
    resolved = [resolve_scheme(label, cfg.coeffs, problem) for label in cfg.schemes]

    check_taus(problem, [tau])
    print(f"Comparing {len(resolved)} scheme(s) on {problem.name} (n={problem.n}), tau={tau:g}")
    save_run_config(cfg)
    reference = _reference_endpoint(problem, tau)
    trajectories = _run_all(problem, [(scheme, coeffs, tau) for scheme, coeffs in resolved],
                            cfg.step_options(), cfg.jobs)

    rows = [[f"{t.scheme}/{t.coefficients}", t.tau, t.wall_time, relative_error(t, reference), t.max_rank]
            for t in trajectories]
    path = os.path.join(cfg.out, COMPARE_CSV)
    write_csv(path, ['method', 'tau', 'wall_time', 'rel_frob_err', 'max_rank'], rows)
    print(f"Wrote {path}")
    return 0


COMMANDS = {
    'solve': cmd_solve,
    'convergence': cmd_convergence,
    'compare': cmd_compare,
}


def run(cfg: RunConfig) -> int:
    """
    Dispatch a command and map failures to exit codes.

    Only the input error types map to 2; any other ValueError is a defect
    inside the solver stack and exits like a solver failure.

    Returns:
        0 on success, 1 on solver failure or internal error, 2 on bad input
    """
    command = COMMANDS.get(cfg.command)
    if command is None:
        print(f"error: unknown command '{cfg.command}'", file=sys.stderr)
        return 2
    try:
        return command(cfg)
    except (CoefficientError, ProblemLoadError, DenseCapError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SolverError as e:
        logger.error(f"{cfg.command} failed: {e}")
        print(f"solver failure: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        logger.exception(f"{cfg.command} hit an internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return 1
