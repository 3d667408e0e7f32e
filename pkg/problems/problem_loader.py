"""
Problem directories.

A directory holds A.mtx (coordinate), B.mtx and C.mtx (array), optionally
X0_L.mtx and X0_D.mtx, and problem.cfg with key=value lines:
t0, tf, tau, operator (constant | mu), mu_amplitude, mu_frequency.
"""
import os
from typing import Any, Dict

from config.constants import MU_AMPLITUDE, MU_FREQUENCY
from factored.ldl_pair import LdlPair
from linops.matrix_market import read_dense, read_sparse, write_dense, write_sparse
from linops.sparse_ops import Sinusoid, TimeVaryingOperator
from problems.dre_problem import DreProblem
from shared.errors import DimensionError, ProblemLoadError
from shared.log import get_logger

logger = get_logger('problems.problem_loader')

CONFIG_FILE = 'problem.cfg'
PROBLEM_FILES = {
    'A': 'A.mtx',
    'B': 'B.mtx',
    'C': 'C.mtx',
    'X0_L': 'X0_L.mtx',
    'X0_D': 'X0_D.mtx',
}


def read_config(path: str) -> Dict[str, str]:
    """
    Parse key=value lines ('#' starts a comment).

    Raises:
        ProblemLoadError: Missing file or malformed line
    """
    if not os.path.exists(path):
        raise ProblemLoadError(f"missing file: {path}")
    values = {}
    with open(path, 'r', encoding='utf-8') as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition('=')
            if not sep:
                raise ProblemLoadError(f"{path}:{number}: expected key=value, got '{line}'")
            values[key.strip()] = value.strip()
    return values


def _float(config: Dict[str, str], key: str, path: str, default: Any = None) -> Any:
    if key not in config:
        if default is None:
            raise ProblemLoadError(f"{path}: missing key '{key}'")
        return default
    try:
        return float(config[key])
    except ValueError as e:
        raise ProblemLoadError(f"{path}: '{key}' is not a number ({config[key]})") from e


def load_problem(directory: str) -> DreProblem:
    """
    Load a problem directory.

    Returns:
        DreProblem named after the directory

    Raises:
        ProblemLoadError: Missing file (named in the message), bad config or inconsistent sizes
    """
    cfg_path = os.path.join(directory, CONFIG_FILE)
    config = read_config(cfg_path)
    t0 = _float(config, 't0', cfg_path, 0.0)
    tf = _float(config, 'tf', cfg_path)
    tau = _float(config, 'tau', cfg_path, 0.0) or None

    A0 = read_sparse(os.path.join(directory, PROBLEM_FILES['A']))
    B = read_dense(os.path.join(directory, PROBLEM_FILES['B']))
    C = read_dense(os.path.join(directory, PROBLEM_FILES['C']))

    mode = config.get('operator', 'constant')
    if mode == 'constant':
        operator = TimeVaryingOperator(A0)
    elif mode == 'mu':
        amplitude = _float(config, 'mu_amplitude', cfg_path, MU_AMPLITUDE)
        frequency = _float(config, 'mu_frequency', cfg_path, MU_FREQUENCY)
        operator = TimeVaryingOperator(A0, mode='scaled', mu=Sinusoid(amplitude, frequency))
    else:
        raise ProblemLoadError(f"{cfg_path}: operator must be 'constant' or 'mu', got '{mode}'")

    n = A0.shape[0]
    L_path = os.path.join(directory, PROBLEM_FILES['X0_L'])
    D_path = os.path.join(directory, PROBLEM_FILES['X0_D'])
    if os.path.exists(L_path) != os.path.exists(D_path):
        raise ProblemLoadError(f"{directory}: X0_L.mtx and X0_D.mtx must be given together")
    X0 = LdlPair(read_dense(L_path), read_dense(D_path)) if os.path.exists(L_path) else LdlPair.zeros(n)

    name = os.path.basename(os.path.normpath(directory))
    try:
        problem = DreProblem(name, operator, B, C, X0, t0, tf, tau)
    except (DimensionError, ValueError) as e:
        raise ProblemLoadError(f"{directory}: {e}") from e
    logger.info(f"loaded problem {problem}")
    return problem


def write_problem(problem: DreProblem, directory: str):
    """
    Write a problem directory readable by load_problem.

    Raises:
        ProblemLoadError: The operator mode cannot be stored
    """
    operator = problem.A
    lines = [f"t0={problem.t0!r}", f"tf={problem.tf!r}"]
    if problem.tau is not None:
        lines.append(f"tau={problem.tau!r}")
    if operator.mode == 'constant':
        lines.append('operator=constant')
    elif operator.mode == 'scaled' and isinstance(operator.mu, Sinusoid):
        lines += ['operator=mu', f"mu_amplitude={operator.mu.amplitude!r}", f"mu_frequency={operator.mu.frequency!r}"]
    else:
        raise ProblemLoadError(f"cannot store a '{operator.mode}' operator in a problem directory")

    os.makedirs(directory, exist_ok=True)
    write_sparse(os.path.join(directory, PROBLEM_FILES['A']), operator.base)
    write_dense(os.path.join(directory, PROBLEM_FILES['B']), problem.B)
    write_dense(os.path.join(directory, PROBLEM_FILES['C']), problem.C)
    if problem.X0.k > 0:
        write_dense(os.path.join(directory, PROBLEM_FILES['X0_L']), problem.X0.L)
        write_dense(os.path.join(directory, PROBLEM_FILES['X0_D']), problem.X0.D)
    with open(os.path.join(directory, CONFIG_FILE), 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')
