"""
Named problems built from config/problem_presets.py.
"""
from typing import Optional

import numpy as np

from config.constants import MU_AMPLITUDE, MU_FREQUENCY
from config.problem_presets import PROBLEM_PRESETS
from factored.ldl_pair import LdlPair
from linops.sparse_ops import Sinusoid, TimeVaryingOperator
from problems.dre_problem import DreProblem
from problems.fdm import FdmSpec, fdm_generate
from shared.errors import ProblemLoadError


def make_ltv(problem: DreProblem, amplitude: float = MU_AMPLITUDE, frequency: float = MU_FREQUENCY) -> DreProblem:
    """
    Turn a constant-A problem into A(t) = mu(t) A0 with mu(t) = amplitude sin(frequency pi t) + 1.
    """
    base = problem.A.base
    operator = TimeVaryingOperator(base, mode='scaled', mu=Sinusoid(amplitude, frequency))
    return DreProblem(problem.name, operator, problem.B, problem.C, problem.X0,
                      problem.t0, problem.tf, problem.tau)


def fdm_problem(spec: FdmSpec, t0: float, tf: float, tau: Optional[float] = None,
                time_varying: bool = False, name: str = 'fdm') -> DreProblem:
    """DRE with FDM matrices and X0 = 0."""
    A0, B, C = fdm_generate(spec)
    problem = DreProblem(name, TimeVaryingOperator(A0), B, C, LdlPair.zeros(A0.shape[0]), t0, tf, tau)
    return make_ltv(problem) if time_varying else problem


def scalar_problem(a: float, b: float, c: float, x0: float, t0: float, tf: float,
                   tau: Optional[float] = None, name: str = 'scalar') -> DreProblem:
    """1 x 1 DRE x' = 2 a x - b^2 x^2 + c^2."""
    X0 = LdlPair(np.array([[1.0]]), np.array([[x0]])) if x0 != 0.0 else LdlPair.zeros(1)
    return DreProblem(name, TimeVaryingOperator(np.array([[a]])), np.array([[b]]), np.array([[c]]), X0, t0, tf, tau)


def build_problem(name: str, n0: Optional[int] = None) -> DreProblem:
    """
    Build a preset problem.

    Args:
        name: Preset name from PROBLEM_PRESETS
        n0: Grid size override for FDM presets

    Raises:
        ProblemLoadError: Unknown preset
    """
    preset = PROBLEM_PRESETS.get(name)
    if preset is None:
        raise ProblemLoadError(f"unknown problem '{name}' (known: {', '.join(PROBLEM_PRESETS)})")

    if preset['kind'] == 'scalar':
        return scalar_problem(preset['a'], preset['b'], preset['c'], preset['x0'],
                              preset['t0'], preset['tf'], preset['tau'], name)

    f1, f2, f3 = preset['f']
    spec = FdmSpec(n0=n0 if n0 is not None else preset['n0'], f1=f1, f2=f2, f3=f3)
    return fdm_problem(spec, preset['t0'], preset['tf'], preset['tau'], preset['time_varying'], name)
