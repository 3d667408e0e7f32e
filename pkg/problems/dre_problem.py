"""
Differential Riccati equation problem definition.

    X'(t) = A(t)^T X + X A(t) - X B B^T X + C^T C,   X(t0) = X0
"""
import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.constants import GRID_TOL
from factored.ldl_pair import LdlPair
from linops.sparse_ops import TimeVaryingOperator
from shared.errors import ConfigError, DimensionError


@dataclass
class DreProblem:
    """
    A DRE with constant B and C.

    Attributes:
        name: Label used in logs and output files
        A: System matrix A(t)
        B: n x m input factor
        C: q x n output factor
        X0: Initial value in factored form
        t0: Start time
        tf: End time
        tau: Default step size (optional)
    """
    name: str
    A: TimeVaryingOperator
    B: np.ndarray
    C: np.ndarray
    X0: LdlPair
    t0: float
    tf: float
    tau: Optional[float] = None

    def __post_init__(self):
        n = self.A.n
        self.B = np.asarray(self.B, dtype=float)
        if self.B.ndim == 1:
            self.B = self.B[:, None]
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if self.B.shape[0] != n:
            raise DimensionError(f"B has {self.B.shape[0]} rows, A is {n} x {n}")
        if self.C.shape[1] != n:
            raise DimensionError(f"C has {self.C.shape[1]} columns, A is {n} x {n}")
        if self.X0.n != n:
            raise DimensionError(f"X0 is {self.X0.n} x {self.X0.n}, A is {n} x {n}")
        if not self.tf > self.t0:
            raise ValueError(f"empty horizon [{self.t0}, {self.tf}]")

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[0]

    @property
    def autonomous(self) -> bool:
        return self.A.autonomous

    def step_count(self, tau: float) -> int:
        """
        Number of uniform steps of size tau covering [t0, tf].

        Raises:
            ConfigError: tau does not divide the horizon
        """
        if tau <= 0:
            raise ConfigError(f"step size must be positive, got {tau}")
        span = self.tf - self.t0
        steps = int(round(span / tau))
        if steps < 1 or abs(steps * tau - span) > GRID_TOL * span:
            raise ConfigError(f"step size {tau} does not divide the horizon [{self.t0}, {self.tf}]")
        return steps

    def with_horizon(self, tf: float) -> 'DreProblem':
        """Copy with a different end time."""
        return dataclasses.replace(self, tf=tf)

    def __repr__(self) -> str:
        return f"DreProblem({self.name!r}, n={self.n}, m={self.m}, q={self.q}, [{self.t0}, {self.tf}])"
