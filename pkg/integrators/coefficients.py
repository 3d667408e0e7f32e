"""
Peer method coefficient sets: built-ins, text files, validation and the
transforms used by the auxiliary-variable Rosenbrock scheme.
"""
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from config.coefficient_sets import COEFFICIENT_SETS
from shared.errors import CoefficientError
from shared.log import get_logger

logger = get_logger('integrators.coefficients')

FILE_MAGIC = 'peer-coefficients 1'
KINDS = ('implicit', 'rosenbrock')
BLOCKS = ('c', 'b', 'a', 'g')


@dataclass(frozen=True, eq=False)
class PeerCoefficients:
    """
    Coefficients of an s-stage peer method.

    Attributes:
        name: Set name (built-in name or file stem)
        kind: 'implicit' or 'rosenbrock'
        order: Declared order (metadata, not enforced)
        c: Stage nodes, c[-1] == 1
        B: s x s weights on previous stage values
        A: s x s weights on previous right-hand sides
        G: s x s lower triangular, non-zero diagonal
    """
    name: str
    kind: str
    order: int
    c: np.ndarray
    B: np.ndarray
    A: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        for attr in ('c', 'B', 'A', 'G'):
            value = np.array(getattr(self, attr), dtype=float)
            value.setflags(write=False)
            object.__setattr__(self, attr, value)
        validate(self)

    @property
    def s(self) -> int:
        return self.c.shape[0]

    @property
    def gamma(self) -> float:
        """Common diagonal entry of G (Rosenbrock sets)."""
        return float(self.G[0, 0])

    def equals(self, other: 'PeerCoefficients', tol: float = 0.0) -> bool:
        """Compare every table entrywise within tol."""
        if self.kind != other.kind or self.s != other.s:
            return False
        return all(np.allclose(getattr(self, attr), getattr(other, attr), rtol=0.0, atol=tol)
                   for attr in ('c', 'B', 'A', 'G'))

    def __repr__(self) -> str:
        return f"PeerCoefficients({self.name!r}, kind={self.kind}, s={self.s}, order={self.order})"


@dataclass(frozen=True)
class TransformedCoefficients:
    """
    Tables of the auxiliary-variable scheme: G^{-1}, A G^{-1} and B G^{-1}.
    """
    Ginv: np.ndarray
    boldA: np.ndarray
    boldB: np.ndarray
    source: Optional[PeerCoefficients] = field(default=None, repr=False)


def validate(coeffs: PeerCoefficients):
    """
    Check the structural invariants of a coefficient set.

    Raises:
        CoefficientError: With the violated rule in `rule`
    """
    if coeffs.kind not in KINDS:
        raise CoefficientError(f"unknown kind '{coeffs.kind}'", rule='header')
    s = coeffs.c.shape[0] if coeffs.c.ndim == 1 else -1
    if s < 1:
        raise CoefficientError("c must be a non-empty vector", rule='shape')
    for attr in ('B', 'A', 'G'):
        if getattr(coeffs, attr).shape != (s, s):
            raise CoefficientError(f"{attr} has shape {getattr(coeffs, attr).shape}, expected ({s}, {s})",
                                   rule='shape')
    if not np.all(np.isfinite(np.concatenate([coeffs.c, coeffs.B.ravel(), coeffs.A.ravel(), coeffs.G.ravel()]))):
        raise CoefficientError("non-finite coefficient", rule='parse')
    if coeffs.c[-1] != 1.0:
        raise CoefficientError(f"last node must be 1, got {coeffs.c[-1]!r}", rule='c_s=1')
    if np.any(np.triu(coeffs.G, k=1) != 0.0):
        raise CoefficientError("G must be lower triangular", rule='g-lower-triangular')
    if np.any(np.diag(coeffs.G) == 0.0):
        raise CoefficientError("G must have a non-zero diagonal", rule='g-nonzero-diagonal')
    if coeffs.kind == 'rosenbrock' and np.any(np.diag(coeffs.G) != coeffs.G[0, 0]):
        raise CoefficientError("Rosenbrock sets need a constant diagonal in G", rule='rosenbrock-constant-diagonal')
    if np.any(np.abs(coeffs.B.sum(axis=1) - 1.0) > 1e-12):
        raise CoefficientError("rows of B must sum to 1", rule='b-row-sums')


def order_condition_residuals(coeffs: PeerCoefficients, order: int) -> np.ndarray:
    """
    Residuals of the linear peer order conditions up to `order`.

    With e = c - 1, implicit sets check for l = 0..order
        c_i^l - sum_j b_ij e_j^l - l sum_j a_ij e_j^{l-1} - l sum_j g_ij c_j^{l-1},
    Rosenbrock sets drop the g term there and add for l = 0..order-1
        sum_j g_ij c_j^l - sum_j a_ij e_j^l.

    Returns:
        Flat array of residuals (all zero for a set of that order)
    """
    c, B, A, G = coeffs.c, coeffs.B, coeffs.A, coeffs.G
    e = c - 1.0
    residuals = []
    for l in range(order + 1):
        value = c ** l - B @ e ** l
        if l > 0:
            value = value - l * (A @ e ** (l - 1))
            if coeffs.kind == 'implicit':
                value = value - l * (G @ c ** (l - 1))
        residuals.append(value)
    if coeffs.kind == 'rosenbrock':
        for l in range(order):
            residuals.append(G @ c ** l - A @ e ** l)
    return np.concatenate(residuals)


def complete_two_step_weights(c: np.ndarray, B: np.ndarray, G: np.ndarray, order: int) -> np.ndarray:
    """
    Recover the A table of an implicit peer set from c, B, G and its order.

    Row i solves sum_j a_ij l e_j^{l-1} = c_i^l - sum_j b_ij e_j^l - l sum_j g_ij c_j^{l-1}
    for l = 1..order in the least-squares sense (exactly when order == s).

    Returns:
        s x s table A
    """
    c = np.asarray(c, dtype=float)
    B = np.asarray(B, dtype=float)
    G = np.asarray(G, dtype=float)
    e = c - 1.0
    levels = np.arange(1, order + 1)
    system = np.array([l * e ** (l - 1) for l in levels])
    targets = np.array([c ** l - B @ e ** l - l * (G @ c ** (l - 1)) for l in levels])
    A, *_ = np.linalg.lstsq(system, targets, rcond=None)
    return A.T


def builtin(name: str) -> PeerCoefficients:
    """
    Built-in coefficient set by name.

    Raises:
        CoefficientError: Unknown name
    """
    table = COEFFICIENT_SETS.get(name)
    if table is None:
        raise CoefficientError(f"unknown coefficient set '{name}' (known: {', '.join(COEFFICIENT_SETS)})",
                               rule='header')
    A = table['a']
    if A is None:
        A = complete_two_step_weights(table['c'], table['b'], table['g'], table['order'])
    return PeerCoefficients(name, table['kind'], table['order'], table['c'], table['b'], A, table['g'])


def resolve(name_or_path: str) -> PeerCoefficients:
    """Built-in set if the name is known, otherwise a coefficient file."""
    if name_or_path in COEFFICIENT_SETS:
        return builtin(name_or_path)
    return load(name_or_path)


def load(path: str) -> PeerCoefficients:
    """
    Read a coefficient file.

    Format: 'peer-coefficients 1', then 'kind=<k> s=<s> order=<p>', then
    labeled blocks 'c:', 'b:', 'a:', 'g:' with row-major values. A missing
    'a:' block means A = 0; it is never recovered from the order conditions
    the way builtin() completes 'implicit-2'. A file carrying only the c, b
    and g tables of a two-step set therefore loads as a different (one-step)
    method, and the declared-order check below logs a warning. Write the
    completed set with save(builtin(name), path) to get every block.

    Raises:
        CoefficientError: Parse failure or invariant violation
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            lines = [line.split('#', 1)[0].strip() for line in f]
    except OSError as e:
        raise CoefficientError(f"cannot read coefficient file {path}: {e}", rule='parse') from e
    lines = [line for line in lines if line]
    if not lines or lines[0] != FILE_MAGIC:
        raise CoefficientError(f"{path}: first line must be '{FILE_MAGIC}'", rule='header')
    if len(lines) < 2:
        raise CoefficientError(f"{path}: missing 'kind=... s=... order=...' line", rule='header')

    header = {}
    for token in lines[1].split():
        key, sep, value = token.partition('=')
        if not sep:
            raise CoefficientError(f"{path}: malformed header token '{token}'", rule='header')
        header[key] = value
    try:
        kind = header['kind']
        s = int(header['s'])
        order = int(header.get('order', 1))
    except (KeyError, ValueError) as e:
        raise CoefficientError(f"{path}: header needs kind and integer s ({e})", rule='header') from e
    if s < 1:
        raise CoefficientError(f"{path}: s must be positive", rule='header')

    blocks: dict = {}
    current = None
    for token in ' '.join(lines[2:]).split():
        if token.endswith(':'):
            current = token[:-1]
            if current not in BLOCKS:
                raise CoefficientError(f"{path}: unknown block '{token}'", rule='parse')
            if current in blocks:
                raise CoefficientError(f"{path}: block '{token}' given twice", rule='parse')
            blocks[current] = []
            continue
        if current is None:
            raise CoefficientError(f"{path}: value '{token}' outside a block", rule='parse')
        try:
            blocks[current].append(float(token))
        except ValueError as e:
            raise CoefficientError(f"{path}: bad number '{token}' in block '{current}:'", rule='parse') from e

    for label in ('c', 'b', 'g'):
        if label not in blocks:
            raise CoefficientError(f"{path}: missing block '{label}:'", rule='parse')
    expected = {'c': s, 'b': s * s, 'a': s * s, 'g': s * s}
    for label, values in blocks.items():
        if len(values) != expected[label]:
            raise CoefficientError(f"{path}: block '{label}:' has {len(values)} values, expected {expected[label]}",
                                   rule='shape')

    A = np.reshape(blocks['a'], (s, s)) if 'a' in blocks else np.zeros((s, s))
    name = os.path.splitext(os.path.basename(path))[0]
    coeffs = PeerCoefficients(name, kind, order, np.array(blocks['c']), np.reshape(blocks['b'], (s, s)),
                              A, np.reshape(blocks['g'], (s, s)))

    worst = float(np.max(np.abs(order_condition_residuals(coeffs, order))))
    if worst > 1e-8:
        logger.warning(f"{path}: declared order {order} not satisfied (largest condition residual {worst:.3e})")
    return coeffs


def save(coeffs: PeerCoefficients, path: str):
    """Write a coefficient file with every block at full precision."""
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"{FILE_MAGIC}\n")
        f.write(f"kind={coeffs.kind} s={coeffs.s} order={coeffs.order}\n")
        for label, table in zip(BLOCKS, (coeffs.c, coeffs.B, coeffs.A, coeffs.G)):
            f.write(f"{label}:\n")
            rows = np.atleast_2d(table)
            for row in rows:
                f.write(' '.join(repr(float(value)) for value in row) + '\n')


def transform(coeffs: PeerCoefficients) -> TransformedCoefficients:
    """
    Tables of the auxiliary-variable form: G^{-1}, A G^{-1}, B G^{-1}.

    Raises:
        CoefficientError: G is singular
    """
    s = coeffs.s
    if np.any(np.diag(coeffs.G) == 0.0):
        raise CoefficientError("G is singular", rule='g-nonzero-diagonal')
    Ginv = scipy.linalg.solve_triangular(coeffs.G, np.eye(s), lower=True)
    return TransformedCoefficients(Ginv=Ginv, boldA=coeffs.A @ Ginv, boldB=coeffs.B @ Ginv, source=coeffs)
