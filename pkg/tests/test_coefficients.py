"""Tests for peer coefficient sets: built-ins, files, validation and transforms."""
import numpy as np
import pytest

from integrators.coefficients import (PeerCoefficients, builtin, complete_two_step_weights, load,
                                      order_condition_residuals, resolve, save, transform)
from shared.errors import CoefficientError


@pytest.mark.parametrize('name', ['implicit-1', 'implicit-2', 'rosenbrock-1', 'rosenbrock-2'])
def test_builtin_sets_satisfy_their_order(name):
    coeffs = builtin(name)
    assert coeffs.c[-1] == 1.0
    assert np.max(np.abs(order_condition_residuals(coeffs, coeffs.order))) < 1e-12


def test_implicit_two_stage_weights():
    coeffs = builtin('implicit-2')
    expected = complete_two_step_weights(coeffs.c, coeffs.B, coeffs.G, 2)
    assert np.allclose(coeffs.A, expected)
    # Both rows satisfy sum_j a_ij = c_i - sum_j b_ij e_j - sum_j g_ij
    e = coeffs.c - 1.0
    assert np.allclose(coeffs.A.sum(axis=1), coeffs.c - coeffs.B @ e - coeffs.G.sum(axis=1))


def test_rosenbrock_two_stage_gamma():
    coeffs = builtin('rosenbrock-2')
    assert coeffs.gamma == pytest.approx(1.0 - 1.0 / np.sqrt(2.0))
    assert np.max(np.abs(order_condition_residuals(coeffs, 3))) > 1e-6


def test_unknown_builtin():
    with pytest.raises(CoefficientError) as info:
        builtin('implicit-9')
    assert info.value.rule == 'header'


def test_save_and_load(tmp_path):
    path = str(tmp_path / 'my-set.txt')
    original = builtin('rosenbrock-2')
    save(original, path)
    loaded = load(path)
    assert loaded.name == 'my-set'
    assert loaded.kind == 'rosenbrock'
    assert loaded.order == 2
    assert loaded.equals(original, tol=0.0)
    assert resolve(path).equals(original)


def test_missing_a_block_means_zero(tmp_path):
    path = tmp_path / 'euler.txt'
    path.write_text("peer-coefficients 1\nkind=implicit s=1 order=1\nc: 1\nb: 1\ng: 1\n")
    coeffs = load(str(path))
    assert coeffs.A.shape == (1, 1)
    assert coeffs.A[0, 0] == 0.0
    assert coeffs.equals(builtin('implicit-1'))


def test_missing_a_block_is_not_completed(tmp_path):
    """Only built-ins recover the two-step weights; a file without 'a:' keeps A = 0."""
    reference = builtin('implicit-2')
    path = tmp_path / 'implicit-2-cbg.txt'
    rows = [' '.join(repr(float(v)) for v in row) for row in (reference.c, *reference.B, *reference.G)]
    path.write_text("peer-coefficients 1\nkind=implicit s=2 order=2\n"
                    f"c: {rows[0]}\nb: {rows[1]} {rows[2]}\ng: {rows[3]} {rows[4]}\n")
    loaded = load(str(path))
    assert np.array_equal(loaded.A, np.zeros((2, 2)))
    assert not loaded.equals(reference, tol=1e-12)
    assert np.max(np.abs(order_condition_residuals(loaded, 1))) > 1e-8

    complete = str(tmp_path / 'implicit-2.txt')
    save(reference, complete)
    assert load(complete).equals(reference)


def write_set(tmp_path, body):
    path = tmp_path / 'set.txt'
    path.write_text(body)
    return str(path)


@pytest.mark.parametrize('body, rule', [
    ("peer coefficients\nkind=implicit s=1\nc: 1\nb: 1\ng: 1\n", 'header'),
    ("peer-coefficients 1\nkind=explicit s=1\nc: 1\nb: 1\ng: 1\n", 'header'),
    ("peer-coefficients 1\nkind=implicit s=1\nc: 1\nb: 1\ng: x\n", 'parse'),
    ("peer-coefficients 1\nkind=implicit s=2\nc: 0.5 1\nb: 0 1 0 1\ng: 1 0 0\n", 'shape'),
    ("peer-coefficients 1\nkind=implicit s=1\nc: 0.9\nb: 1\ng: 1\n", 'c_s=1'),
    ("peer-coefficients 1\nkind=implicit s=2\nc: 0.5 1\nb: 0 1 0 1\ng: 1 0.5 0 1\n", 'g-lower-triangular'),
    ("peer-coefficients 1\nkind=implicit s=2\nc: 0.5 1\nb: 0 1 0 1\ng: 1 0 0.5 0\n", 'g-nonzero-diagonal'),
    ("peer-coefficients 1\nkind=rosenbrock s=2\nc: 0.5 1\nb: 0 1 0 1\ng: 1 0 0.5 2\n", 'rosenbrock-constant-diagonal'),
    ("peer-coefficients 1\nkind=implicit s=1\nc: 1\nb: 0.5\ng: 1\n", 'b-row-sums'),
])
def test_invalid_files(tmp_path, body, rule):
    with pytest.raises(CoefficientError) as info:
        load(write_set(tmp_path, body))
    assert info.value.rule == rule


def test_unreadable_file(tmp_path):
    with pytest.raises(CoefficientError):
        load(str(tmp_path / 'absent.txt'))


def test_transform_tables():
    coeffs = builtin('rosenbrock-2')
    tables = transform(coeffs)
    assert np.allclose(tables.Ginv @ coeffs.G, np.eye(2))
    assert np.allclose(tables.boldA @ coeffs.G, coeffs.A)
    assert np.allclose(tables.boldB @ coeffs.G, coeffs.B)
    assert tables.source is coeffs


@pytest.mark.parametrize('seed', range(100))
def test_transform_identities_on_stacked_values(seed):
    """(G kron I) X = Y, and the bold tables act on Y as A and B act on X."""
    rng = np.random.default_rng(seed)
    coeffs = builtin(['rosenbrock-1', 'rosenbrock-2'][seed % 2])
    tables = transform(coeffs)
    s = coeffs.s
    n = int(rng.integers(1, 31))
    X = rng.standard_normal((s * n, n))
    identity = np.eye(n)
    Y = np.kron(coeffs.G, identity) @ X

    def close(P, Q):
        return np.linalg.norm(P - Q) <= 1e-12 * max(np.linalg.norm(Q), 1.0)

    assert close(np.kron(tables.Ginv, identity) @ Y, X)
    assert close(np.kron(tables.boldA, identity) @ Y, np.kron(coeffs.A, identity) @ X)
    assert close(np.kron(tables.boldB, identity) @ Y, np.kron(coeffs.B, identity) @ X)


def test_direct_construction_validates():
    with pytest.raises(CoefficientError):
        PeerCoefficients('bad', 'implicit', 1, [1.0], [[1.0]], [[0.0]], [[0.0]])


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
