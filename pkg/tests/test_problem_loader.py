"""Tests for Matrix Market I/O and problem directories."""
import os

import numpy as np
import pytest
import scipy.sparse as sp

from linops.matrix_market import read_dense, read_sparse, write_dense, write_sparse
from problems.catalog import build_problem, scalar_problem
from problems.problem_loader import CONFIG_FILE, load_problem, read_config, write_problem
from shared.errors import ProblemLoadError


def test_sparse_and_dense_files(tmp_path):
    A = sp.csr_matrix(np.array([[-4.0, 1.0, 0.0], [0.5, -4.0, 1.0], [0.0, 0.5, -4.0]]))
    B = np.array([[1.0], [0.0], [2.5]])
    write_sparse(str(tmp_path / 'A.mtx'), A)
    write_dense(str(tmp_path / 'B.mtx'), B)
    assert np.allclose(read_sparse(str(tmp_path / 'A.mtx')).toarray(), A.toarray())
    loaded = read_dense(str(tmp_path / 'B.mtx'))
    assert loaded.shape == (3, 1)
    assert np.allclose(loaded, B)


def test_missing_file_is_named(tmp_path):
    path = str(tmp_path / 'nothing.mtx')
    with pytest.raises(ProblemLoadError, match='missing file'):
        read_sparse(path)


def test_read_config_skips_comments(tmp_path):
    path = tmp_path / CONFIG_FILE
    path.write_text("# horizon\nt0 = 0\ntf=1.5  # end\n\noperator=mu\n")
    assert read_config(str(path)) == {'t0': '0', 'tf': '1.5', 'operator': 'mu'}
    path.write_text("tf 1.5\n")
    with pytest.raises(ProblemLoadError):
        read_config(str(path))


def test_write_and_load_time_varying_problem(tmp_path):
    problem = build_problem('fdm-ltv', n0=4)
    directory = str(tmp_path / 'ltv')
    write_problem(problem, directory)
    loaded = load_problem(directory)
    assert loaded.name == 'ltv'
    assert loaded.n == 16
    assert not loaded.autonomous
    assert loaded.tf == problem.tf
    assert loaded.tau == pytest.approx(problem.tau)
    assert np.allclose(loaded.A.at(0.1).toarray(), problem.A.at(0.1).toarray())
    assert np.allclose(loaded.B, problem.B)
    assert np.allclose(loaded.C, problem.C)
    assert loaded.X0.k == 0


def test_initial_value_files(tmp_path):
    problem = scalar_problem(-1.0, 1.0, 1.0, 0.5, 0.0, 1.0, 0.1)
    directory = str(tmp_path / 'scalar')
    write_problem(problem, directory)
    loaded = load_problem(directory)
    assert loaded.autonomous
    assert loaded.X0.k == 1
    assert float(loaded.X0.L[0, 0] ** 2 * loaded.X0.D[0, 0]) == pytest.approx(0.5)

    os.remove(os.path.join(directory, 'X0_D.mtx'))
    with pytest.raises(ProblemLoadError):
        load_problem(directory)


def test_missing_matrix_and_bad_config(tmp_path):
    problem = scalar_problem(-1.0, 1.0, 1.0, 0.0, 0.0, 1.0)
    directory = str(tmp_path / 'broken')
    write_problem(problem, directory)
    os.remove(os.path.join(directory, 'C.mtx'))
    with pytest.raises(ProblemLoadError, match='C.mtx'):
        load_problem(directory)

    write_problem(problem, directory)
    with open(os.path.join(directory, CONFIG_FILE), 'a', encoding='utf-8') as f:
        f.write('operator=wobbly\n')
    with pytest.raises(ProblemLoadError, match='operator'):
        load_problem(directory)


def test_unknown_preset():
    with pytest.raises(ProblemLoadError):
        build_problem('no-such-problem')


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
