"""Tests for the implicit low-rank peer scheme."""
import numpy as np
import pytest

from factored.ldl_pair import LdlPair, ldl_to_dense
from integrators.coefficients import builtin
from integrators.peer_implicit import assemble_implicit_rhs, implicit_rhs_width
from integrators.riccati_factors import riccati_op_factors
from integrators.stepping import PeerState
from integrators.trajectory import integrate
from linops.sparse_ops import TimeVaryingOperator
from oracle.dense_schemes import dense_integrate, dense_riccati_op
from problems.catalog import build_problem, fdm_problem, scalar_problem
from problems.dre_problem import DreProblem
from problems.fdm import FdmSpec
from shared.errors import NewtonDivergenceError, StageSolveError


def test_scalar_first_step():
    """Implicit Euler on x' = 1 - x^2 solves 0.1 x^2 + x - 0.1 = 0."""
    problem = scalar_problem(0.0, 1.0, 1.0, 0.0, 0.0, 0.1, 0.1)
    trajectory = integrate(problem, 'implicit', builtin('implicit-1'), 0.1)
    assert trajectory.times == pytest.approx([0.0, 0.1])
    assert ldl_to_dense(trajectory.final)[0, 0] == pytest.approx((np.sqrt(1.04) - 1.0) / 0.2, abs=1e-9)
    assert len(trajectory.reports) == 1
    assert trajectory.reports[0].newton_iterations >= 1


def test_scalar_converges_to_tanh():
    problem = build_problem('scalar-tanh')
    trajectory = integrate(problem, 'implicit', builtin('implicit-2'), 0.01)
    assert ldl_to_dense(trajectory.final)[0, 0] == pytest.approx(np.tanh(0.5), abs=1e-4)


def lti_problem(n0=4):
    return fdm_problem(FdmSpec(n0=n0, f1=20.0, f2=5.0), 0.0, 0.05, 0.01)


@pytest.mark.parametrize('autonomous, expected', [(True, 14), (False, 15)])
def test_rhs_width(autonomous, expected):
    problem = lti_problem()
    rng = np.random.default_rng(0)
    x = LdlPair(rng.standard_normal((problem.n, 4)), np.eye(4))
    state = PeerState([x], -0.01, 0.01)
    coeffs = builtin('implicit-1')
    width = implicit_rhs_width(coeffs, 0, problem.q, problem.m, [4], [], autonomous)
    rhs = assemble_implicit_rhs(problem, coeffs, state, 0, [], autonomous=autonomous)
    assert width == expected
    assert rhs.k + problem.m == expected


@pytest.mark.parametrize('problem, autonomous', [(build_problem('fdm-ltv', n0=3), False), (lti_problem(3), True)])
@pytest.mark.parametrize('with_newton', [False, True])
def test_rhs_matches_dense_stage_equation(problem, autonomous, with_newton):
    """Second stage of implicit-2 against the dense right-hand side."""
    coeffs = builtin('implicit-2')
    rng = np.random.default_rng(5)
    tau = 0.01
    stages = [LdlPair(rng.standard_normal((problem.n, k)), np.eye(k)) for k in (2, 3)]
    state = PeerState(stages, 0.02, tau)
    t_new = state.t_base + tau
    current = [LdlPair(rng.standard_normal((problem.n, 2)), np.diag([1.0, -0.5]))]
    current_factors = [riccati_op_factors(problem.A.at(t_new + coeffs.c[0] * tau), problem.B, problem.C,
                                          current[0], include_output=not autonomous)]
    iterate = LdlPair(rng.standard_normal((problem.n, 2)), np.eye(2)) if with_newton else None

    i = 1
    a, b, g = coeffs.A[i], coeffs.B[i], coeffs.G[i]
    B, C = problem.B, problem.C
    expected = tau * g[i] * C.T @ C
    for j, x in enumerate(stages):
        A_j = problem.A.at(state.t_base + coeffs.c[j] * tau).toarray()
        X = ldl_to_dense(x)
        expected += b[j] * X + tau * a[j] * dense_riccati_op(A_j, B, C, X)
    A_0 = problem.A.at(t_new + coeffs.c[0] * tau).toarray()
    expected += tau * g[0] * dense_riccati_op(A_0, B, C, ldl_to_dense(current[0]))
    if with_newton:
        XB = ldl_to_dense(iterate) @ B
        expected += tau * g[i] * XB @ XB.T

    rhs = assemble_implicit_rhs(problem, coeffs, state, i, current_factors, newton_iterate=iterate,
                                autonomous=autonomous)
    assert np.linalg.norm(ldl_to_dense(rhs) - expected) <= 1e-12 * np.linalg.norm(expected)


def test_layouts_agree_on_constant_operator():
    problem = lti_problem()
    coeffs = builtin('implicit-2')
    packed = integrate(problem, 'implicit', coeffs, 0.01, autonomous=True)
    general = integrate(problem, 'implicit', coeffs, 0.01, autonomous=False)
    X = ldl_to_dense(packed.final)
    assert np.linalg.norm(X - ldl_to_dense(general.final)) <= 1e-7 * np.linalg.norm(X)


@pytest.mark.parametrize('name', ['implicit-1', 'implicit-2'])
def test_matches_dense_scheme(name):
    problem = build_problem('fdm-ltv', n0=4).with_horizon(0.05)
    coeffs = builtin(name)
    trajectory = integrate(problem, 'implicit', coeffs, 0.01)
    times, values = dense_integrate(problem, 'implicit', coeffs, 0.01)
    assert trajectory.times == pytest.approx(times)
    for x, expected in zip(trajectory.endpoints, values):
        assert np.linalg.norm(ldl_to_dense(x) - expected) <= 1e-6 * max(np.linalg.norm(expected), 1e-12)


def test_stage_counts_per_step():
    problem = lti_problem()
    trajectory = integrate(problem, 'implicit', builtin('implicit-2'), 0.01)
    # Step 0 is the startup window; every peer step solves both stages
    assert trajectory.stage_solves_per_step() == {1: 2, 2: 2, 3: 2, 4: 2}
    assert len(trajectory.times) == 6


@pytest.mark.parametrize('scheme, name', [('implicit', 'implicit-1'), ('ros-peer', 'rosenbrock-1'),
                                          ('mod-ros-peer', 'rosenbrock-1')])
def test_lyapunov_case_without_inputs(scheme, name):
    """With no input columns x' = -2x + 1 and every first-order set gives x1 = 0.1 / 1.2."""
    problem = DreProblem('dle', TimeVaryingOperator(np.array([[-1.0]])), np.zeros((1, 0)), np.array([[1.0]]),
                         LdlPair.zeros(1), 0.0, 0.1, 0.1)
    assert problem.m == 0
    trajectory = integrate(problem, scheme, builtin(name), 0.1)
    assert ldl_to_dense(trajectory.final)[0, 0] == pytest.approx(0.1 / 1.2, abs=1e-12)


def test_stage_failure_names_step_and_stage(monkeypatch):
    def fail(*args, **kwargs):
        raise NewtonDivergenceError("residual keeps growing")

    monkeypatch.setattr('integrators.peer_implicit.newton_solve', fail)
    problem = scalar_problem(0.0, 1.0, 1.0, 0.0, 0.0, 0.1, 0.1)
    with pytest.raises(StageSolveError) as info:
        integrate(problem, 'implicit', builtin('implicit-1'), 0.1)
    assert info.value.step == 1
    assert info.value.stage == 1


def test_scheme_and_kind_must_match():
    problem = scalar_problem(0.0, 1.0, 1.0, 0.0, 0.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        integrate(problem, 'implicit', builtin('rosenbrock-1'), 0.1)
    with pytest.raises(ValueError):
        integrate(problem, 'explicit', builtin('implicit-1'), 0.1)
    with pytest.raises(ValueError):
        integrate(problem, 'implicit', builtin('implicit-1'), 0.03)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, '-v']))
