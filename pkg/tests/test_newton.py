import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foldpath.newton import (NewtonGmresError, SingularJacobianError, fd_jacobian_operator,
                             newton_direct, newton_gmres, q_order_estimate, solve)
from foldpath.problems import HEquation, heq_norm_closed_form


def test_scalar_quadratic():
    res = newton_direct(lambda x: x ** 2 - 1, lambda x: np.array([[2 * x[0]]]), [2.0])
    assert res.converged and res.solution[0] == pytest.approx(1.0, abs=1e-12)
    errs = []
    x = 2.0
    for s in res.step_norms:
        errs.append(abs(x - 1))
        x -= s
    errs = np.array(errs[:-1])
    ratios = errs[1:] / errs[:-1] ** 2
    assert np.all(ratios < 1.0)


def test_linear_one_step(rng):
    A = rng.standard_normal((6, 6)) + 5 * np.eye(6)
    b = rng.standard_normal(6)
    res = newton_direct(lambda x: A @ x - b, lambda x: A, np.zeros(6))
    assert res.iterations == 1 and res.converged


def test_linear_gmres_one_step_one_krylov():
    b = np.array([1.0, -2.0, 0.5])
    # forward differences carry a sqrt(eps) error, so ask for 1e-6
    res = newton_gmres(lambda x: x - b, np.zeros(3), rel_tol=1e-6)
    assert res.iterations == 1 and res.gmres_iterations_per_step == [1]


def test_rank_two_jacobian_inner_iterations(rng):
    n = 20
    U = rng.standard_normal((n, 2)) / np.sqrt(n)
    W = rng.standard_normal((n, 2)) / np.sqrt(n)

    def F(x):
        return x + U @ np.tanh(W.T @ x) - 1.0

    res = newton_gmres(F, np.zeros(n), forcing=1e-8)
    assert res.converged
    assert max(res.gmres_iterations_per_step) <= 3


def test_q_order_examples():
    quad = [10.0 ** (-2 ** k) for k in range(5)]
    assert q_order_estimate(quad) == pytest.approx(2.0, abs=1e-9)
    lin = [2.0 ** (-k) for k in range(10)]
    assert q_order_estimate(lin) == pytest.approx(1.0, abs=1e-9)
    assert math.isnan(q_order_estimate([1.0, 0.1]))


def test_converged_residual_criterion():
    res = newton_direct(lambda x: np.exp(x) - 2, lambda x: np.diag(np.exp(x)), [0.0], abs_tol=1e-12, rel_tol=1e-9)
    assert res.residual_norms[-1] <= 1e-12 + 1e-9 * res.residual_norms[0]


def test_max_iter_reports_not_converged():
    res = newton_direct(lambda x: x ** 2 + 1, lambda x: np.diag(2 * x), [3.0], max_iter=5)
    assert not res.converged and res.iterations == 5


def test_singular_jacobian_raised():
    with pytest.raises(SingularJacobianError):
        newton_direct(lambda x: x ** 2 - 1, lambda x: np.diag(2 * x), [0.0])


def test_gmres_failure_raised():
    with pytest.raises(NewtonGmresError):
        newton_gmres(lambda x: x ** 3 + 1.0 - np.arange(4.0), np.ones(4), gmres_max_iter=1, forcing=1e-12)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10))
@settings(deadline=None)
def test_fd_operator_matches_jacobian(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))

    def F(x):
        return A @ x + 0.1 * x ** 3

    x = rng.standard_normal(n)
    v = rng.standard_normal(n)
    op = fd_jacobian_operator(F, x, F(x))
    Jv = A @ v + 0.3 * x ** 2 * v
    assert np.linalg.norm(op(v) - Jv) <= 1e-6 * (1 + np.linalg.norm(x)) ** 3 * np.linalg.norm(v) * (1 + np.abs(A).sum())


def heq_system(nodes, c):
    prob = HEquation(nodes)
    return prob, (lambda H: prob.residual(H, c)), (lambda H: prob.jacobian(H, c))


def test_heq_half_matches_lower_branch():
    prob, F, J = heq_system(200, 0.5)
    res = newton_direct(F, J, np.ones(200))
    assert res.converged
    assert prob.functional(res.solution) == pytest.approx(heq_norm_closed_form(0.5), abs=5e-3)
    assert prob.functional(res.solution) == pytest.approx(1.1716, abs=1e-4)
    assert 1.7 <= res.q_order_estimate <= 2.3


@pytest.mark.parametrize("c", [0.2, 0.5, 0.8])
def test_backends_agree(c):
    prob, F, J = heq_system(100, c)
    a = solve(F, J, np.ones(100), "direct")
    b = solve(F, J, np.ones(100), "gmres", forcing=1e-6)
    assert a.converged and b.converged
    assert np.linalg.norm(a.solution - b.solution) <= 1e-6


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve(lambda x: x, lambda x: np.eye(1), [1.0], "cholesky")
