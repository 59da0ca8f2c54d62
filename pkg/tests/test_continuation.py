import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foldpath.continuation import (ContinuationError, NewtonOptions, NormalizationEq, PsarcOptions,
                                   extended_residual, initial_tangent, paramc, psarc, secant_tangent)
from foldpath.linalg import PreconditionError
from foldpath.problems import HEquation, LinearProblem, ToyFold


def toy_path(ds=1e-2, s_end=4.0, **kw):
    return psarc(ToyFold(), s_end, ds, np.array([1.0, 0.0]), options=PsarcOptions(**kw))


def test_normalization_examples(rng):
    prob = LinearProblem(2)
    x0 = np.array([0.3, 0.3, 0.3])
    t0 = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    eq = NormalizationEq(x0, 2.0, t0)
    assert np.array_equal(extended_residual(prob, eq, x0, 2.0), [0.0, 0.0, 0.0])
    ds = 0.37
    assert eq(x0 + ds * t0, 2.0 + ds) == pytest.approx(0.0, abs=1e-16)
    x = rng.standard_normal(3)
    assert eq(x, 2.5) == pytest.approx(sum(t0[i] * (x[i] - x0[i]) for i in range(3)) - 0.5, abs=1e-15)


def test_secant_examples():
    assert np.array_equal(secant_tangent([0.0, 0.0], [1.0, 0.0]), [1.0, 0.0])
    pts = [np.array([1.0, 2.0]) + k * np.array([3.0, -1.0]) for k in range(4)]
    ts = [secant_tangent(a, b) for a, b in zip(pts, pts[1:])]
    assert all(np.allclose(t, ts[0]) for t in ts)
    # orientation follows the previous tangent
    assert np.array_equal(secant_tangent([1.0, 0.0], [0.0, 0.0], previous=np.array([1.0, 0.0])), [1.0, 0.0])
    with pytest.raises(PreconditionError):
        secant_tangent([1.0], [1.0])


def test_initial_tangents():
    t = initial_tangent(ToyFold(), [1.0, 0.0])
    assert np.allclose(t, np.array([-0.5, 1.0]) / np.linalg.norm([-0.5, 1.0]))
    assert np.allclose(initial_tangent(LinearProblem(), [0.0, 0.0]), np.array([1.0, 1.0]) / np.sqrt(2))
    prob = HEquation(30)
    assert initial_tangent(prob, np.append(np.ones(30), 0.0))[-1] > 0
    with pytest.raises(ContinuationError):
        initial_tangent(ToyFold(), [0.0, 1.0])


def test_paramc_toy_fails_at_fold():
    path = paramc(ToyFold(), 0.0, 1.2, 0.05, [1.0])
    assert path.failure is not None
    lam = path.failure["lambda"]
    assert 0.95 < lam <= 1.2
    assert np.all(np.abs(path.points[-1].u ** 2 + path.points[-1].lam - 1) < 1e-9)


def test_paramc_linear_full_path():
    path = paramc(LinearProblem(), 0.0, 1.0, 0.1, [0.0])
    assert path.failure is None and len(path) == 11
    assert all(p.newton_stats["iterations"] == 1 for p in path.points[1:])
    assert path.lambdas[-1] == pytest.approx(1.0)


def test_paramc_heq_fails_past_one():
    prob = HEquation(200)
    path = paramc(prob, 0.0, 1.2, 0.05, np.ones(200))
    assert path.failure is not None
    assert 0.9 < path.failure["lambda"] <= 1.05


def test_psarc_linear_one_newton_step():
    path = psarc(LinearProblem(), 1.0, 0.1, [0.0, 0.0], options=PsarcOptions(diagnostics=False))
    assert path.failure is None
    assert all(p.newton_stats["iterations"] <= 1 for p in path.points[1:])
    assert np.allclose([p.u[0] for p in path.points], path.lambdas)


def test_toy_rounds_fold():
    path = toy_path()
    assert path.failure is None
    lam = path.lambdas
    assert abs(lam.max() - 1.0) <= 1e-3
    k = int(np.argmax(lam))
    assert 0 < k < len(path) - 1
    assert np.all(np.diff(lam[:k + 1]) > 0) and np.all(np.diff(lam[k:]) < 0)
    assert np.all(np.diff(path.arclengths) > 0)
    # lambda = 1 - u^2 along the whole path
    u = np.array([p.u[0] for p in path.points])
    assert np.max(np.abs(lam - (1 - u * u))) <= 1e-9
    assert u[-1] < 0


def test_path_invariants():
    path = toy_path(ds=0.05)
    for p in path.points:
        assert abs(np.linalg.norm(p.tangent) - 1) <= 1e-10
        assert abs(p.u[0] ** 2 + p.lam - 1) <= 1e-9


def test_tau_shrinks_with_step():
    taus = []
    for ds in (0.1, 0.05, 0.025):
        path = toy_path(ds=ds, s_end=1.5)
        taus.append(np.median([p.diagnostics.tau for p in path.points[2:]]))
    assert taus[0] > taus[1] > taus[2]


def test_adaptive_step_recovers():
    newton = NewtonOptions(max_iter=3)
    fixed = psarc(ToyFold(), 6.0, 0.6, [1.0, 0.0], newton=newton, options=PsarcOptions(diagnostics=False))
    assert fixed.failure is not None
    adapt = psarc(ToyFold(), 6.0, 0.6, [1.0, 0.0], newton=newton,
                  options=PsarcOptions(diagnostics=False, adaptive=True))
    assert adapt.failure is None and adapt.arclengths[-1] >= 6.0
    steps = np.diff(adapt.arclengths)
    assert steps.min() < 0.6 and steps.max() == pytest.approx(0.6)


def test_predictor_none_still_works():
    path = toy_path(ds=0.05, s_end=3.0, predictor="none")
    assert path.failure is None and path.lambdas.max() > 0.99


def test_bad_inputs():
    with pytest.raises(PreconditionError):
        psarc(ToyFold(), 1.0, 0.1, [2.0, 0.0])
    with pytest.raises(PreconditionError):
        psarc(ToyFold(), 1.0, 0.0, [1.0, 0.0])
    with pytest.raises(PreconditionError):
        psarc(ToyFold(), 1.0, 0.1, [1.0, 0.0], tangent_init=[1.0, 1.0])
    with pytest.raises(PreconditionError):
        paramc(ToyFold(), 1.0, 0.0, 0.1, [0.0])


@given(lam_min=st.floats(0.2, 0.95))
@settings(max_examples=5, deadline=None)
def test_lambda_window_stops_on_way_back(lam_min):
    path = toy_path(ds=0.05, s_end=100.0, lambda_min=lam_min)
    assert path.lambdas[-1] < lam_min and path.points[-1].tangent[-1] < 0
    assert path.lambdas.max() > 0.99


def test_heq_tangent_flips_at_fold(heq_path_fine):
    prob, path = heq_path_fine
    lt = np.array([p.tangent[-1] for p in path.points])
    k = int(np.argmax(path.lambdas))
    assert np.all(lt[:k - 1] > 0) and np.all(lt[k + 1:] < 0)
    # accepted points solve G to tolerance
    worst = max(np.linalg.norm(prob.residual(p.u, p.lam)) for p in path.points)
    assert worst < 1e-8


def test_heq_direct_and_gmres_paths_agree():
    prob = HEquation(60)
    x0 = np.append(np.ones(60), 0.0)
    opts = PsarcOptions(diagnostics=False)
    a = psarc(prob, 3.0, 0.1, x0, newton=NewtonOptions("direct"), options=opts)
    b = psarc(prob, 3.0, 0.1, x0, newton=NewtonOptions("gmres", forcing=1e-8), options=opts)
    assert len(a) == len(b)
    assert max(np.linalg.norm(p.x - q.x) for p, q in zip(a.points, b.points)) < 1e-6
