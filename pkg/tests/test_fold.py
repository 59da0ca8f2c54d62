import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foldpath.fold import (CSV_COLUMNS, TangentNormError, assemble_bordered, classify_point,
                           max_step_bound, sigma_min_actual, sigma_min_bound_value,
                           sigma_min_bound_weyl)
from foldpath.linalg import PreconditionError

seeds = st.integers(0, 2**32 - 1)


def random_case(rng, n, fold=False):
    G_u = rng.standard_normal((n, n))
    if fold:
        U, s, Vt = np.linalg.svd(G_u)
        s[-1] = 0.0
        G_u = U @ np.diag(s) @ Vt
    G_l = rng.standard_normal(n)
    t = rng.standard_normal(n + 1)
    return G_u, G_l, t / np.linalg.norm(t)


def test_identity_regular_point():
    d = classify_point(np.eye(2), [0.0, 0.0], [1.0, 0.0, 0.0])
    assert d.sigma_N == 1.0 and d.alpha == 1.0 and d.tau == 1.0
    assert not d.is_simple_fold_candidate
    assert d.sigma_min_Fx_bound is None


def test_hand_evaluated_fold():
    d = classify_point(np.diag([1.0, 0.0]), [0.0, 1.0], [0.0, 0.0, 1.0])
    assert d.sigma_N == 0.0
    assert abs(d.proj) == 1.0 and d.gap == 1.0 and d.xi == 1.0
    assert d.alpha == 0.5 and d.tau == 1.0
    assert d.is_simple_fold_candidate
    assert d.bound_status.startswith("tau >= min")


def test_layout():
    B = assemble_bordered([[2.0]], [3.0], [0.6, 0.8])
    assert np.array_equal(B.assembled, [[2.0, 3.0], [0.6, 0.8]])
    B = assemble_bordered(np.eye(3), np.ones(3), [1.0, 0, 0, 0])
    assert np.array_equal(B.assembled[3], [1.0, 0, 0, 0])


@given(seed=seeds, n=st.integers(1, 8))
def test_layout_bit_for_bit(seed, n):
    G_u, G_l, t = random_case(np.random.default_rng(seed), n)
    F = assemble_bordered(G_u, G_l, t).assembled
    assert np.array_equal(F[:n, :n], G_u) and np.array_equal(F[:n, n], G_l)
    assert np.allclose(F[n], t, rtol=1e-15, atol=0)


def test_tangent_norm_checked():
    with pytest.raises(TangentNormError):
        assemble_bordered(np.eye(1), [1.0], [1.0, 1.0])
    with pytest.raises(PreconditionError):
        assemble_bordered(np.eye(2), [1.0], [1.0, 0.0, 0.0])


def test_sigma_min_examples():
    assert sigma_min_actual(assemble_bordered(np.eye(2), [0.0, 0.0], [0, 0, 1.0])) == pytest.approx(1.0)
    M = np.array([[2, 3], [0.6, 0.8]])
    # closed form for a 2x2: s_min = |det| / s_max with s_max^2 + s_min^2 = ||M||_F^2
    det, fro2 = abs(np.linalg.det(M)), np.sum(M * M)
    smin = math.sqrt((fro2 - math.sqrt(fro2 ** 2 - 4 * det * det)) / 2)
    assert sigma_min_actual(assemble_bordered([[2.0]], [3.0], [0.6, 0.8])) == pytest.approx(smin, rel=1e-12)


def test_bound_formula_examples():
    assert sigma_min_bound_value(0.3, 0.0) == 1.0
    assert sigma_min_bound_value(0.5, 0.25) == pytest.approx(math.sqrt(0.5))
    assert sigma_min_bound_value(0.5, 0.5) is None
    assert sigma_min_bound_value(2.0, 1.0) is None


def test_max_step_bound():
    assert max_step_bound(1, 1, 1) == 0.5
    assert max_step_bound(2, 1, 0.5) == 0.5
    with pytest.raises(PreconditionError):
        max_step_bound(0, 1, 1)


def test_first_bound_overshoots_when_alpha_below_one():
    # exact tangent, tau = 0, so the sqrt(1 - tau max(1/alpha, 1)) formula gives 1
    d = classify_point(np.diag([1.0, 0.0]), [0.0, 0.1], [0.0, 1.0, 0.0])
    assert d.tau == 0.0 and d.alpha < 1
    assert d.sigma_min_Fx_bound == 1.0
    assert d.sigma_min_Fx_actual == pytest.approx(0.1)
    assert d.sigma_min_Fx_bound_weyl <= d.sigma_min_Fx_actual + 1e-15


@given(seed=seeds, n=st.integers(1, 8), fold=st.booleans(), shrink=st.floats(1e-3, 1.0))
@settings(max_examples=300)
def test_weyl_bound_holds(seed, n, fold, shrink):
    rng = np.random.default_rng(seed)
    G_u, G_l, _ = random_case(rng, n, fold)
    G_u, G_l = shrink * G_u, shrink * G_l
    # tangent close to the null direction of [G_u G_l]
    null = np.linalg.svd(np.column_stack([G_u, G_l]))[2][-1]
    t = null + 10 ** rng.uniform(-6, -1) * rng.standard_normal(n + 1)
    d = classify_point(G_u, G_l, t / np.linalg.norm(t))
    assert d.gap >= 0 and d.xi >= 0 and d.alpha >= 0 and d.tau >= 0
    if d.sigma_min_Fx_bound_weyl is not None:
        assert d.sigma_min_Fx_actual >= d.sigma_min_Fx_bound_weyl - 1e-8 * d.fx_norm
    if d.alpha >= 1 and d.sigma_min_Fx_bound is not None:
        assert d.sigma_min_Fx_actual >= d.sigma_min_Fx_bound - 1e-8 * d.fx_norm


@given(seed=seeds, n=st.integers(1, 8), fold=st.booleans())
def test_alpha_below_gram_eigenvalue(seed, n, fold):
    G_u, G_l, t = random_case(np.random.default_rng(seed), n, fold)
    d = classify_point(G_u, G_l, t)
    lmin = np.linalg.eigvalsh(G_u @ G_u.T + np.outer(G_l, G_l))[0]
    assert lmin >= d.alpha - 1e-10 * max(1.0, np.linalg.norm(G_u, 2) ** 2)


@given(seed=seeds, n=st.integers(2, 6))
def test_orthogonal_invariance(seed, n):
    rng = np.random.default_rng(seed)
    G_u, G_l, t = random_case(rng, n)
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    a = classify_point(G_u, G_l, t)
    b = classify_point(Q @ G_u, Q @ G_l, t)
    for name in ("sigma_N", "gap", "xi", "alpha", "tau", "sigma_min_Fx_actual"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-8, abs=1e-10)
    assert abs(b.proj) == pytest.approx(abs(a.proj), rel=1e-8, abs=1e-10)


def test_fold_candidate_threshold():
    d = classify_point(np.diag([1.0, 1e-9]), [0.0, 1.0], [0, 0, 1.0])
    assert d.is_simple_fold_candidate
    d = classify_point(np.diag([1.0, 1e-9]), [1.0, 0.0], [0, 0, 1.0])
    assert not d.is_simple_fold_candidate


def test_row_matches_columns():
    d = classify_point(np.eye(2), [0.0, 1.0], [0, 0, 1.0])
    row = d.to_row(0.5, 0.2)
    assert len(row) == len(CSV_COLUMNS) and row[:2] == [0.5, 0.2]
