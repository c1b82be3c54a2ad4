import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import jacobi_singular_values

from bmoment.tensor_core import MomentTensor, MultilinearForm, NormedSpace, NormKind, outer
from bmoment.tensor_norms import (
    GROTHENDIECK_UPPER,
    Exactness,
    Method,
    grothendieck_check,
    injective_norm,
    lp_feasible,
    norm_oracle,
    projective_norm,
    tensor_norms,
)

KINDS = list(NormKind)


def test_jacobi_helper_on_known_matrix():
    np.testing.assert_allclose(jacobi_singular_values(np.diag([3.0, -2.0, 1.0])), [3, 2, 1])


def test_injective_examples():
    assert injective_norm(MomentTensor(np.eye(2)), NormedSpace(2, "l2")).value == pytest.approx(1.0)
    b = np.array([0.3, -1.7, 0.9])
    r = injective_norm(MomentTensor(np.diag(b)), NormedSpace(3, "sup"))
    assert r.value == 1.7 and r.exactness is Exactness.EXACT
    for n in (3, 10):
        assert injective_norm(MomentTensor(np.eye(n) / n), NormedSpace(n, "l2")).value == pytest.approx(1 / n, rel=1e-14)


def test_projective_examples():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=3), rng.normal(size=3)
    for kind in KINDS:
        sp = NormedSpace(3, kind)
        r = projective_norm(outer(x, y), sp)
        assert r.value == pytest.approx(sp.norm(x) * sp.norm(y), rel=1e-9)
    b = np.array([0.5, -2.0, 1.0, 0.25])
    r = projective_norm(MomentTensor(np.diag(b)), NormedSpace(4, "sup"))
    assert r.exactness is Exactness.EXACT and r.method is Method.EXTREME_POINT_LP
    assert r.value == pytest.approx(2.0, abs=1e-9)
    assert projective_norm(MomentTensor(np.eye(3)), NormedSpace(3, "l2")).value == pytest.approx(3.0)


def test_zero_tensor_and_dimension_mismatch():
    Z = MomentTensor(np.zeros((3, 3, 3)))
    for kind in KINDS:
        for fn in (injective_norm, projective_norm):
            r = fn(Z, NormedSpace(3, kind))
            assert r.value == 0.0 and r.exactness is Exactness.EXACT
    with pytest.raises(ValueError):
        injective_norm(Z, NormedSpace(2, "l2"))
    with pytest.raises(ValueError):
        projective_norm(Z, NormedSpace(4, "sup"))


def test_lp_limits():
    assert lp_feasible(2, 8) and lp_feasible(3, 6) and lp_feasible(4, 4)
    assert not lp_feasible(3, 7) and not lp_feasible(5, 4)


def test_bound_results_bracket():
    rng = np.random.default_rng(1)
    T = MomentTensor(rng.normal(size=(3, 3, 3)))
    eps = injective_norm(T, NormedSpace(3, "l2"))
    assert eps.exactness is Exactness.LOWER_BOUND and eps.lower <= eps.upper
    pi = projective_norm(T, NormedSpace(3, "l2"))
    assert pi.exactness is Exactness.UPPER_BOUND and pi.lower <= pi.value == pi.upper
    assert pi.lower >= eps.lower - 1e-12


def test_sup_large_projective_is_bracketed():
    rng = np.random.default_rng(2)
    T = MomentTensor(rng.normal(size=(7, 7, 7)))
    r = projective_norm(T, NormedSpace(7, "sup"))
    assert r.method is Method.GREEDY_DEFLATION
    assert 0 < r.lower <= r.upper


def test_l2_matrix_norms_match_independent_svd_100():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 17))
        A = rng.normal(size=(n, n))
        sv = jacobi_singular_values(A)
        sp = NormedSpace(n, "l2")
        assert projective_norm(MomentTensor(A), sp).value == pytest.approx(sv.sum(), rel=1e-8)
        assert injective_norm(MomentTensor(A), sp).value == pytest.approx(sv[0], rel=1e-8)


def test_oracle_sup_injective_50():
    rng = np.random.default_rng(4)
    sp = NormedSpace(3, "sup")
    for _ in range(50):
        T = MomentTensor(rng.normal(size=(3, 3)))
        assert norm_oracle(T, sp, "eps") == pytest.approx(injective_norm(T, sp).value, abs=1e-6)


def test_oracle_nuclear_norm_50():
    rng = np.random.default_rng(5)
    sp = NormedSpace(3, "l2")
    for _ in range(50):
        A = rng.normal(size=(3, 3))
        assert norm_oracle(MomentTensor(A), sp, "pi") == pytest.approx(jacobi_singular_values(A).sum(), abs=1e-4)


def test_oracle_rank_one():
    x, y = np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.4, -1.2])
    for kind in KINDS:
        sp = NormedSpace(3, kind)
        expected = sp.norm(x) * sp.norm(y)
        assert norm_oracle(outer(x, y), sp, "pi") == pytest.approx(expected, rel=1e-6)
        assert norm_oracle(outer(x, y), sp, "eps") == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3)])
def test_lp_projective_matches_oracle(n, k):
    rng = np.random.default_rng(10 * n + k)
    sp = NormedSpace(n, "sup")
    for _ in range(5):
        T = MomentTensor(rng.normal(size=(n,) * k))
        r = projective_norm(T, sp)
        assert r.exactness is Exactness.EXACT
        assert norm_oracle(T, sp, "pi") == pytest.approx(r.value, abs=1e-6)


@pytest.mark.parametrize("kind", ["l1", "l2"])
def test_oracle_injective_order3(kind):
    rng = np.random.default_rng(6)
    sp = NormedSpace(3, kind)
    T = MomentTensor(rng.normal(size=(3, 3, 3)))
    r = injective_norm(T, sp)
    assert norm_oracle(T, sp, "eps") == pytest.approx(r.value, rel=1e-6)


def test_oracle_l2_projective_order3_inside_bracket():
    rng = np.random.default_rng(7)
    sp = NormedSpace(2, "l2")
    T = MomentTensor(rng.normal(size=(2, 2, 2)))
    r = projective_norm(T, sp)
    assert r.lower - 1e-6 <= norm_oracle(T, sp, "pi") <= r.upper + 1e-6


def test_oracle_size_limit():
    with pytest.raises(ValueError):
        norm_oracle(MomentTensor(np.ones((5, 5))), NormedSpace(5, "l2"), "eps")
    with pytest.raises(ValueError):
        norm_oracle(MomentTensor(np.ones((2,) * 4)), NormedSpace(2, "l2"), "eps")
    with pytest.raises(ValueError):
        norm_oracle(MomentTensor(np.ones((2, 2))), NormedSpace(2, "l2"), "bogus")


small_tensor = st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31 - 1))


@given(small_tensor, st.sampled_from(KINDS))
def test_crossnorm_ordering(params, kind):
    n, k, seed = params
    T = MomentTensor(np.random.default_rng(seed).normal(size=(n,) * k))
    norms = tensor_norms(T, NormedSpace(n, kind))
    assert norms["pi"].upper >= norms["eps"].lower - 1e-9
    if norms["pi"].exactness is Exactness.EXACT and norms["eps"].exactness is Exactness.EXACT:
        assert norms["pi"].value >= norms["eps"].value - 1e-9


@given(small_tensor, st.sampled_from(KINDS), st.floats(-5, 5, allow_nan=False))
def test_homogeneity_and_triangle(params, kind, c):
    n, k, seed = params
    rng = np.random.default_rng(seed)
    A, B = MomentTensor(rng.normal(size=(n,) * k)), MomentTensor(rng.normal(size=(n,) * k))
    sp = NormedSpace(n, kind)
    for fn in (injective_norm, projective_norm):
        a, b, s = fn(A, sp), fn(B, sp), fn(A + B, sp)
        if all(r.exactness is Exactness.EXACT for r in (a, b, s)):
            assert s.value <= a.value + b.value + 1e-9
            assert fn(c * A, sp).value == pytest.approx(abs(c) * a.value, rel=1e-9, abs=1e-12)


def test_elementary_tensors_100():
    rng = np.random.default_rng(8)
    for i in range(100):
        n, k = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        kind = KINDS[i % 3]
        sp = NormedSpace(n, kind)
        xs = [rng.normal(size=n) for _ in range(k)]
        expected = math.prod(sp.norm(x) for x in xs)
        T = outer(*xs)
        assert injective_norm(T, sp).value == pytest.approx(expected, rel=1e-9)
        assert projective_norm(T, sp).value == pytest.approx(expected, rel=1e-9)


def test_grothendieck_examples():
    r = grothendieck_check(MultilinearForm(np.eye(2)))
    assert r.sup_norm == 2.0
    assert r.hilbert_value == pytest.approx(2.0, abs=1e-12)
    assert r.ratio == pytest.approx(1.0, abs=1e-8)
    rng = np.random.default_rng(9)
    r = grothendieck_check(MultilinearForm(np.outer(rng.normal(size=4), rng.normal(size=4))))
    assert r.ratio == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        grothendieck_check(MultilinearForm(np.eye(13)))
    with pytest.raises(ValueError):
        grothendieck_check(MultilinearForm(np.ones((2, 2, 2))))


def test_grothendieck_sup_norm_by_brute_force():
    rng = np.random.default_rng(10)
    A = rng.normal(size=(4, 4))
    signs = np.array(np.meshgrid(*[[-1, 1]] * 4)).reshape(4, -1).T
    brute = max(abs(s @ A @ t) for s in signs for t in signs)
    assert grothendieck_check(MultilinearForm(A)).sup_norm == pytest.approx(brute, rel=1e-14)


@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_grothendieck_ratio_bounded(n, seed):
    A = np.random.default_rng(seed).normal(size=(n, n))
    r = grothendieck_check(MultilinearForm(A), n_starts=8, seed=seed)
    assert 1.0 - 1e-12 <= r.ratio <= GROTHENDIECK_UPPER + 1e-6
    assert GROTHENDIECK_UPPER < 1.7823
