import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bmoment.gaussian_calculus import wick_moment
from bmoment.tensor_core import (
    MomentTensor,
    MultilinearForm,
    NormedSpace,
    NormKind,
    apply_form,
    check_symmetric,
    contract,
    double_factorial,
    outer,
    outer_power,
    pair_partitions,
    permute,
    symmetrize,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def tensors(max_dim=3, max_order=4):
    return st.tuples(st.integers(1, max_dim), st.integers(1, max_order)).flatmap(
        lambda nk: arrays(np.float64, (nk[0],) * nk[1], elements=finite).map(MomentTensor)
    )


def test_dual_kinds():
    assert NormKind.SUP.dual() is NormKind.L1
    assert NormKind.L1.dual() is NormKind.SUP
    assert NormKind.L2.dual() is NormKind.L2
    assert NormedSpace(3, "sup").dual() == NormedSpace(3, NormKind.L1)


def test_space_rejects_bad_dim():
    with pytest.raises(ValueError):
        NormedSpace(0, NormKind.L2)


def test_tensor_validation():
    with pytest.raises(ValueError):
        MomentTensor(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        MomentTensor(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        MomentTensor(np.float64(1.0))


def test_tensor_is_immutable_copy():
    a = np.eye(2)
    T = MomentTensor(a)
    a[0, 0] = 5.0
    assert T.entries[0, 0] == 1.0
    with pytest.raises(ValueError):
        T.entries[0, 0] = 2.0


def test_outer_power_examples():
    np.testing.assert_array_equal(outer_power([1, 0], 2).entries, [[1, 0], [0, 0]])
    np.testing.assert_array_equal(outer_power([1, 1], 3).entries, np.ones((2, 2, 2)))
    np.testing.assert_array_equal(outer_power([2, -1], 2).entries, [[4, -2], [-2, 1]])
    assert outer_power([2, -1], 2).symmetric


def test_outer_power_rejects_zero_order():
    with pytest.raises(ValueError):
        outer_power([1.0], 0)


def test_symmetrize_examples():
    e1, e2 = np.eye(2)
    np.testing.assert_array_equal(symmetrize(outer(e1, e2)).entries, [[0, 0.5], [0.5, 0]])
    S = outer_power([1.0, 2.0], 3)
    np.testing.assert_array_equal(symmetrize(S).entries, S.entries)
    out = symmetrize(outer(e1, e1, e2)).entries
    expected = np.zeros((2, 2, 2))
    for idx in set(itertools.permutations((0, 0, 1))):
        expected[idx] = 1 / 3
    np.testing.assert_allclose(out, expected, rtol=0, atol=1e-15)


def test_permute_examples():
    e1, e2 = np.eye(2)
    T = outer(e1, e2)
    np.testing.assert_array_equal(permute(T, (0, 1)).entries, T.entries)
    np.testing.assert_array_equal(permute(T, (1, 0)).entries, outer(e2, e1).entries)
    with pytest.raises(ValueError):
        permute(T, (0,))
    with pytest.raises(ValueError):
        permute(T, (0, 0))


def test_permute_definition():
    rng = np.random.default_rng(1)
    T = MomentTensor(rng.normal(size=(2, 2, 2)))
    sigma = (2, 0, 1)
    P = permute(T, sigma).entries
    for s in itertools.product(range(2), repeat=3):
        assert P[s] == T.entries[tuple(s[j] for j in sigma)]


def test_permute_middle_term_of_fourth_moment():
    # swapping the second and third slots of S x S gives S_ac S_bd
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3))
    S = A @ A.T
    SS = MomentTensor(np.einsum("ab,cd->abcd", S, S))
    np.testing.assert_allclose(permute(SS, (0, 2, 1, 3)).entries, np.einsum("ac,bd->abcd", S, S), rtol=0, atol=0)


def test_contract_examples():
    rng = np.random.default_rng(3)
    x, xs = rng.normal(size=3), rng.normal(size=3)
    assert contract(outer_power(x, 3), [xs] * 3) == pytest.approx((xs @ x) ** 3, rel=1e-12)
    e1, e2 = np.eye(2)
    assert contract(MomentTensor(np.eye(2)), [e1, e2]) == 0.0
    u = np.array([0.6, 0.8])
    assert contract(wick_moment(np.eye(2), 4), [u] * 4) == pytest.approx(3.0, rel=1e-14)


def test_contract_dimension_checks():
    T = MomentTensor(np.eye(2))
    with pytest.raises(ValueError):
        contract(T, [np.ones(2)])
    with pytest.raises(ValueError):
        contract(T, [np.ones(2), np.ones(3)])


def test_apply_form_examples():
    x = np.array([1.0, -2.0, 0.5])
    assert apply_form(MultilinearForm(np.eye(3)), [x, x]) == pytest.approx(x @ x)
    delta = np.zeros((2, 2))
    delta[0, 1] = 1.0
    e1, e2 = np.eye(2)
    assert MultilinearForm(delta)(e1, e2) == 1.0
    rng = np.random.default_rng(4)
    C = rng.normal(size=(3, 3, 3))
    alpha = MultilinearForm(C)
    basis = np.eye(3)
    for s in itertools.product(range(3), repeat=3):
        assert alpha(*basis[list(s)]) == C[s]
    with pytest.raises(ValueError):
        alpha(basis[0], basis[1])


@pytest.mark.parametrize("two_ell,count", [(2, 1), (4, 3), (6, 15), (8, 105), (10, 945)])
def test_pair_partition_counts(two_ell, count):
    parts = pair_partitions(two_ell)
    assert len(parts) == count == double_factorial(two_ell - 1)
    assert len({frozenset(map(frozenset, p)) for p in parts}) == count
    for p in parts:
        flat = sorted(i for pair in p for i in pair)
        assert flat == list(range(two_ell))


def _matchings_oracle(items):
    # independent enumeration: all perfect matchings via set partitions into pairs
    items = tuple(items)
    if not items:
        return {frozenset()}
    out = set()
    for a, b in itertools.combinations(items, 2):
        rest = tuple(i for i in items if i not in (a, b))
        for m in _matchings_oracle(rest):
            out.add(m | {frozenset((a, b))})
    return out


def test_pair_partitions_match_oracle():
    got = {frozenset(map(frozenset, p)) for p in pair_partitions(6)}
    assert got == _matchings_oracle(range(6))


@pytest.mark.parametrize("bad", [0, 1, 3, 5])
def test_pair_partitions_reject(bad):
    with pytest.raises(ValueError):
        pair_partitions(bad)


def test_json_round_trip():
    T = MomentTensor(np.arange(8.0).reshape(2, 2, 2))
    obj = T.to_json()
    assert obj == {"order": 3, "dim": 2, "entries": list(np.arange(8.0)), "symmetric": False}
    assert MomentTensor.from_json(obj).allclose(T, rtol=0)
    with pytest.raises(ValueError):
        MomentTensor.from_json({**obj, "extra": 1})
    with pytest.raises(ValueError):
        MomentTensor.from_json({**obj, "entries": [1.0]})


def test_check_symmetric():
    assert check_symmetric(outer_power([1.0, 2.0, 3.0], 3))
    assert not check_symmetric(outer([1.0, 0.0], [0.0, 1.0]))


@given(tensors(), st.data())
def test_symmetrize_idempotent_and_permutation_invariant(T, data):
    S = symmetrize(T)
    assert check_symmetric(S, tol=1e-12)
    np.testing.assert_allclose(symmetrize(S).entries, S.entries, rtol=1e-12, atol=1e-12)
    sigma = data.draw(st.permutations(range(T.order)))
    np.testing.assert_allclose(symmetrize(permute(T, sigma)).entries, S.entries, rtol=1e-12, atol=1e-12)


@given(tensors(max_order=3), st.data())
def test_contract_is_multilinear(T, data):
    n, k = T.dim, T.order
    vec = arrays(np.float64, (n,), elements=finite)
    duals = [data.draw(vec) for _ in range(k)]
    slot = data.draw(st.integers(0, k - 1))
    y = data.draw(vec)
    a, b = data.draw(finite), data.draw(finite)
    mixed = list(duals)
    mixed[slot] = a * duals[slot] + b * y
    other = list(duals)
    other[slot] = y
    lhs = contract(T, mixed)
    rhs = a * contract(T, duals) + b * contract(T, other)
    scale = (abs(a) + abs(b) + 1) * np.abs(T.entries).sum() * (1 + max(np.abs(v).max() for v in duals + [y])) ** k
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_outer_power_contract_identity_100_cases():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        x, xs = rng.normal(size=n), rng.normal(size=n)
        assert contract(outer_power(x, k), [xs] * k) == pytest.approx((xs @ x) ** k, rel=1e-10, abs=1e-12)


def test_arithmetic():
    A = MomentTensor(np.eye(2), symmetric=True)
    B = MomentTensor(np.ones((2, 2)), symmetric=True)
    assert (A + B).symmetric and (A - B).symmetric
    np.testing.assert_array_equal((2 * A).entries, 2 * np.eye(2))
    np.testing.assert_array_equal((-A).entries, -np.eye(2))
    with pytest.raises(ValueError):
        A + MomentTensor(np.ones(2))
    assert math.isclose(float((A * 3.0).entries.sum()), 6.0)
