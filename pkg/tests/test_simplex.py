import numpy as np
import pytest
from scipy.optimize import linprog

from bmoment.simplex import InfeasibleLP, UnboundedLP, min_l1_decomposition, simplex


def test_small_lp():
    # min -x - y  s.t.  x + 2y + s1 = 4, 3x + y + s2 = 6
    c = np.array([-1.0, -1.0, 0.0, 0.0])
    A = np.array([[1.0, 2.0, 1.0, 0.0], [3.0, 1.0, 0.0, 1.0]])
    res = simplex(c, A, [4.0, 6.0])
    assert res.objective == pytest.approx(-2.8)
    np.testing.assert_allclose(res.x[:2], [1.6, 1.2])


def test_infeasible_and_unbounded():
    with pytest.raises(InfeasibleLP):
        simplex([1.0, 1.0], [[1.0, 1.0]], [-1.0])
    with pytest.raises(UnboundedLP):
        simplex([-1.0, 0.0], [[1.0, -1.0]], [0.0])


def test_negative_rhs_and_duals():
    c = np.array([2.0, 3.0, 0.0])
    A = np.array([[-1.0, -1.0, 1.0]])
    res = simplex(c, A, [-2.0])  # x + y - s = 2
    assert res.objective == pytest.approx(4.0)
    assert res.duals @ np.array([-2.0]) == pytest.approx(res.objective)


@pytest.mark.parametrize("seed", range(20))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(2, 8)), int(rng.integers(8, 20))
    A = rng.normal(size=(m, n))
    b = A @ rng.random(n)  # feasible by construction
    c = rng.random(n) + 0.1  # bounded below on x >= 0
    ours = simplex(c, A, b)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ref.status == 0
    assert ours.objective == pytest.approx(ref.fun, rel=1e-8, abs=1e-9)
    np.testing.assert_allclose(A @ ours.x, b, atol=1e-8)
    assert np.all(ours.x >= -1e-12)
    # strong duality
    assert ours.duals @ b == pytest.approx(ours.objective, rel=1e-8, abs=1e-9)


def test_degenerate_cycling_example():
    # Beale's classic cycling example; Bland's rule must terminate
    c = np.array([-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0])
    A = np.array([
        [0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
        [0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
    ])
    res = simplex(c, A, [0.0, 0.0, 1.0])
    assert res.objective == pytest.approx(-0.05)


def test_min_l1_decomposition():
    rng = np.random.default_rng(7)
    cols = rng.normal(size=(4, 10))
    target = rng.normal(size=4)
    res = min_l1_decomposition(cols, target)
    np.testing.assert_allclose(cols @ res.x, target, atol=1e-9)
    assert res.objective == pytest.approx(np.abs(res.x).sum())
    ref = linprog(np.ones(20), A_eq=np.hstack([cols, -cols]), b_eq=target, bounds=(0, None), method="highs")
    assert res.objective == pytest.approx(ref.fun, rel=1e-8)
    assert np.max(np.abs(cols.T @ res.duals)) <= 1 + 1e-9
