import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmoment.families import PowerLawFamily
from bmoment.gaussian_calculus import CovOp, Grid, bm_covariance, rw_second
from bmoment.process_lab import (
    ProcessModel,
    c0lim_experiment,
    estimate_from_samples,
    estimate_moment,
    gaussian_abs_moment,
    injective_decay_experiment,
    moment_equal_test,
    sample,
    sample_block,
)
from bmoment.rng import BLOCK_SIZE, block_generator, blocks
from bmoment.tensor_core import check_symmetric


def max_z(est, exact):
    diff = np.abs(est.tensor.entries - np.asarray(exact))
    se = est.stderr.entries
    assert np.all(se[diff > 0] > 0)
    return float(np.max(np.where(se > 0, diff / np.where(se > 0, se, 1), 0.0)))


def test_blocks_cover_samples():
    plan = blocks(2 * BLOCK_SIZE + 5)
    assert plan == [(0, BLOCK_SIZE), (1, BLOCK_SIZE), (2, 5)]


def test_block_streams_are_distinct():
    a = block_generator(1, 0).random(4)
    assert not np.array_equal(a, block_generator(1, 1).random(4))
    assert not np.array_equal(a, block_generator(2, 0).random(4))
    assert not np.array_equal(a, block_generator(1, 0, stream=1).random(4))
    assert np.array_equal(a, block_generator(1, 0).random(4))


def test_indicator_samples_monotone_binary():
    X = sample_block(ProcessModel.indicator(Grid.uniform(9)), block_generator(0, 0), 500)
    assert set(np.unique(X)) <= {0.0, 1.0}
    assert np.all(np.diff(X, axis=1) >= 0)


def test_scaled_gaussian_one_dim_is_standard_normal():
    X = sample_block(ProcessModel.scaled_gaussian(1), block_generator(3, 0), BLOCK_SIZE)[:, 0]
    ref = block_generator(3, 0).standard_normal((BLOCK_SIZE, 1))[:, 0]
    assert np.array_equal(X, ref)


def test_sample_shapes():
    fam = PowerLawFamily(2.5, 0.5)
    models = [
        ProcessModel.brownian(Grid.uniform(4)),
        ProcessModel.indicator(Grid.uniform(4)),
        ProcessModel.random_walk(Grid.uniform(4), 8),
        ProcessModel.gaussian_vector(CovOp(np.eye(3))),
        ProcessModel.sphere_uniform(5),
        ProcessModel.scaled_gaussian(5),
        ProcessModel.basis_uniform(5),
        ProcessModel.diagonal_seq(fam, 20),
    ]
    rng = block_generator(0, 0)
    for m in models:
        assert sample(m, rng).shape == (m.dim,)
        assert sample_block(m, rng, 7).shape == (7, m.dim)
    S = sample_block(models[4], rng, 100)
    np.testing.assert_allclose(np.linalg.norm(S, axis=1), 1.0, rtol=1e-14)
    B = sample_block(models[6], rng, 100)
    assert np.all(B.sum(axis=1) == 1.0)


def test_brownian_variance():
    g = Grid.uniform(8)
    est = estimate_moment(ProcessModel.brownian(g), 2, 100000, 11)
    var = np.diag(est.tensor.entries)
    se = np.diag(est.stderr.entries)
    assert np.all(np.abs(var - g.points) <= 4 * se)


def test_brownian_second_moment_16_grid():
    g = Grid.uniform(16)
    est = estimate_moment(ProcessModel.brownian(g), 2, 200000, 1)
    assert max_z(est, bm_covariance(g).entries) <= 4.0


def test_gaussian_third_moment_vanishes():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3))
    est = estimate_moment(ProcessModel.gaussian_vector(CovOp(A @ A.T)), 3, 100000, 2)
    assert max_z(est, 0.0) <= 4.0


def test_indicator_first_moment():
    g = Grid.uniform(10)
    est = estimate_moment(ProcessModel.indicator(g), 1, 50000, 3)
    assert max_z(est, g.points) <= 4.0


def test_random_walk_second_moment():
    g = Grid([0.3, 0.6, 1.0])
    est = estimate_moment(ProcessModel.random_walk(g, 10), 2, 50000, 4)
    assert max_z(est, rw_second(g, 10).entries) <= 4.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_estimate_matches_direct_formula(k):
    X = np.random.default_rng(5).normal(size=(3000, 3))
    est = estimate_from_samples(X, k)
    P = np.stack([np.einsum(",".join("abc"[:k]) + "->" + "abc"[:k], *([x] * k)) if k > 1 else x for x in X])
    np.testing.assert_allclose(est.tensor.entries, P.mean(axis=0), rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(est.stderr.entries, P.std(axis=0, ddof=1) / np.sqrt(len(X)), rtol=1e-8)
    assert check_symmetric(est.tensor)


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_deterministic_across_workers(workers):
    model = ProcessModel.brownian(Grid.uniform(6))
    a = estimate_moment(model, 3, 10 * BLOCK_SIZE + 17, 42, workers=1)
    b = estimate_moment(model, 3, 10 * BLOCK_SIZE + 17, 42, workers=workers)
    assert np.array_equal(a.tensor.entries, b.tensor.entries)
    assert np.array_equal(a.stderr.entries, b.stderr.entries)


def test_stderr_scaling():
    model = ProcessModel.brownian(Grid.uniform(8))
    small = estimate_moment(model, 2, 20000, 6)
    big = estimate_moment(model, 2, 80000, 6)
    ratio = np.median(small.stderr.entries) / np.median(big.stderr.entries)
    assert abs(ratio - 2.0) <= 0.2 * 2.0


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
@settings(max_examples=15)
def test_second_moment_psd_within_stderr(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    est = estimate_moment(ProcessModel.gaussian_vector(CovOp(A @ A.T / n)), 2, 4000, seed)
    lam = np.linalg.eigvalsh(est.tensor.entries)[0]
    assert lam >= -3 * float(np.max(est.stderr.entries))


@given(st.integers(1, 3), st.integers(0, 2**31 - 1), st.floats(0.01, 10))
@settings(max_examples=15)
def test_moment_equal_reflexive(k, seed, z):
    est = estimate_moment(ProcessModel.indicator(Grid.uniform(4)), k, 500, seed)
    res = moment_equal_test(est, est, z)
    assert res.equal and res.max_z == 0.0


def test_moment_equal_examples():
    g = Grid([0.2, 0.5, 0.9])
    bm = ProcessModel.brownian(g)
    a = estimate_moment(bm, 2, 50000, 1)
    b = estimate_moment(bm, 2, 50000, 2)
    assert moment_equal_test(a, b, z=5)
    ind = ProcessModel.indicator(g)
    assert moment_equal_test(estimate_moment(ind, 2, 50000, 3), b)
    res = moment_equal_test(estimate_moment(ind, 4, 50000, 3), estimate_moment(bm, 4, 50000, 4))
    assert not res.equal and res.max_z > 4
    with pytest.raises(ValueError):
        moment_equal_test(a, estimate_moment(bm, 3, 100, 1))


def test_zero_stderr_entries():
    # the indicator at t = 1 is always 1, so that entry has zero stderr
    g = Grid([0.5, 1.0])
    a = estimate_moment(ProcessModel.indicator(g), 1, 1000, 1)
    b = estimate_moment(ProcessModel.indicator(g), 1, 1000, 2)
    assert a.stderr.entries[1] == 0.0 and b.stderr.entries[1] == 0.0
    assert moment_equal_test(a, b, z=6).equal


def test_gaussian_abs_moment():
    assert gaussian_abs_moment(2) == pytest.approx(1.0)
    assert gaussian_abs_moment(4) == pytest.approx(3.0)
    assert gaussian_abs_moment(1) == pytest.approx(np.sqrt(2 / np.pi))


def test_injective_decay_examples():
    rows = injective_decay_experiment([16, 256], 2, 20000, 7)
    assert rows[0]["eps_norm"] == pytest.approx(1 / 16, rel=1e-14)
    assert rows[0]["pi_norm"] == pytest.approx(1.0, rel=1e-12)
    r = rows[1]
    assert abs(r["mc_mean_sq_norm"] - 1.0) <= 3 * r["mc_stderr"]
    (row,) = injective_decay_experiment([8], 4, 1000, 7)
    assert row["eps_norm"] <= 3 / 64 + 1e-12
    assert row["bound"] == pytest.approx(3 / 64)
    with pytest.raises(ValueError):
        injective_decay_experiment([513], 2, 10, 0)


def test_c0lim_examples():
    r = c0lim_experiment(4, 2)
    assert r["pi_norm"] == pytest.approx(0.25, abs=1e-12) and r["within_bound"]
    assert c0lim_experiment(1, 2)["pi_norm"] == pytest.approx(1.0, abs=1e-12)
    assert c0lim_experiment(6, 2)["pi_norm"] == pytest.approx(1 / 6, abs=1e-12)
    assert c0lim_experiment(3, 3)["pi_norm"] == pytest.approx(1 / 3, abs=1e-12)
    with pytest.raises(ValueError):
        c0lim_experiment(9, 2)
    with pytest.raises(ValueError):
        c0lim_experiment(6, 3)


def test_diagonal_seq_truncation():
    fam = PowerLawFamily(3.0, 0.0)
    p = fam.truncated_probabilities(5)
    assert p.sum() == pytest.approx(1.0, rel=1e-14)
    assert p[-1] == pytest.approx(fam.p(5) + fam.tail_mass(5))
    est = estimate_moment(ProcessModel.diagonal_seq(fam, 5), 1, 50000, 8)
    assert max_z(est, p) <= 4.0
