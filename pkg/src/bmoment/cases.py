"""Named end-to-end experiments with pinned parameters.

Each case returns a JSON-ready dict with a boolean ``passed`` plus the
numbers it was decided on.
"""

from __future__ import annotations

import math

import numpy as np

from .gaussian_calculus import Grid, bm_covariance, bm_fourth, wick_moment
from .process_lab import (
    ProcessModel,
    c0lim_experiment,
    estimate_moment,
    injective_decay_experiment,
    moment_equal_test,
)
from .rng import block_generator
from .tensor_core import MultilinearForm
from .tensor_norms import GROTHENDIECK_UPPER, grothendieck_check
from .zolotarev import moment_gate

__all__ = ["CASES", "run_case"]


def _max_z(est, exact) -> float:
    diff = np.abs(est.tensor.entries - exact.entries)
    se = est.stderr.entries
    return float(np.max(np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 0, np.inf, 0.0))))


def case_egauss(seed: int) -> dict:
    rows = injective_decay_experiment([4, 16, 64, 256], 2, 20000, seed)
    ok = all(
        abs(r["pi_norm"] - 1.0) <= 1e-12
        and abs(r["eps_norm"] - 1.0 / r["n"]) <= 1e-12
        and abs(r["mc_mean_sq_norm"] - 1.0) <= 3.0 * r["mc_stderr"]
        for r in rows
    )
    return {"passed": ok, "rows": rows}


def case_ec0lim(seed: int) -> dict:
    rows = [c0lim_experiment(n, 2) for n in range(2, 7)]
    ok = all(abs(r["pi_norm"] - 1.0 / r["n"]) <= 1e-9 and r["within_bound"] for r in rows)
    return {"passed": ok, "rows": rows}


def case_w4(seed: int) -> dict:
    grid = Grid.uniform(16)
    model = ProcessModel.brownian(grid)
    cov = bm_covariance(grid)
    z2 = _max_z(estimate_moment(model, 2, 200000, seed), cov)
    z4 = _max_z(estimate_moment(model, 4, 200000, seed), bm_fourth(grid))
    wick_gap = float(np.max(np.abs(bm_fourth(grid).entries - wick_moment(cov.entries, 4).entries)))
    return {
        "passed": z2 <= 4.0 and z4 <= 4.0 and wick_gap == 0.0,
        "max_z_order2": z2,
        "max_z_order4": z4,
        "wick_max_abs_gap": wick_gap,
    }


def case_indicator_vs_bm(seed: int) -> dict:
    grid = Grid.uniform(10)
    out: dict = {"grid": grid.points.tolist()}
    for k in (2, 4):
        a = estimate_moment(ProcessModel.indicator(grid), k, 100000, seed)
        b = estimate_moment(ProcessModel.brownian(grid), k, 100000, seed + 1)
        out[f"order{k}"] = moment_equal_test(a, b).to_json()
    out["passed"] = out["order2"]["equal"] and not out["order4"]["equal"]
    return out


def case_groth(seed: int) -> dict:
    rng = block_generator(seed, 0, stream=5)
    worst = 0.0
    for i in range(200):
        n = int(rng.integers(2, 7))
        res = grothendieck_check(MultilinearForm(rng.standard_normal((n, n))), seed=i)
        worst = max(worst, res.ratio)
    u, v = rng.standard_normal(5), rng.standard_normal(5)
    ident = grothendieck_check(MultilinearForm(np.eye(5))).ratio
    rank_one = grothendieck_check(MultilinearForm(np.outer(u, v))).ratio
    ok = worst <= GROTHENDIECK_UPPER + 1e-6 and abs(ident - 1.0) <= 1e-8 and abs(rank_one - 1.0) <= 1e-8
    return {
        "passed": ok,
        "max_ratio": worst,
        "bound": GROTHENDIECK_UPPER,
        "identity_ratio": ident,
        "rank_one_ratio": rank_one,
    }


def case_lmac(seed: int) -> dict:
    N = 100000
    x = block_generator(seed, 0, stream=6).standard_normal(N)
    y = block_generator(seed, 0, stream=7).uniform(-math.sqrt(3.0), math.sqrt(3.0), N)
    matched = moment_gate(x, y, 3.0)
    shifted = moment_gate(x, y + 1.0, 2.0)
    ok = matched.gate_passed and math.isfinite(matched.upper_bound) and not shifted.gate_passed
    ok = ok and not shifted.per_order[0].passed and math.isinf(shifted.upper_bound)
    return {"passed": ok, "matched_s3": matched.to_json(), "shifted_s2": shifted.to_json()}


CASES = {
    "egauss": case_egauss,
    "ec0lim": case_ec0lim,
    "w4": case_w4,
    "indicator-vs-bm": case_indicator_vs_bm,
    "groth": case_groth,
    "lmac": case_lmac,
}


def run_case(case_id: str, seed: int) -> dict:
    try:
        fn = CASES[case_id]
    except KeyError:
        raise ValueError(f"unknown case {case_id!r}; choose from {sorted(CASES)}") from None
    return fn(seed)
