"""Lip_s seminorms, the moment gate for zeta_s, and bounds on zeta_s.

For ``s = m + gamma`` with ``m = ceil(s) - 1`` and ``0 < gamma <= 1`` the
seminorm of ``f`` is the gamma-Hoelder constant of its m-th derivative.
``zeta_s(X, Y)`` is finite exactly when the moments of orders 1..m agree,
and is then at most ``E||X||^s + E||Y||^s``.  Samples only allow a
statistical version of the equality, which is what :func:`moment_gate`
reports.

Vectors are measured in the Euclidean norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_hermite, ndtr

from .process_lab import DEFAULT_Z, estimate_from_samples, moment_equal_test
from .rng import block_generator
from .tensor_core import MomentTensor

__all__ = [
    "LipSplit",
    "lip_split",
    "OrderCheck",
    "GateResult",
    "moment_gate",
    "zeta1_1d",
    "ZetaLower",
    "zeta_lower",
    "zeta_lower_detail",
    "lip_seminorm_zero_check",
    "power_lip_constant",
    "gauss_step_lip_constant",
    "trig_lip_constant",
    "holder_quotient",
]

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)
WIDTH_FACTORS = (0.25, 0.5, 1.0)
FREQ_FACTORS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class LipSplit:
    s: float
    m: int
    gamma: float

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= 1.0) or self.m < 0 or self.m + self.gamma != self.s:
            raise ValueError(f"invalid split {self}")


def lip_split(s: float) -> LipSplit:
    """``s = m + gamma`` with integer ``m >= 0`` and ``gamma`` in (0, 1]."""
    s = float(s)
    if not (s > 0 and math.isfinite(s)):
        raise ValueError(f"s must be positive and finite, got {s}")
    m = math.ceil(s) - 1
    return LipSplit(s=s, m=m, gamma=s - m)


# Lip_s constants of the one-dimensional dictionary

def power_lip_constant(s: float) -> float:
    """Seminorm of ``y -> |y - a|^s`` (any shift ``a``).

    The m-th derivative is ``c |y - a|^gamma`` (m even) or
    ``c sign(y - a) |y - a|^gamma`` (m odd) with ``c = Gamma(s+1) / Gamma(gamma+1)``.
    ``|y|^gamma`` has gamma-Hoelder constant 1 and the signed version 2^(1-gamma).
    """
    sp = lip_split(s)
    c = math.exp(math.lgamma(s + 1.0) - math.lgamma(sp.gamma + 1.0))
    return c * (2.0 ** (1.0 - sp.gamma) if sp.m % 2 else 1.0)


@lru_cache(maxsize=None)
def _gauss_derivative_bounds(m: int) -> tuple[float, float]:
    """(oscillation of Phi^(m), sup |Phi^(m+1)|) for the standard normal CDF Phi."""
    x = np.linspace(-40.0, 40.0, 800001)
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def deriv(j: int) -> np.ndarray:
        # Phi^(j) = (-1)^(j-1) He_{j-1}(x) pdf(x) for j >= 1
        if j == 0:
            return ndtr(x)
        he = eval_hermite(j - 1, x / math.sqrt(2.0)) * 2.0 ** (-(j - 1) / 2.0)
        return (-1.0) ** (j - 1) * he * pdf

    g = deriv(m)
    osc = float(g.max() - g.min())
    slope = float(np.max(np.abs(deriv(m + 1))))
    # grid maxima can undershoot the true suprema slightly
    pad = 1.0 + 1e-6
    return osc * pad, slope * pad


def gauss_step_lip_constant(s: float, h: float) -> float:
    """Seminorm bound for ``y -> Phi((y - a) / h)``.

    With ``g = Phi^(m)``: ``|g(x) - g(y)| <= min(osc g, sup|g'| |x - y|)``
    ``<= osc^(1-gamma) sup|g'|^gamma |x - y|^gamma``; the chain rule adds ``h^-s``.
    """
    sp = lip_split(s)
    osc, slope = _gauss_derivative_bounds(sp.m)
    return osc ** (1.0 - sp.gamma) * slope**sp.gamma * h ** (-sp.s)


def trig_lip_constant(s: float, omega: float) -> float:
    """Seminorm bound for ``y -> cos(omega y + theta)``: ``omega^s 2^(1-gamma)``."""
    sp = lip_split(s)
    return abs(omega) ** sp.s * 2.0 ** (1.0 - sp.gamma)


def holder_quotient(phi_m, x: np.ndarray, gamma: float) -> float:
    """Largest ``|phi_m(x_i) - phi_m(x_j)| / |x_i - x_j|^gamma`` over a point set."""
    x = np.asarray(x, dtype=float)
    v = phi_m(x)
    dx = np.abs(x[:, None] - x[None, :])
    dv = np.abs(v[:, None] - v[None, :])
    mask = dx > 0
    return float(np.max(dv[mask] / dx[mask] ** gamma))


# zeta_1 in one dimension

def zeta1_1d(X, Y) -> float:
    """``integral |F_X - F_Y|`` for the empirical distribution functions."""
    x = np.sort(np.asarray(X, dtype=float).ravel())
    y = np.sort(np.asarray(Y, dtype=float).ravel())
    if x.size == 0 or y.size == 0:
        raise ValueError("samples must be non-empty")
    pts = np.concatenate([x, y])
    pts.sort(kind="mergesort")
    Fx = np.searchsorted(x, pts[:-1], side="right") / x.size
    Fy = np.searchsorted(y, pts[:-1], side="right") / y.size
    return float(np.sum(np.abs(Fx - Fy) * np.diff(pts)))


# lower bounds from one-dimensional test functions

def _as_samples(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.ndim != 2 or Z.shape[0] == 0:
        raise ValueError("samples must be a non-empty (N,) or (N, dim) array")
    return Z


def _directions(dim: int, n_directions: int, seed: int) -> np.ndarray:
    basis = np.eye(dim)
    dirs = [basis, -basis]
    if dim > 1 and n_directions > 0:
        g = block_generator(seed, 0, stream=1).standard_normal((n_directions, dim))
        dirs.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    return np.vstack(dirs)


@dataclass(frozen=True)
class ZetaLower:
    value: float
    stderr: float
    best: str

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "best": self.best}


def zeta_lower_detail(X, Y, s: float, n_directions: int = 16, seed: int = 0) -> ZetaLower:
    """Lower bound on ``zeta_s(X, Y)`` with the standard error of the winning statistic.

    Test functions are ``phi(u . x)`` with unit ``u`` and ``phi`` from a fixed
    dictionary whose Lip_s constants are known: ``|y - a|^s``, Gaussian CDF
    steps and cosines.  Shifts come from quantiles of the pooled projections
    (at levels symmetric about 1/2) and widths/frequencies from their standard
    deviation, so the bound scales exactly as ``|t|^s`` when both samples are
    multiplied by ``t``.  For ``s = 1`` the exact one-dimensional ``zeta_1``
    of each projection is included.
    """
    sp = lip_split(s)
    X, Y = _as_samples(X), _as_samples(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError("samples must share a dimension")
    nx, ny = X.shape[0], Y.shape[0]
    best = (0.0, 0.0, "none")
    c_pow = power_lip_constant(s)

    def consider(fx: np.ndarray, fy: np.ndarray, const: float, label: str) -> None:
        nonlocal best
        diff = abs(float(np.mean(fx)) - float(np.mean(fy))) / const
        if diff > best[0]:
            se = math.sqrt(float(np.var(fx)) / nx + float(np.var(fy)) / ny) / const
            best = (diff, se, label)

    for idx, u in enumerate(_directions(X.shape[1], n_directions, seed)):
        px, py = X @ u, Y @ u
        pooled = np.concatenate([px, py])
        sd = float(np.std(pooled))
        if sd == 0.0:
            continue
        shifts = np.quantile(pooled, QUANTILE_LEVELS)
        for a in shifts:
            consider(np.abs(px - a) ** s, np.abs(py - a) ** s, c_pow, f"dir{idx}:power(a={a:.4g})")
            for w in WIDTH_FACTORS:
                h = w * sd
                consider(ndtr((px - a) / h), ndtr((py - a) / h), gauss_step_lip_constant(s, h), f"dir{idx}:step(a={a:.4g},h={h:.4g})")
        for f in FREQ_FACTORS:
            om = f / sd
            c = trig_lip_constant(s, om)
            consider(np.cos(om * px), np.cos(om * py), c, f"dir{idx}:cos(w={om:.4g})")
            consider(np.sin(om * px), np.sin(om * py), c, f"dir{idx}:sin(w={om:.4g})")
        if sp.s == 1.0:
            z1 = zeta1_1d(px, py)
            if z1 > best[0]:
                best = (z1, sd * math.sqrt(1.0 / nx + 1.0 / ny), f"dir{idx}:zeta1")
    return ZetaLower(value=float(best[0]), stderr=float(best[1]), best=best[2])


def zeta_lower(X, Y, s: float, n_directions: int = 16, seed: int = 0) -> float:
    """Certified-test-function lower bound on ``zeta_s(X, Y)`` (statistical only through sampling)."""
    return zeta_lower_detail(X, Y, s, n_directions, seed).value


# the moment gate

@dataclass(frozen=True)
class OrderCheck:
    k: int
    max_z: float
    passed: bool

    def to_json(self) -> dict:
        return {"k": self.k, "max_z": self.max_z, "passed": self.passed}


@dataclass(frozen=True)
class GateResult:
    s: float
    m: int
    per_order: tuple
    gate_passed: bool
    upper_bound: float
    lower_bound: float
    lower_stderr: float

    def __post_init__(self) -> None:
        if self.gate_passed != all(o.passed for o in self.per_order):
            raise ValueError("gate_passed must be the conjunction of the per-order checks")
        if math.isinf(self.upper_bound) == self.gate_passed:
            raise ValueError("upper_bound is infinite exactly when the gate fails")

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "m": self.m,
            "per_order": [o.to_json() for o in self.per_order],
            "gate_passed": self.gate_passed,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "lower_stderr": self.lower_stderr,
        }


def moment_gate(X, Y, s: float, z: float = DEFAULT_Z, n_directions: int = 16, seed: int = 0) -> GateResult:
    """Decide statistically whether ``zeta_s(X, Y) < inf``.

    Moments of orders ``1..m`` are compared entrywise with
    :func:`~bmoment.process_lab.moment_equal_test` at level ``z``.  When all
    pass, the upper bound is ``mean ||X||^s + mean ||Y||^s``; otherwise it is
    ``inf``.
    """
    sp = lip_split(s)
    if not z > 0:
        raise ValueError("z must be positive")
    X, Y = _as_samples(X), _as_samples(Y)
    if X.shape[1] != Y.shape[1]:
        raise ValueError("samples must share a dimension")
    if X.shape[0] < 2 or Y.shape[0] < 2:
        raise ValueError("need at least two samples on each side")
    checks = []
    for k in range(1, sp.m + 1):
        res = moment_equal_test(estimate_from_samples(X, k), estimate_from_samples(Y, k), z)
        checks.append(OrderCheck(k=k, max_z=res.max_z, passed=res.equal))
    passed = all(c.passed for c in checks)
    if passed:
        upper = float(np.mean(np.linalg.norm(X, axis=1) ** s) + np.mean(np.linalg.norm(Y, axis=1) ** s))
    else:
        upper = math.inf
    lower = zeta_lower_detail(X, Y, s, n_directions, seed)
    return GateResult(
        s=sp.s,
        m=sp.m,
        per_order=tuple(checks),
        gate_passed=passed,
        upper_bound=upper,
        lower_bound=lower.value,
        lower_stderr=lower.stderr,
    )


# polynomials with vanishing seminorm

def _poly_value(tensors: list, x: np.ndarray) -> float:
    total = 0.0
    for T in tensors:
        if np.ndim(T) == 0:
            total += float(T)
            continue
        out = T
        for _ in range(np.ndim(T)):
            out = out @ x
        total += float(out)
    return total


def lip_seminorm_zero_check(coeff_tensors, s: float, n_pairs: int = 20, seed: int = 0, tol: float = 1e-8) -> bool:
    """Check numerically that ``f(x) = sum_k alpha_k(x, ..., x)`` has ``||f||_{Lip_s} = 0``.

    This holds exactly when the m-th derivative of ``f`` is constant.  The
    m-th mixed finite difference with random steps is evaluated at
    ``n_pairs`` random pairs of base points and compared.  Terms may be
    constants or :class:`~bmoment.tensor_core.MomentTensor` / array
    coefficients of any order; orders above m make the check fail unless
    their symmetric part vanishes.
    """
    sp = lip_split(s)
    tensors = []
    dim = None
    for T in coeff_tensors:
        arr = T.entries if isinstance(T, MomentTensor) else np.asarray(T, dtype=float)
        if arr.ndim > 0:
            if dim is None:
                dim = arr.shape[0]
            elif any(d != dim for d in arr.shape):
                raise ValueError("all coefficient tensors must share a dimension")
        tensors.append(arr)
    if dim is None:
        return True  # constants only
    rng = block_generator(seed, 0, stream=2)
    m = sp.m
    subsets = [[i for i in range(m) if mask >> i & 1] for mask in range(1 << m)]
    for _ in range(n_pairs):
        hs = rng.standard_normal((m, dim))
        vals = []
        scale = 1.0
        for base in rng.standard_normal((2, dim)):
            acc = 0.0
            for S in subsets:
                fv = _poly_value(tensors, base + hs[S].sum(axis=0))
                # rounding in the alternating sum is relative to the summands
                scale = max(scale, abs(fv))
                acc += (-1.0) ** (m - len(S)) * fv
            vals.append(acc)
        if abs(vals[0] - vals[1]) > tol * scale:
            return False
    return True
