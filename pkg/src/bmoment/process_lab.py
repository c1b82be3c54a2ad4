"""Seeded samplers and Monte Carlo moment estimation.

Each model produces vectors of a fixed dimension: the values of a process
on a grid, or a finite-dimensional random vector.  Moment tensors are
estimated block by block (see :mod:`bmoment.rng`) and the per-block
statistics are merged in a fixed pairwise tree, so the result does not
depend on how many workers are used.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .families import PowerLawFamily
from .gaussian_calculus import CovOp, Grid, step_index, wick_moment
from .rng import BLOCK_SIZE, block_generator, blocks
from .tensor_core import MAX_ENTRIES, MomentTensor, NormedSpace, NormKind, symmetrize
from .tensor_norms import injective_norm, lp_feasible, projective_norm

__all__ = [
    "ModelKind",
    "ProcessModel",
    "EstimatedMoment",
    "MomentEqualResult",
    "sample",
    "sample_block",
    "estimate_moment",
    "estimate_from_samples",
    "moment_equal_test",
    "gaussian_abs_moment",
    "injective_decay_experiment",
    "c0lim_experiment",
    "DEFAULT_Z",
]

DEFAULT_Z = 4.0
C0LIM_MAX_KN = 16


class ModelKind(str, enum.Enum):
    BROWNIAN = "brownian"
    INDICATOR = "indicator"
    RANDOM_WALK = "random_walk"
    GAUSSIAN_VECTOR = "gaussian_vector"
    SPHERE_UNIFORM = "sphere_uniform"
    SCALED_GAUSSIAN = "scaled_gaussian"
    BASIS_UNIFORM = "basis_uniform"
    DIAGONAL_SEQ = "diagonal_seq"


_GRID_KINDS = (ModelKind.BROWNIAN, ModelKind.INDICATOR, ModelKind.RANDOM_WALK)
_N_KINDS = (ModelKind.SPHERE_UNIFORM, ModelKind.SCALED_GAUSSIAN, ModelKind.BASIS_UNIFORM)


@dataclass(frozen=True, eq=False)
class ProcessModel:
    """A sampler description.  Use the classmethod constructors."""

    kind: ModelKind
    grid: Grid | None = None
    n_steps: int | None = None
    cov: CovOp | None = None
    n: int | None = None
    family: PowerLawFamily | None = None
    truncation: int | None = None

    def __post_init__(self) -> None:
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in _GRID_KINDS and self.grid is None:
            raise ValueError(f"{kind.value} needs a grid")
        if kind is ModelKind.RANDOM_WALK and (self.n_steps is None or self.n_steps < 1):
            raise ValueError("random_walk needs n_steps >= 1")
        if kind is ModelKind.GAUSSIAN_VECTOR and self.cov is None:
            raise ValueError("gaussian_vector needs a covariance")
        if kind in _N_KINDS and (self.n is None or self.n < 1):
            raise ValueError(f"{kind.value} needs n >= 1")
        if kind is ModelKind.DIAGONAL_SEQ:
            if self.family is None or self.truncation is None or self.truncation < 1:
                raise ValueError("diagonal_seq needs a family and a truncation >= 1")
        if kind is ModelKind.GAUSSIAN_VECTOR:
            # a PSD square root that also works for singular covariances
            lam, V = np.linalg.eigh(self.cov.matrix)
            root = V * np.sqrt(np.clip(lam, 0.0, None))
            root.setflags(write=False)
            object.__setattr__(self, "_root", root)

    @classmethod
    def brownian(cls, grid: Grid) -> "ProcessModel":
        return cls(ModelKind.BROWNIAN, grid=grid)

    @classmethod
    def indicator(cls, grid: Grid) -> "ProcessModel":
        return cls(ModelKind.INDICATOR, grid=grid)

    @classmethod
    def random_walk(cls, grid: Grid, n_steps: int) -> "ProcessModel":
        return cls(ModelKind.RANDOM_WALK, grid=grid, n_steps=int(n_steps))

    @classmethod
    def gaussian_vector(cls, cov) -> "ProcessModel":
        return cls(ModelKind.GAUSSIAN_VECTOR, cov=cov if isinstance(cov, CovOp) else CovOp(cov))

    @classmethod
    def sphere_uniform(cls, n: int) -> "ProcessModel":
        return cls(ModelKind.SPHERE_UNIFORM, n=int(n))

    @classmethod
    def scaled_gaussian(cls, n: int) -> "ProcessModel":
        return cls(ModelKind.SCALED_GAUSSIAN, n=int(n))

    @classmethod
    def basis_uniform(cls, n: int) -> "ProcessModel":
        return cls(ModelKind.BASIS_UNIFORM, n=int(n))

    @classmethod
    def diagonal_seq(cls, family: PowerLawFamily, truncation: int) -> "ProcessModel":
        return cls(ModelKind.DIAGONAL_SEQ, family=family, truncation=int(truncation))

    @property
    def dim(self) -> int:
        if self.kind in _GRID_KINDS:
            return len(self.grid)
        if self.kind is ModelKind.GAUSSIAN_VECTOR:
            return self.cov.dim
        if self.kind is ModelKind.DIAGONAL_SEQ:
            return self.truncation
        return self.n

    def describe(self) -> dict:
        out: dict = {"kind": self.kind.value, "dim": self.dim}
        if self.grid is not None:
            out["grid"] = self.grid.points.tolist()
        if self.n_steps is not None:
            out["n_steps"] = self.n_steps
        if self.cov is not None:
            out["cov"] = self.cov.matrix.tolist()
        if self.family is not None:
            out["alpha"] = self.family.alpha
            out["beta"] = self.family.beta
            out["truncation"] = self.truncation
        return out


def sample_block(model: ProcessModel, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` independent draws as the rows of a ``(count, dim)`` array."""
    kind = model.kind
    if kind is ModelKind.BROWNIAN:
        t = model.grid.points
        dt = np.diff(t, prepend=0.0)
        return np.cumsum(rng.standard_normal((count, t.size)) * np.sqrt(dt), axis=1)
    if kind is ModelKind.INDICATOR:
        u = rng.random((count, 1))
        return (u <= model.grid.points[None, :]).astype(float)
    if kind is ModelKind.RANDOM_WALK:
        n = model.n_steps
        steps = 2.0 * rng.integers(0, 2, size=(count, n)) - 1.0
        walk = np.zeros((count, n + 1))
        np.cumsum(steps, axis=1, out=walk[:, 1:])
        idx = step_index(model.grid.points, n).astype(int)
        return walk[:, idx] / math.sqrt(n)
    if kind is ModelKind.GAUSSIAN_VECTOR:
        return rng.standard_normal((count, model.cov.dim)) @ model._root.T
    if kind is ModelKind.SPHERE_UNIFORM:
        z = rng.standard_normal((count, model.n))
        return z / np.linalg.norm(z, axis=1, keepdims=True)
    if kind is ModelKind.SCALED_GAUSSIAN:
        return rng.standard_normal((count, model.n)) / math.sqrt(model.n)
    if kind is ModelKind.BASIS_UNIFORM:
        out = np.zeros((count, model.n))
        out[np.arange(count), rng.integers(0, model.n, size=count)] = 1.0
        return out
    if kind is ModelKind.DIAGONAL_SEQ:
        N = model.truncation
        cdf = np.cumsum(model.family.truncated_probabilities(N))
        idx = np.minimum(np.searchsorted(cdf, rng.random(count), side="right"), N - 1)
        out = np.zeros((count, N))
        out[np.arange(count), idx] = model.family.a(idx + 1)
        return out
    raise ValueError(f"unknown model kind {kind!r}")


def sample(model: ProcessModel, rng: np.random.Generator) -> np.ndarray:
    """A single draw of ``model``."""
    return sample_block(model, rng, 1)[0]


@dataclass(frozen=True, eq=False)
class EstimatedMoment:
    tensor: MomentTensor
    stderr: MomentTensor
    n_samples: int
    seed: int | None

    @property
    def order(self) -> int:
        return self.tensor.order

    @property
    def dim(self) -> int:
        return self.tensor.dim

    def to_json(self) -> dict:
        return {
            "tensor": self.tensor.to_json(),
            "stderr": self.stderr.to_json(),
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


# Per-chunk statistics: (count, mean, M2) with mean and M2 shaped (n^a, n^b).
_Stats = tuple


def _power_rows(X: np.ndarray, a: int) -> np.ndarray:
    """Row-wise flattened outer powers; ``a = 0`` gives a column of ones."""
    out = np.ones((X.shape[0], 1))
    for _ in range(a):
        out = (out[:, :, None] * X[:, None, :]).reshape(X.shape[0], -1)
    return out


def _chunk_stats(X: np.ndarray, k: int) -> _Stats:
    a = (k + 1) // 2
    A = _power_rows(X, a)
    B = _power_rows(X, k - a)
    count = X.shape[0]
    s1 = A.T @ B
    s2 = (A * A).T @ (B * B)
    mean = s1 / count
    m2 = np.maximum(s2 - count * mean * mean, 0.0)
    return count, mean, m2


def _merge(x: _Stats, y: _Stats) -> _Stats:
    na, ma, qa = x
    nb, mb, qb = y
    n = na + nb
    delta = mb - ma
    return n, ma + delta * (nb / n), qa + qb + delta * delta * (na * nb / n)


def _tree_merge(stats: list[_Stats]) -> _Stats:
    while len(stats) > 1:
        merged = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            merged.append(stats[-1])
        stats = merged
    return stats[0]


def _finish(stats: _Stats, dim: int, k: int, seed: int | None) -> EstimatedMoment:
    count, mean, m2 = stats
    shape = (dim,) * k
    var = m2 / (count - 1)
    mean_t = symmetrize(MomentTensor(mean.reshape(shape)))
    se_t = symmetrize(MomentTensor(np.sqrt(var / count).reshape(shape)))
    return EstimatedMoment(tensor=mean_t, stderr=se_t, n_samples=int(count), seed=seed)


def _check_size(dim: int, k: int) -> None:
    if k < 1:
        raise ValueError("order must be positive")
    if dim**k > MAX_ENTRIES:
        raise ValueError(f"moment tensor of order {k} in dimension {dim} exceeds the dense limit")


def estimate_moment(model: ProcessModel, k: int, n_samples: int, seed: int, workers: int = 1) -> EstimatedMoment:
    """Sample mean of ``X^{⊗k}`` with entrywise standard errors.

    Parameters
    ----------
    model : ProcessModel
    k : int
        Tensor order.
    n_samples : int
        Number of draws, at least 2.
    seed : int
        Sample ``i`` is a deterministic function of ``(seed, i)``.
    workers : int
        Threads used for the per-block work.  The result is bitwise the same
        for every value.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples for a standard error")
    _check_size(model.dim, k)

    def work(item):
        b, count = item
        return _chunk_stats(sample_block(model, block_generator(seed, b), count), k)

    plan = blocks(int(n_samples))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(work, plan))
    else:
        stats = [work(item) for item in plan]
    return _finish(_tree_merge(stats), model.dim, k, int(seed))


def estimate_from_samples(samples, k: int) -> EstimatedMoment:
    """Moment estimate from an explicit ``(N, dim)`` sample array (or a 1-d array of scalars)."""
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need an (N, dim) array with N >= 2")
    _check_size(X.shape[1], k)
    stats = [_chunk_stats(X[i : i + BLOCK_SIZE], k) for i in range(0, X.shape[0], BLOCK_SIZE)]
    return _finish(_tree_merge(stats), X.shape[1], k, None)


@dataclass(frozen=True)
class MomentEqualResult:
    equal: bool
    max_z: float

    def __bool__(self) -> bool:
        return self.equal

    def to_json(self) -> dict:
        return {"equal": self.equal, "max_z": self.max_z}


def moment_equal_test(A: EstimatedMoment, B: EstimatedMoment, z: float = DEFAULT_Z) -> MomentEqualResult:
    """Entrywise test ``|A - B| <= z * sqrt(se_A^2 + se_B^2)``.

    Entries with zero combined standard error count as equal only when the
    estimates agree to rounding.
    """
    if A.tensor.entries.shape != B.tensor.entries.shape:
        raise ValueError(f"shape mismatch: {A.tensor.entries.shape} vs {B.tensor.entries.shape}")
    if not z > 0:
        raise ValueError("z must be positive")
    diff = np.abs(A.tensor.entries - B.tensor.entries)
    se = np.hypot(A.stderr.entries, B.stderr.entries)
    scale = max(1.0, float(np.max(np.abs(A.tensor.entries))), float(np.max(np.abs(B.tensor.entries))))
    zs = np.zeros_like(diff)
    pos = se > 0
    zs[pos] = diff[pos] / se[pos]
    zs[~pos & (diff > 1e-12 * scale)] = np.inf
    max_z = float(np.max(zs))
    return MomentEqualResult(equal=bool(max_z <= z), max_z=max_z)


def gaussian_abs_moment(k: int) -> float:
    """E|xi|^k for a standard normal xi."""
    return 2.0 ** (k / 2) * math.gamma((k + 1) / 2) / math.sqrt(math.pi)


def _mean_sq_norm(model: ProcessModel, n_samples: int, seed: int) -> tuple[float, float]:
    stats = []
    for b, count in blocks(n_samples):
        X = sample_block(model, block_generator(seed, b), count)
        q = np.sum(X * X, axis=1)
        m = float(np.mean(q))
        stats.append((count, m, float(np.sum((q - m) ** 2))))
    count, mean, m2 = _tree_merge(stats)
    return mean, math.sqrt(m2 / (count - 1) / count)


def injective_decay_experiment(n_list, k: int, n_samples: int, seed: int) -> list[dict]:
    """Norms of the exact moments of ``X_n = n^{-1/2} (xi_1, ..., xi_n)``.

    One row per ``n`` with the injective norm of ``E X_n^{⊗k}``, the bound
    ``C_k n^{-k/2}`` with ``C_k = E|xi|^k``, the projective norm when
    ``k = 2``, and a Monte Carlo estimate of ``E ||X_n||^2``.
    """
    rows = []
    C_k = gaussian_abs_moment(k)
    for n in n_list:
        n = int(n)
        if not 1 <= n <= 512:
            raise ValueError(f"n must lie in [1, 512], got {n}")
        row: dict = {"n": n, "bound": C_k * n ** (-k / 2)}
        if n**k <= 2**20:
            M = wick_moment(CovOp(np.eye(n) / n), k)
            space = NormedSpace(n, NormKind.L2)
            eps = injective_norm(M, space)
            row["eps_norm"] = eps.value
            row["eps_exactness"] = eps.exactness.value
            if k == 2:
                pi = projective_norm(M, space)
                row["pi_norm"] = pi.value
                row["pi_exactness"] = pi.exactness.value
        mean, se = _mean_sq_norm(ProcessModel.scaled_gaussian(n), n_samples, seed)
        row["mc_mean_sq_norm"] = mean
        row["mc_stderr"] = se
        rows.append(row)
    return rows


def c0lim_experiment(n: int, k: int) -> dict:
    """Projective norm in the sup geometry of ``E X^{⊗k}`` for X uniform on the basis of R^n."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if k * n > C0LIM_MAX_KN or not lp_feasible(k, n):
        raise ValueError(f"order {k} in dimension {n} is outside the exact LP range (k * n <= {C0LIM_MAX_KN})")
    diag = np.zeros((n,) * k)
    diag[(np.arange(n),) * k] = 1.0 / n
    T = MomentTensor(diag, symmetric=True)
    space = NormedSpace(n, NormKind.SUP)
    pi = projective_norm(T, space)
    eps = injective_norm(T, space)
    bound = n**-0.5
    return {
        "n": n,
        "k": k,
        "pi_norm": pi.value,
        "pi_exactness": pi.exactness.value,
        "eps_norm": eps.value,
        "bound": bound,
        "within_bound": bool(pi.value <= bound + 1e-12),
    }
