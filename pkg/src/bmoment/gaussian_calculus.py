"""Closed-form moment tensors.

Gaussian moments come from the Wick (Isserlis) pairing formula.  The three
processes on [0, 1] (Brownian motion, the indicator process 1{U <= t} and
the scaled simple random walk) have explicit moment functions that are
evaluated on a finite grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import MomentTensor, pair_partitions

__all__ = [
    "PSD_TOL",
    "CovOp",
    "Grid",
    "wick_moment",
    "bm_covariance",
    "bm_fourth",
    "indicator_moment",
    "rw_second",
    "step_index",
]

PSD_TOL = 1e-10
SYM_TOL = 1e-12


class NotPSDError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CovOp:
    """Symmetric positive semidefinite n x n matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        M = np.array(self.matrix, dtype=float, copy=True)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
            raise ValueError(f"covariance must be a square matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("covariance entries must be finite")
        scale = max(1.0, float(np.max(np.abs(M))))
        if np.max(np.abs(M - M.T)) > SYM_TOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        M = 0.5 * (M + M.T)
        lam_min = float(np.linalg.eigvalsh(M)[0])
        if lam_min < -PSD_TOL:
            raise NotPSDError(f"covariance is not PSD (min eigenvalue {lam_min:.3e})")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_tensor(cls, T: MomentTensor) -> "CovOp":
        if T.order != 2:
            raise ValueError("a covariance is an order-2 tensor")
        return cls(T.entries)

    def as_tensor(self) -> MomentTensor:
        return MomentTensor(self.matrix, symmetric=True)


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing points in [0, 1]."""

    points: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.points, dtype=float, copy=True).ravel()
        if t.size == 0:
            raise ValueError("grid must contain at least one point")
        if np.any(np.diff(t) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if t[0] < 0.0 or t[-1] > 1.0:
            raise ValueError("grid points must lie in [0, 1]")
        t.setflags(write=False)
        object.__setattr__(self, "points", t)

    def __len__(self) -> int:
        return self.points.size

    @classmethod
    def uniform(cls, n: int) -> "Grid":
        """The points k/n, k = 1..n."""
        if n < 1:
            raise ValueError("need at least one grid point")
        return cls(np.arange(1, n + 1) / n)

    @classmethod
    def parse(cls, spec: str) -> "Grid":
        """Parse ``"uniform:n"`` or a comma separated list."""
        spec = spec.strip()
        if spec.startswith("uniform:"):
            return cls.uniform(int(spec.split(":", 1)[1]))
        return cls([float(p) for p in spec.split(",") if p.strip()])


def wick_moment(sigma: CovOp, k: int) -> MomentTensor:
    """k-th moment tensor of a centred Gaussian vector with covariance ``sigma``.

    Odd orders vanish.  For k = 2l each entry is the sum over the (2l-1)!!
    pairings of the product of covariance entries.
    """
    if not isinstance(sigma, CovOp):
        sigma = CovOp(sigma)
    if k < 1:
        raise ValueError("order must be positive")
    n = sigma.dim
    if k % 2:
        return MomentTensor(np.zeros((n,) * k), symmetric=True)
    S = sigma.matrix
    out = np.zeros((n,) * k)
    letters = "abcdefghijklmnopqrstuvwxyz"
    for pairing in pair_partitions(k):
        operands = []
        subs = []
        for i, j in pairing:
            operands.append(S)
            subs.append(letters[i] + letters[j])
        out += np.einsum(",".join(subs) + "->" + letters[:k], *operands)
    return MomentTensor(out, symmetric=True)


def _min_matrix(t: np.ndarray) -> np.ndarray:
    return np.minimum.outer(t, t)


def bm_covariance(grid: Grid) -> MomentTensor:
    """E W(s) W(t) = min(s, t) on the grid."""
    return MomentTensor(_min_matrix(grid.points), symmetric=True)


def bm_fourth(grid: Grid) -> MomentTensor:
    """E W(t1)W(t2)W(t3)W(t4) as the three-term sum of products of minima."""
    m = _min_matrix(grid.points)
    out = (
        np.einsum("ab,cd->abcd", m, m)
        + np.einsum("ac,bd->abcd", m, m)
        + np.einsum("ad,bc->abcd", m, m)
    )
    return MomentTensor(out, symmetric=True)


def indicator_moment(grid: Grid, k: int) -> MomentTensor:
    """k-th moment of X(t) = 1{U <= t}: the minimum of the selected grid points."""
    if k < 1:
        raise ValueError("order must be positive")
    t = grid.points
    out = t
    for _ in range(k - 1):
        out = np.minimum.outer(out, t)
    return MomentTensor(out, symmetric=True)


def rw_second(grid: Grid, n_steps: int) -> MomentTensor:
    """E X_n(s) X_n(t) = floor(n min(s, t)) / n for X_n(t) = S_floor(nt) / sqrt(n)."""
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    return MomentTensor(step_index(_min_matrix(grid.points), n_steps) / n_steps, symmetric=True)


def step_index(t, n_steps: int) -> np.ndarray:
    """floor(n t), guarded so that decimal grid points such as 0.3 with n = 10 land on 3."""
    return np.floor(n_steps * np.asarray(t, dtype=float) + 1e-9)
