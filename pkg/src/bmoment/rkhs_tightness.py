"""Reproducing-kernel norms, Loewner comparisons and trace-class domination.

For a centred random vector with covariance ``Sigma`` the reproducing kernel
Hilbert space is ``range(Sigma^{1/2})`` with norm ``||Sigma^{+1/2} x||``.
For Brownian motion on a grid this is the discrete Cameron-Martin norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gaussian_calculus import CovOp, Grid

__all__ = [
    "RANK_TOL",
    "MEMBER_TOL",
    "RkhsFactor",
    "rkhs_factor",
    "hx_norm",
    "cameron_martin_norm",
    "same_rkhs",
    "loewner_le",
    "TightnessReport",
    "tightness_dominated",
    "trace_norm",
    "abs_operator",
    "Domination",
    "select_subsequence",
    "dominating_operator",
    "NonConvergentError",
]

RANK_TOL = 1e-10
MEMBER_TOL = 1e-6


def _as_cov(S) -> CovOp:
    return S if isinstance(S, CovOp) else CovOp(S)


def _check_dims(*covs: CovOp) -> None:
    dims = {c.dim for c in covs}
    if len(dims) > 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")


@dataclass(frozen=True, eq=False)
class RkhsFactor:
    """Spectral factors of a covariance.

    ``eigvals`` are clipped at zero and those at or below
    ``rank_tol * max(eigvals)`` are set to zero.
    """

    eigvecs: np.ndarray
    eigvals: np.ndarray
    rank: int
    rank_tol: float
    sqrt: np.ndarray = field(repr=False)
    pinv_sqrt: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.eigvals.size

    def reconstruct(self) -> np.ndarray:
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T

    @property
    def range_basis(self) -> np.ndarray:
        return self.eigvecs[:, self.eigvals > 0]


def rkhs_factor(sigma, rank_tol: float = RANK_TOL) -> RkhsFactor:
    """Eigendecomposition of ``sigma`` with a relative rank cutoff."""
    sigma = _as_cov(sigma)
    lam, U = np.linalg.eigh(sigma.matrix)
    lam = np.clip(lam, 0.0, None)
    top = float(lam.max()) if lam.size else 0.0
    lam = np.where(lam > rank_tol * top, lam, 0.0)
    keep = lam > 0
    root = np.sqrt(lam)
    inv_root = np.zeros_like(lam)
    inv_root[keep] = 1.0 / root[keep]
    return RkhsFactor(
        eigvecs=U,
        eigvals=lam,
        rank=int(np.count_nonzero(keep)),
        rank_tol=rank_tol,
        sqrt=(U * root) @ U.T,
        pinv_sqrt=(U * inv_root) @ U.T,
    )


def hx_norm(factor, x, member_tol: float = MEMBER_TOL) -> float:
    """Reproducing-kernel norm of ``x``, or ``inf`` when ``x`` is outside the range.

    ``x`` counts as in the range when its component orthogonal to the range
    is at most ``member_tol * ||x||``.
    """
    if not isinstance(factor, RkhsFactor):
        factor = rkhs_factor(factor)
    x = np.asarray(x, dtype=float)
    if x.shape != (factor.dim,):
        raise ValueError(f"expected a vector of length {factor.dim}, got shape {x.shape}")
    coords = factor.eigvecs.T @ x
    keep = factor.eigvals > 0
    residual = float(np.linalg.norm(coords[~keep]))
    if residual > member_tol * float(np.linalg.norm(x)):
        return float("inf")
    return float(np.linalg.norm(coords[keep] / np.sqrt(factor.eigvals[keep])))


def cameron_martin_norm(f, grid: Grid) -> float:
    """Discrete Cameron-Martin norm ``sqrt(sum (f_i - f_{i-1})^2 / (t_i - t_{i-1}))``.

    ``f`` holds the values on the grid and ``f(0) = 0`` is implied.  A grid
    point at ``t = 0`` must carry ``f = 0``.
    """
    f = np.asarray(f, dtype=float)
    t = grid.points
    if f.shape != t.shape:
        raise ValueError(f"expected {t.size} values, got shape {f.shape}")
    df = np.diff(f, prepend=0.0)
    dt = np.diff(t, prepend=0.0)
    if dt[0] == 0.0:
        if f[0] != 0.0:
            return float("inf")
        df, dt = df[1:], dt[1:]
    return float(np.sqrt(np.sum(df * df / dt)))


def same_rkhs(sigma1, sigma2, tol: float = 1e-8) -> bool:
    """Equal covariances (Frobenius distance at most ``tol``), hence equal kernel spaces."""
    a, b = _as_cov(sigma1), _as_cov(sigma2)
    _check_dims(a, b)
    return bool(np.linalg.norm(a.matrix - b.matrix) <= tol)


def _min_eig(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def loewner_le(A, B, tol: float = 1e-10) -> bool:
    """``A <= B``: the smallest eigenvalue of ``B - A`` is at least ``-tol``."""
    A, B = np.asarray(getattr(A, "matrix", A), float), np.asarray(getattr(B, "matrix", B), float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    if not (np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max()))
            and np.allclose(B, B.T, rtol=0, atol=1e-12 * max(1.0, np.abs(B).max()))):
        raise ValueError("loewner_le needs symmetric matrices")
    return _min_eig(B - A) >= -tol


@dataclass(frozen=True)
class TightnessReport:
    dominated: bool
    trace_budget: float
    failures: tuple
    min_eigs: tuple

    def __bool__(self) -> bool:
        return self.dominated

    def to_json(self) -> dict:
        return {
            "dominated": self.dominated,
            "trace_budget": self.trace_budget,
            "failures": list(self.failures),
            "min_eigs": list(self.min_eigs),
        }


def tightness_dominated(sigmas, T, tol: float = 1e-10) -> TightnessReport:
    """Check ``sigma <= T`` for every member; ``trace(T)`` is the tightness budget."""
    T = _as_cov(T)
    covs = [_as_cov(s) for s in sigmas]
    _check_dims(T, *covs)
    mins = tuple(_min_eig(T.matrix - s.matrix) for s in covs)
    failures = tuple(i for i, m in enumerate(mins) if m < -tol)
    return TightnessReport(not failures, float(np.trace(T.matrix)), failures, mins)


def trace_norm(M) -> float:
    """Sum of absolute eigenvalues of a symmetric matrix."""
    M = np.asarray(getattr(M, "matrix", M), float)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (M + M.T)))))


def abs_operator(M) -> np.ndarray:
    """``|M| = (M^T M)^{1/2}`` for a symmetric matrix."""
    M = np.asarray(getattr(M, "matrix", M), float)
    lam, U = np.linalg.eigh(0.5 * (M + M.T))
    return (U * np.abs(lam)) @ U.T


class NonConvergentError(ValueError):
    """The observed tail does not settle within the first schedule step."""


@dataclass(frozen=True, eq=False)
class Domination:
    T: CovOp
    V: CovOp
    selected: tuple
    scale: float
    distances: tuple

    @property
    def trace_budget(self) -> float:
        """trace(V) plus the trace norms of every added |Sigma_n - V|."""
        return float(np.trace(self.V.matrix) + sum(self.distances))


def select_subsequence(distances, scale: float) -> list[int]:
    """Greedy indices ``n_1 < n_2 < ...`` with ``distances[n_j] < 2^-j * scale``."""
    out = []
    for i, d in enumerate(distances):
        if d < 2.0 ** -(len(out) + 1) * scale or d == 0.0:
            out.append(i)
    return out


def dominating_operator(sigmas, V=None) -> Domination:
    """A trace-class ``T`` with ``Sigma_n <= T`` for every member of a convergent sequence.

    ``T = V + sum_n |Sigma_n - V|`` where ``V`` is the limit (by default the
    last member).  The selected subsequence follows the schedule
    ``||Sigma_{n_j} - V||_tr < 2^-j * c`` with
    ``c = max(||V||_tr, max_n ||Sigma_n||_tr)``.  Members outside the
    subsequence are added too, so every member is dominated, not only the
    selected ones.

    Raises
    ------
    NonConvergentError
        When some member in the last quarter of the sequence is at trace
        distance ``c / 2`` or more from ``V``.
    """
    covs = [_as_cov(s) for s in sigmas]
    if not covs:
        raise ValueError("need at least one covariance")
    V = covs[-1] if V is None else _as_cov(V)
    _check_dims(V, *covs)
    diffs = [s.matrix - V.matrix for s in covs]
    dist = [trace_norm(d) for d in diffs]
    scale = max([trace_norm(V)] + [trace_norm(s) for s in covs])
    tail = dist[len(dist) - max(1, len(dist) // 4):]
    if scale > 0 and max(tail) >= scale / 2:
        raise NonConvergentError(
            f"tail trace distance {max(tail):.3e} is not below half the scale {scale:.3e}"
        )
    T = V.matrix.copy()
    for d in diffs:
        T += abs_operator(d)
    T = 0.5 * (T + T.T)
    selected = tuple(select_subsequence(dist, scale)) if scale > 0 else tuple(range(len(covs)))
    return Domination(T=CovOp(T), V=V, selected=selected, scale=scale, distances=tuple(dist))
