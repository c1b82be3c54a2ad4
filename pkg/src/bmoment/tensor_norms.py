"""Projective and injective tensor norms on (R^n, sup | l1 | l2).

Exact values are returned where a finite computation exists:

* sup geometry: the injective norm is the largest absolute entry, and the
  projective norm is a linear program over elementary tensors of sign
  vectors (the extreme points of the sup unit ball);
* l1 geometry: the projective norm is the entrywise l1 norm, and the
  injective norm is a maximum over sign vectors;
* l2 geometry with k = 2: nuclear norm and spectral norm.

Everything else is bracketed by certified bounds, see :class:`NormResult`.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .simplex import InfeasibleLP, min_l1_decomposition
from .tensor_core import MomentTensor, MultilinearForm, NormedSpace, NormKind

__all__ = [
    "Exactness",
    "Method",
    "NormResult",
    "GrothendieckResult",
    "GROTHENDIECK_UPPER",
    "LP_MAX_COLUMNS",
    "LP_MAX_ROWS",
    "injective_norm",
    "projective_norm",
    "tensor_norms",
    "grothendieck_check",
    "norm_oracle",
    "lp_feasible",
]

# pi / (2 log(1 + sqrt 2)), Krivine's bound
GROTHENDIECK_UPPER = math.pi / (2.0 * math.log(1.0 + math.sqrt(2.0)))

LP_MAX_COLUMNS = 4**8
LP_MAX_ROWS = 256
SIGN_ENUM_MAX_WORK = 2**24
# relative primal-dual gap below which the LP optimum counts as exact
LP_GAP_TOL = 1e-10

N_STARTS = 32
ALT_TOL = 1e-10
ALT_MAX_SWEEPS = 500


class Exactness(str, enum.Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower_bound"
    UPPER_BOUND = "upper_bound"


class Method(str, enum.Enum):
    SVD = "svd"
    EXTREME_POINT_LP = "extreme_point_lp"
    SIGN_ENUM = "sign_enum"
    ALTERNATING_MAX = "alternating_max"
    GREEDY_DEFLATION = "greedy_deflation"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class NormResult:
    """A norm value together with how it was obtained.

    ``lower`` and ``upper`` always bracket the true norm.  For EXACT results
    both equal ``value``; for LOWER_BOUND results ``value == lower`` and
    ``upper`` may be ``inf``; for UPPER_BOUND results ``value == upper``.
    """

    value: float
    exactness: Exactness
    method: Method
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self) -> None:
        v = float(self.value)
        object.__setattr__(self, "value", v)
        if self.lower is None:
            object.__setattr__(self, "lower", v if self.exactness != Exactness.UPPER_BOUND else 0.0)
        if self.upper is None:
            object.__setattr__(self, "upper", v if self.exactness != Exactness.LOWER_BOUND else math.inf)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "exactness": self.exactness.value,
            "method": self.method.value,
            "lower": self.lower,
            "upper": self.upper,
        }


@dataclass(frozen=True)
class GrothendieckResult:
    sup_norm: float
    hilbert_value: float
    ratio: float

    def to_json(self) -> dict:
        return {"sup_norm": self.sup_norm, "hilbert_value": self.hilbert_value, "ratio": self.ratio}


def _check_space(T: MomentTensor, space: NormedSpace) -> None:
    if T.dim != space.dim:
        raise ValueError(f"dimension mismatch: tensor dim {T.dim}, space dim {space.dim}")


def _exact(value: float, method: Method) -> NormResult:
    return NormResult(value, Exactness.EXACT, method)


# ---------------------------------------------------------------------------
# sign vectors and partial contractions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _sign_vectors(n: int) -> np.ndarray:
    """All vectors in {-1, 1}^n with first entry +1, shape (2**(n-1), n)."""
    rows = [(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=n - 1)]
    arr = np.array(rows, dtype=float)
    arr.setflags(write=False)
    return arr


def _kron_rows(mats: list[np.ndarray]) -> np.ndarray:
    """Row-wise Kronecker product: every combination of one row from each matrix."""
    out = mats[0]
    for M in mats[1:]:
        out = np.einsum("ia,jb->ijab", out, M).reshape(out.shape[0] * M.shape[0], -1)
    return out


def _partial(arr: np.ndarray, xs: list[np.ndarray], skip: int) -> np.ndarray:
    """Contract ``arr`` with every ``xs[i]`` except ``i == skip``."""
    out = arr
    for i in reversed(range(len(xs))):
        if i == skip:
            continue
        out = np.tensordot(out, xs[i], axes=([i], [0]))
    return out


def _best_response(g: np.ndarray, kind: NormKind) -> tuple[np.ndarray, float]:
    """Maximise <g, x> over the unit ball of the dual of ``kind``.

    Returns the maximiser and the value ``||g||_kind``.
    """
    if kind is NormKind.L2:
        nrm = float(np.linalg.norm(g))
        if nrm == 0.0:
            return np.zeros_like(g), 0.0
        return g / nrm, nrm
    if kind is NormKind.SUP:
        i = int(np.argmax(np.abs(g)))
        x = np.zeros_like(g)
        x[i] = 1.0 if g[i] >= 0 else -1.0
        return x, float(abs(g[i]))
    x = np.where(g >= 0, 1.0, -1.0)
    return x, float(np.sum(np.abs(g)))


def _l1_injective_sign_enum(arr: np.ndarray) -> float | None:
    """max over sign vectors s_1..s_k of |arr(s_1, ..., s_k)|, or None if too large.

    The last factor is eliminated in closed form as an l1 norm.
    """
    k, n = arr.ndim, arr.shape[0]
    if k == 1:
        return float(np.sum(np.abs(arr)))
    n_rows = 2 ** ((k - 1) * (n - 1))
    if n_rows * n ** (k - 1) > SIGN_ENUM_MAX_WORK:
        return None
    S = _kron_rows([_sign_vectors(n)] * (k - 1))
    G = S @ arr.reshape(n ** (k - 1), n)
    return float(np.max(np.sum(np.abs(G), axis=1)))


def _alternating_max(arr: np.ndarray, kind: NormKind, n_starts: int = N_STARTS, seed: int = 0) -> float:
    """Multistart block-coordinate ascent of |<arr, x1 ⊗ ... ⊗ xk>| over dual unit balls of ``kind``."""
    k, n = arr.ndim, arr.shape[0]
    dual = kind.dual()
    rng = np.random.default_rng(seed)
    best = 0.0
    starts = []
    # deterministic start: leading left singular vectors of each unfolding
    det = []
    for i in range(k):
        unf = np.moveaxis(arr, i, 0).reshape(n, -1)
        u = np.linalg.svd(unf, full_matrices=False)[0][:, 0]
        det.append(u)
    starts.append(det)
    for _ in range(n_starts - 1):
        starts.append([rng.standard_normal(n) for _ in range(k)])
    for xs in starts:
        xs = [_project_to_dual_ball(x, dual) for x in xs]
        val = 0.0
        for _ in range(ALT_MAX_SWEEPS):
            prev = val
            for i in range(k):
                g = _partial(arr, xs, i)
                xs[i], val = _best_response(g, kind)
            if val - prev <= ALT_TOL * max(1.0, val):
                break
        best = max(best, val)
    return best


def _project_to_dual_ball(x: np.ndarray, dual: NormKind) -> np.ndarray:
    if dual is NormKind.L2:
        nrm = np.linalg.norm(x)
        return x / nrm if nrm > 0 else x
    if dual is NormKind.SUP:
        return np.where(x >= 0, 1.0, -1.0)
    i = int(np.argmax(np.abs(x)))
    e = np.zeros_like(x)
    e[i] = 1.0
    return e


def _spectral_unfolding_bound(arr: np.ndarray) -> float:
    """min over one-mode unfoldings of the largest singular value (an upper bound on the l2 injective norm)."""
    n = arr.shape[0]
    return min(
        float(np.linalg.norm(np.moveaxis(arr, i, 0).reshape(n, -1), 2)) for i in range(arr.ndim)
    )


# ---------------------------------------------------------------------------
# injective norm
# ---------------------------------------------------------------------------


def injective_norm(T: MomentTensor, space: NormedSpace) -> NormResult:
    """sup of |<T, x*_1 ⊗ ... ⊗ x*_k>| over the dual unit ball of ``space``."""
    _check_space(T, space)
    arr = T.entries
    kind = space.kind
    if not np.any(arr):
        return _exact(0.0, Method.CLOSED_FORM)
    if T.order == 1:
        return _exact(space.norm(arr), Method.CLOSED_FORM)
    if kind is NormKind.SUP:
        # extreme points of the l1 dual ball are the signed basis vectors
        return _exact(float(np.max(np.abs(arr))), Method.CLOSED_FORM)
    if kind is NormKind.L2:
        if T.order == 2:
            return _exact(float(np.linalg.norm(arr, 2)), Method.SVD)
        lower = _alternating_max(arr, kind)
        return NormResult(lower, Exactness.LOWER_BOUND, Method.ALTERNATING_MAX, lower, _spectral_unfolding_bound(arr))
    value = _l1_injective_sign_enum(arr)
    if value is not None:
        return _exact(value, Method.SIGN_ENUM)
    lower = _alternating_max(arr, kind)
    return NormResult(lower, Exactness.LOWER_BOUND, Method.ALTERNATING_MAX, lower, float(np.sum(np.abs(arr))))


# ---------------------------------------------------------------------------
# projective norm
# ---------------------------------------------------------------------------


def lp_feasible(order: int, dim: int) -> bool:
    """Whether the extreme-point LP is within the documented size limits."""
    return 2 ** (order * (dim - 1)) <= LP_MAX_COLUMNS and dim**order <= LP_MAX_ROWS


@lru_cache(maxsize=16)
def _sign_columns(order: int, dim: int) -> np.ndarray:
    cols = _kron_rows([_sign_vectors(dim)] * order).T
    cols = np.ascontiguousarray(cols)
    cols.setflags(write=False)
    return cols


def _crash_columns(order: int, dim: int) -> np.ndarray:
    """Indices of the sign columns ``v_{i1} ⊗ ... ⊗ v_{ik}`` built from a basis of R^dim.

    The factor basis is the all-ones vector and the all-ones vectors with
    entry ``i >= 1`` flipped; in :func:`_sign_vectors` order these sit at
    indices 0 and ``2**(dim-1-i)``.
    """
    factor = np.array([0] + [2 ** (dim - 1 - i) for i in range(1, dim)])
    radix = 2 ** (dim - 1)
    idx = np.zeros(1, dtype=np.int64)
    for _ in range(order):
        idx = (idx[:, None] * radix + factor[None, :]).ravel()
    return idx


def _sup_projective_lp(arr: np.ndarray) -> tuple[float, float]:
    """(primal optimum, certified dual lower bound) of the extreme-point LP."""
    k, n = arr.ndim, arr.shape[0]
    cols = _sign_columns(k, n)
    # the simplex tolerances are absolute, so solve at unit scale
    scale = float(np.max(np.abs(arr)))
    target = arr.ravel() / scale
    S = _sign_vectors(n)

    def pricer(v: np.ndarray) -> np.ndarray:
        # <v, s_1 ⊗ ... ⊗ s_k> for all sign columns, one mode at a time
        out = v.reshape((n,) * k)
        for _ in range(k):
            out = np.tensordot(out, S, axes=([0], [1]))
        return out.ravel()

    try:
        res = min_l1_decomposition(cols, target, start=_crash_columns(k, n), pricer=pricer)
    except InfeasibleLP as exc:  # sign tensors span the whole tensor space
        raise RuntimeError("extreme-point LP reported infeasible; this is a bug") from exc
    # any y gives the lower bound y.T / max|<y, s>| over sign tensors s
    worst = float(np.max(np.abs(pricer(res.duals))))
    lower = float(res.duals @ target) / worst if worst > 0 else 0.0
    return res.objective * scale, max(lower, 0.0) * scale


def _greedy_upper(arr: np.ndarray, space: NormedSpace, max_terms: int | None = None) -> float:
    """Upper bound from greedy rank-one deflation.

    Each extracted term ``lam * x1 ⊗ ... ⊗ xk`` costs ``|lam| * prod ||x_i||``;
    the leftover residual is charged its entrywise l1 norm (basis vectors have
    norm 1 in every geometry here).
    """
    k, n = arr.ndim, arr.shape[0]
    if max_terms is None:
        max_terms = 2 * n ** (k - 1)
    R = arr.copy()
    spent = 0.0
    best = float(np.sum(np.abs(R)))
    floor = 1e-13 * best
    for _ in range(max_terms):
        xs = []
        for i in range(k):
            unf = np.moveaxis(R, i, 0).reshape(n, -1)
            xs.append(np.linalg.svd(unf, full_matrices=False)[0][:, 0])
        lam = 0.0
        for _ in range(100):
            for i in range(k):
                g = _partial(R, xs, i)
                nrm = np.linalg.norm(g)
                if nrm == 0.0:
                    break
                xs[i] = g / nrm
            new = float(np.tensordot(R, _outer(xs), axes=k))
            if abs(new - lam) <= 1e-12 * max(1.0, abs(new)):
                lam = new
                break
            lam = new
        if lam == 0.0:
            break
        R = R - lam * _outer(xs)
        spent += abs(lam) * math.prod(space.norm(x) for x in xs)
        resid = float(np.sum(np.abs(R)))
        best = min(best, spent + resid)
        if resid <= floor:
            break
    return best


def _outer(xs: list[np.ndarray]) -> np.ndarray:
    out = xs[0]
    for x in xs[1:]:
        out = np.multiply.outer(out, x)
    return out


def _form_norm_upper(alpha: np.ndarray, space: NormedSpace) -> float:
    """Upper bound on sup |alpha(x_1..x_k)| over the unit ball of ``space``."""
    if space.kind is NormKind.SUP:
        exact = _l1_injective_sign_enum(alpha)
        return exact if exact is not None else float(np.sum(np.abs(alpha)))
    if space.kind is NormKind.L2:
        return _spectral_unfolding_bound(alpha)
    return float(np.max(np.abs(alpha)))


def _dual_lower(arr: np.ndarray, space: NormedSpace) -> float:
    best = 0.0
    candidates = [arr]
    if space.kind is NormKind.SUP:
        candidates.append(np.sign(arr))
    for alpha in candidates:
        denom = _form_norm_upper(alpha, space)
        if denom > 0:
            best = max(best, abs(float(np.sum(alpha * arr))) / denom)
    return best


def projective_norm(T: MomentTensor, space: NormedSpace) -> NormResult:
    """inf of sum_j prod_i ||x_{j,i}|| over decompositions T = sum_j x_{j,1} ⊗ ... ⊗ x_{j,k}."""
    _check_space(T, space)
    arr = T.entries
    kind = space.kind
    if not np.any(arr):
        return _exact(0.0, Method.CLOSED_FORM)
    if T.order == 1:
        return _exact(space.norm(arr), Method.CLOSED_FORM)
    if kind is NormKind.L1:
        # the extreme points of the l1 ball are ±e_i, so the extreme-point
        # LP has the identity as constraint matrix and is solved by |entries|
        return _exact(float(np.sum(np.abs(arr))), Method.EXTREME_POINT_LP)
    if kind is NormKind.L2 and T.order == 2:
        return _exact(float(np.sum(np.linalg.svd(arr, compute_uv=False))), Method.SVD)
    if kind is NormKind.SUP and lp_feasible(T.order, T.dim):
        upper, lower = _sup_projective_lp(arr)
        if upper - lower <= LP_GAP_TOL * max(upper, float(np.max(np.abs(arr)))):
            return _exact(upper, Method.EXTREME_POINT_LP)
        return NormResult(upper, Exactness.UPPER_BOUND, Method.EXTREME_POINT_LP, lower, upper)
    upper = _greedy_upper(arr, space)
    lower = max(_dual_lower(arr, space), injective_norm(T, space).lower)
    return NormResult(upper, Exactness.UPPER_BOUND, Method.GREEDY_DEFLATION, min(lower, upper), upper)


def tensor_norms(T: MomentTensor, space: NormedSpace) -> dict[str, NormResult]:
    return {"pi": projective_norm(T, space), "eps": injective_norm(T, space)}


# ---------------------------------------------------------------------------
# Grothendieck harness
# ---------------------------------------------------------------------------


def grothendieck_check(alpha: MultilinearForm, dims: int | None = None, n_starts: int = N_STARTS, seed: int = 0) -> GrothendieckResult:
    """Compare a bilinear form's sup-norm value with its Hilbert-space extension.

    ``sup_norm`` is max |sum a_ij s_i t_j| over sign vectors (exact).
    ``hilbert_value`` is the best sum a_ij <x_i, y_j> found over unit vectors
    in R^dims (default 2n) by multistart alternating maximisation; the sign
    optimum is always one of the starts, so the ratio is never below 1.
    """
    A = np.asarray(alpha.coeffs, dtype=float)
    if A.ndim != 2:
        raise ValueError("grothendieck_check needs a bilinear form")
    n = A.shape[0]
    if n > 12:
        raise ValueError(f"dim {n} too large for exact sign enumeration (max 12)")
    d = 2 * n if dims is None else int(dims)
    if d < 1:
        raise ValueError("embedding dimension must be positive")

    S = _sign_vectors(n)
    vals = S @ A
    row_sums = np.sum(np.abs(vals), axis=1)
    best_row = int(np.argmax(row_sums))
    sup_norm = float(row_sums[best_row])
    if sup_norm == 0.0:
        return GrothendieckResult(0.0, 0.0, 0.0)

    rng = np.random.default_rng(seed)
    t = np.where(vals[best_row] >= 0, 1.0, -1.0)
    e1 = np.zeros(d)
    e1[0] = 1.0
    starts = [np.outer(t, e1)]
    starts += [rng.standard_normal((n, d)) for _ in range(n_starts - 1)]

    def _rows_unit(M: np.ndarray) -> np.ndarray:
        nrm = np.linalg.norm(M, axis=1, keepdims=True)
        out = np.divide(M, nrm, out=np.zeros_like(M), where=nrm > 0)
        # zero rows contribute nothing; give them any unit direction
        out[nrm[:, 0] == 0, 0] = 1.0
        return out

    best = sup_norm  # attained by the embedded sign optimum
    for Y in starts:
        Y = _rows_unit(Y)
        val = -math.inf
        for _ in range(10 * ALT_MAX_SWEEPS):
            X = _rows_unit(A @ Y)
            Y = _rows_unit(A.T @ X)
            new = float(np.sum(A * (X @ Y.T)))
            if new - val <= ALT_TOL * max(1.0, abs(new)):
                val = new
                break
            val = new
        best = max(best, val)
    return GrothendieckResult(sup_norm, best, best / sup_norm)


# ---------------------------------------------------------------------------
# brute-force oracle (independent of the code paths above)
# ---------------------------------------------------------------------------


ORACLE_MAX_DIM = 4
ORACLE_MAX_ORDER = 3
ORACLE_L2_PI_MAX_DIM = 2


def _vec_norm(V: np.ndarray, kind: NormKind) -> np.ndarray:
    """Row-wise norms of V."""
    if kind is NormKind.SUP:
        return np.max(np.abs(V), axis=-1)
    if kind is NormKind.L1:
        return np.sum(np.abs(V), axis=-1)
    return np.sqrt(np.sum(V * V, axis=-1))


@lru_cache(maxsize=64)
def _sphere_lattice(n: int, kind: NormKind, per_axis: int) -> np.ndarray:
    """Grid points of [-1,1]^n pushed radially onto the unit sphere of ``kind``."""
    axis = np.linspace(-1.0, 1.0, per_axis)
    grid = np.array(list(itertools.product(axis, repeat=n)))
    grid = grid[np.any(grid != 0.0, axis=1)]
    pts = np.unique(np.round(grid / _vec_norm(grid, kind)[:, None], 14), axis=0)
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=64)
def _lattice_for_budget(n: int, kind: NormKind, budget: int) -> tuple[np.ndarray, int]:
    per_axis = 3
    while (per_axis + 2) ** n <= budget and per_axis < 401:
        per_axis += 2
    return _sphere_lattice(n, kind, per_axis), per_axis


def _oracle_eps_batch(arr: np.ndarray, kind: NormKind, factors: list[np.ndarray]) -> np.ndarray:
    """Values for a batch: factors[f] has shape (B, n); the last axis is taken as a norm."""
    v = np.tensordot(factors[0], arr, axes=([1], [0]))
    for X in factors[1:]:
        v = np.einsum("bi,bi...->b...", X, v)
    return _vec_norm(v, kind)


def _oracle_eps(arr: np.ndarray, kind: NormKind, budget: int | None = None, n_top: int = 4):
    """Lattice search plus pattern-search refinement.

    Returns ``(value, candidates)`` where ``candidates`` lists the refined
    first k-1 factors of the ``n_top`` best lattice cells, best first.
    """
    k, n = arr.ndim, arr.shape[0]
    if k == 1:
        return float(_vec_norm(arr[None, :], kind)[0]), [[]]
    dual = kind.dual()
    if budget is None:
        budget = 60000 if k == 2 else 1500
    P, per_axis = _lattice_for_budget(n, dual, budget)
    if k == 2:
        vals = _vec_norm(P @ arr, kind)
        top = [[P[i]] for i in np.argsort(vals)[::-1][:n_top]]
    else:
        vals = np.empty((len(P), len(P)))
        for a, p in enumerate(P):
            M = np.tensordot(p, arr, axes=([0], [0]))
            vals[a] = _vec_norm(P @ M, kind)
        flat = np.argsort(vals, axis=None)[::-1][:n_top]
        top = [[P[i], P[j]] for i, j in zip(*np.unravel_index(flat, vals.shape))]

    nf = k - 1
    refined = []
    for xs in top:
        cur_x = np.array(xs)  # (nf, n)
        cur = float(_oracle_eps_batch(arr, kind, [x[None, :] for x in cur_x])[0])
        step = 2.0 / (per_axis - 1)
        while step > 1e-13:
            # all single-coordinate moves of all factors, renormalised
            moves = np.repeat(cur_x[None], 2 * nf * n, axis=0)
            idx = 0
            for f in range(nf):
                for c in range(n):
                    moves[idx, f, c] += step
                    moves[idx + 1, f, c] -= step
                    idx += 2
            nrm = _vec_norm(moves, dual)
            ok = np.all(nrm > 0, axis=1)
            moves, nrm = moves[ok], nrm[ok]
            moves = moves / nrm[:, :, None]
            tv = _oracle_eps_batch(arr, kind, [moves[:, f] for f in range(nf)])
            j = int(np.argmax(tv))
            if tv[j] > cur:
                cur, cur_x = float(tv[j]), moves[j]
            else:
                step /= 2.0
        refined.append((cur, list(cur_x)))
    refined.sort(key=lambda r: -r[0])
    return refined[0][0], [xs for _, xs in refined]


def _oracle_pi(arr: np.ndarray, kind: NormKind) -> float:
    from scipy.optimize import linprog

    k, n = arr.ndim, arr.shape[0]
    if kind is NormKind.SUP:
        base = [np.array(s) for s in itertools.product((1.0, -1.0), repeat=n)]
    elif kind is NormKind.L1:
        base = list(np.eye(n)) + list(-np.eye(n))
    else:
        base = list(_sphere_lattice(n, NormKind.L2, 5 if k == 2 else 3))
    rows = []
    for combo in itertools.product(range(len(base)), repeat=k):
        t = base[combo[0]]
        for c in combo[1:]:
            t = np.multiply.outer(t, base[c])
        rows.append(np.asarray(t).ravel())
    rows = np.unique(np.round(np.array(rows), 14), axis=0)
    target = arr.ravel()

    lower = 0.0
    for _ in range(400):
        G = np.vstack([rows, -rows])
        res = linprog(-target, A_ub=G, b_ub=np.ones(len(G)), bounds=[(None, None)] * target.size, method="highs")
        if res.status != 0:
            raise RuntimeError(f"oracle LP failed: {res.message}")
        alpha = res.x
        upper = -res.fun
        if kind is not NormKind.L2:
            return upper
        # alpha / viol is feasible, which certifies a lower bound
        A = alpha.reshape(arr.shape)
        viol, cands = _oracle_eps(A, NormKind.L2, budget=4000 if k == 2 else 150, n_top=6)
        lower = max(lower, float(target @ alpha) / max(viol, 1.0))
        if upper - lower <= 1e-6 * upper:
            return 0.5 * (upper + lower)
        cuts = []
        for xs in cands:
            v = A
            for x in xs:
                v = np.tensordot(x, v, axes=([0], [0]))
            cuts.append(_outer(list(xs) + [v / np.linalg.norm(v)]).ravel())
        rows = np.vstack([rows] + cuts)
    return lower


def _givens_product(angles: np.ndarray, n: int) -> np.ndarray:
    """Batch of rotations prod_{i<j} G_ij(angle), angles shape (m, n(n-1)/2)."""
    m = angles.shape[0]
    Q = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    for a, (i, j) in enumerate(itertools.combinations(range(n), 2)):
        c, s = np.cos(angles[:, a]), np.sin(angles[:, a])
        Qi, Qj = Q[:, :, i].copy(), Q[:, :, j].copy()
        Q[:, :, i] = c[:, None] * Qi - s[:, None] * Qj
        Q[:, :, j] = s[:, None] * Qi + c[:, None] * Qj
    return Q


def _oracle_pi_l2_matrix(arr: np.ndarray) -> float:
    """max of <Q, arr> over orthogonal Q, by an angle lattice plus pattern search.

    Orthogonal matrices are the extreme points of the unit ball of bilinear
    forms on l2^n, so this is the dual problem for the projective norm.
    """
    n = arr.shape[0]
    n_ang = n * (n - 1) // 2
    if n_ang == 0:
        return float(abs(arr[0, 0]))
    per_axis = {1: 720, 2: 160, 3: 40, 6: 7}.get(n_ang, 7)
    axis = np.linspace(-np.pi, np.pi, per_axis, endpoint=False)
    grid = np.array(list(itertools.product(axis, repeat=n_ang)))
    best = -math.inf
    for flip in (1.0, -1.0):
        D = np.ones(n)
        D[0] = flip
        target = arr * D[None, :]  # <Q diag(D), arr> = <Q, arr diag(D)>
        vals = np.einsum("mij,ij->m", _givens_product(grid, n), target)
        for idx in np.argsort(vals)[::-1][:4]:
            x = grid[idx].copy()
            cur = float(vals[idx])
            step = 2 * np.pi / per_axis
            while step > 1e-13:
                trials = np.repeat(x[None, :], 2 * n_ang, axis=0)
                trials[np.arange(n_ang), np.arange(n_ang)] += step
                trials[n_ang + np.arange(n_ang), np.arange(n_ang)] -= step
                tv = np.einsum("mij,ij->m", _givens_product(trials, n), target)
                j = int(np.argmax(tv))
                if tv[j] > cur:
                    cur, x = float(tv[j]), trials[j]
                else:
                    step /= 2.0
            best = max(best, cur)
    return best


def norm_oracle(T: MomentTensor, space: NormedSpace, which: str) -> float:
    """Brute-force reference value of the injective (``"eps"``) or projective (``"pi"``) norm.

    Restricted to dim <= 4 and order <= 3, and to dim <= 2 for the l2
    projective norm of order-3 tensors (the cutting-plane loop is too slow
    beyond that).  The injective value comes from a
    lattice on the dual unit sphere refined by pattern search; the projective
    value from the dual LP over forms bounded on the unit ball, with
    constraints at sign vectors (sup), signed basis vectors (l1), or a
    sphere lattice plus cutting planes (l2).  For l2 matrices the dual is
    searched directly over orthogonal matrices.
    """
    _check_space(T, space)
    if T.dim > ORACLE_MAX_DIM or T.order > ORACLE_MAX_ORDER:
        raise ValueError(f"oracle limited to dim <= {ORACLE_MAX_DIM}, order <= {ORACLE_MAX_ORDER}")
    which = which.lower()
    arr = T.entries
    if which == "eps":
        return _oracle_eps(arr, space.kind)[0]
    if which == "pi":
        if T.order == 1:
            return float(_vec_norm(arr[None, :], space.kind)[0])
        if space.kind is NormKind.L2 and T.order == 2:
            return _oracle_pi_l2_matrix(arr)
        if space.kind is NormKind.L2 and T.dim > ORACLE_L2_PI_MAX_DIM:
            raise ValueError(f"l2 projective oracle for order >= 3 is limited to dim <= {ORACLE_L2_PI_MAX_DIM}")
        return _oracle_pi(arr, space.kind)
    raise ValueError(f"which must be 'pi' or 'eps', got {which!r}")
