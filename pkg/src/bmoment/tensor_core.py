"""Dense order-k tensors over R^n and the multilinear operations on them.

Tensors are stored as numpy arrays of shape ``(n,) * k`` in row-major
order.  A :class:`MomentTensor` is immutable once built; every operation
returns a new one.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "MAX_ENTRIES",
    "NormKind",
    "NormedSpace",
    "MomentTensor",
    "MultilinearForm",
    "outer_power",
    "outer",
    "symmetrize",
    "permute",
    "contract",
    "apply_form",
    "pair_partitions",
    "iter_pair_partitions",
    "double_factorial",
    "check_symmetric",
]

# Practical size cap for dense storage.
MAX_ENTRIES = 2**24


class NormKind(str, enum.Enum):
    SUP = "sup"
    L1 = "l1"
    L2 = "l2"

    def dual(self) -> "NormKind":
        return {NormKind.SUP: NormKind.L1, NormKind.L1: NormKind.SUP, NormKind.L2: NormKind.L2}[self]


@dataclass(frozen=True)
class NormedSpace:
    """R^dim with the sup, l1 or Euclidean norm.

    SUP stands in for C(K) or c0 on a finite index set, L2 for a Hilbert
    space and L1 for l1.
    """

    dim: int
    kind: NormKind

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "kind", NormKind(self.kind))

    def dual(self) -> "NormedSpace":
        return NormedSpace(self.dim, self.kind.dual())

    def norm(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        if self.kind is NormKind.SUP:
            return float(np.max(np.abs(x)))
        if self.kind is NormKind.L1:
            return float(np.sum(np.abs(x)))
        return float(np.linalg.norm(x))


def _as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


@dataclass(frozen=True, eq=False)
class MomentTensor:
    """Order-k real tensor over R^n.

    ``symmetric`` is metadata only.  Code that needs symmetry calls
    :func:`check_symmetric` instead of trusting the flag.
    """

    entries: np.ndarray
    symmetric: bool = False

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float, copy=True)
        if arr.ndim < 1:
            raise ValueError("tensor order must be at least 1")
        n = arr.shape[0]
        if n < 1 or any(d != n for d in arr.shape):
            raise ValueError(f"tensor must have shape (n,)*k, got {arr.shape}")
        if arr.size > MAX_ENTRIES:
            raise ValueError(f"tensor has {arr.size} entries, above the dense limit {MAX_ENTRIES}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "symmetric", bool(self.symmetric))

    @property
    def order(self) -> int:
        return self.entries.ndim

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"MomentTensor(order={self.order}, dim={self.dim}, symmetric={self.symmetric})"

    def __add__(self, other: "MomentTensor") -> "MomentTensor":
        _check_same_shape(self, other)
        return MomentTensor(self.entries + other.entries, self.symmetric and other.symmetric)

    def __sub__(self, other: "MomentTensor") -> "MomentTensor":
        _check_same_shape(self, other)
        return MomentTensor(self.entries - other.entries, self.symmetric and other.symmetric)

    def __mul__(self, c: float) -> "MomentTensor":
        return MomentTensor(float(c) * self.entries, self.symmetric)

    __rmul__ = __mul__

    def __neg__(self) -> "MomentTensor":
        return MomentTensor(-self.entries, self.symmetric)

    def allclose(self, other: "MomentTensor", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        return self.entries.shape == other.entries.shape and bool(
            np.allclose(self.entries, other.entries, rtol=rtol, atol=atol)
        )

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "dim": self.dim,
            "entries": self.entries.ravel(order="C").tolist(),
            "symmetric": self.symmetric,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MomentTensor":
        try:
            order, dim, flat = int(obj["order"]), int(obj["dim"]), obj["entries"]
        except KeyError as exc:
            raise ValueError(f"tensor JSON is missing key {exc.args[0]!r}") from None
        unknown = set(obj) - {"order", "dim", "entries", "symmetric"}
        if unknown:
            raise ValueError(f"unknown tensor JSON keys: {sorted(unknown)}")
        if order < 1 or dim < 1:
            raise ValueError("order and dim must be positive")
        arr = np.asarray(flat, dtype=float)
        if arr.shape != (dim**order,):
            raise ValueError(f"expected {dim**order} entries for order {order}, dim {dim}; got {arr.size}")
        return cls(arr.reshape((dim,) * order), bool(obj.get("symmetric", False)))


def _check_same_shape(a: MomentTensor, b: MomentTensor) -> None:
    if a.entries.shape != b.entries.shape:
        raise ValueError(f"shape mismatch: {a.entries.shape} vs {b.entries.shape}")


@dataclass(frozen=True, eq=False)
class MultilinearForm:
    """k-linear form on R^n given by its values on basis vectors."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        # reuse the tensor validation
        object.__setattr__(self, "coeffs", MomentTensor(self.coeffs).entries)

    @property
    def order(self) -> int:
        return self.coeffs.ndim

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, *xs) -> float:
        return apply_form(self, xs)

    def as_tensor(self) -> MomentTensor:
        return MomentTensor(self.coeffs)


def outer_power(x, k: int) -> MomentTensor:
    """``x ⊗ ... ⊗ x`` (k factors)."""
    if k < 1:
        raise ValueError("order must be positive")
    v = _as_vector(x)
    return MomentTensor(_outer_array([v] * k), symmetric=True)


def outer(*xs) -> MomentTensor:
    """Elementary tensor ``x1 ⊗ ... ⊗ xk``."""
    if not xs:
        raise ValueError("need at least one factor")
    vs = [_as_vector(x) for x in xs]
    n = vs[0].shape[0]
    for v in vs:
        if v.shape[0] != n:
            raise ValueError("all factors must share a dimension")
    return MomentTensor(_outer_array(vs))


def _outer_array(vs: Sequence[np.ndarray]) -> np.ndarray:
    out = vs[0]
    for v in vs[1:]:
        out = np.multiply.outer(out, v)
    return np.asarray(out, dtype=float)


def _permutations_of_axes(k: int) -> Iterator[tuple[int, ...]]:
    return itertools.permutations(range(k))


def symmetrize(T: MomentTensor) -> MomentTensor:
    """Average of T over all k! coordinate permutations."""
    k = T.order
    acc = np.zeros_like(T.entries)
    for perm in _permutations_of_axes(k):
        acc += np.transpose(T.entries, perm)
    return MomentTensor(acc / math.factorial(k), symmetric=True)


def permute(T: MomentTensor, sigma: Sequence[int]) -> MomentTensor:
    """Coordinate permutation: ``out[s_0..s_{k-1}] = T[s_sigma(0), ..., s_sigma(k-1)]``.

    ``sigma`` is a 0-based permutation of ``range(k)``.
    """
    sigma = tuple(int(i) for i in sigma)
    if len(sigma) != T.order:
        raise ValueError(f"permutation has length {len(sigma)}, tensor order is {T.order}")
    if sorted(sigma) != list(range(T.order)):
        raise ValueError(f"{sigma} is not a permutation of range({T.order})")
    return MomentTensor(np.transpose(T.entries, np.argsort(sigma)), T.symmetric)


def _contract_array(arr: np.ndarray, vs: Sequence[np.ndarray]) -> float:
    out = arr
    # contract the last axis first so each step is a plain matrix-vector product
    for v in reversed(vs):
        out = out @ v
    return float(out)


def contract(T: MomentTensor, duals: Sequence) -> float:
    """``sum_s T[s] * prod_i duals[i][s_i]``."""
    if len(duals) != T.order:
        raise ValueError(f"need {T.order} dual vectors, got {len(duals)}")
    vs = [_as_vector(d, T.dim) for d in duals]
    return _contract_array(T.entries, vs)


def apply_form(alpha: MultilinearForm, xs: Sequence) -> float:
    """Evaluate a multilinear form on ``xs``."""
    if len(xs) != alpha.order:
        raise ValueError(f"form has order {alpha.order}, got {len(xs)} arguments")
    vs = [_as_vector(x, alpha.dim) for x in xs]
    return _contract_array(alpha.coeffs, vs)


def iter_pair_partitions(items: Sequence[int]) -> Iterator[tuple[tuple[int, int], ...]]:
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for tail in iter_pair_partitions(rest[:i] + rest[i + 1 :]):
            yield ((first, other),) + tail


def pair_partitions(two_ell: int) -> list[tuple[tuple[int, int], ...]]:
    """All perfect matchings of ``range(two_ell)`` (0-based)."""
    if two_ell < 2 or two_ell % 2:
        raise ValueError(f"need an even order >= 2, got {two_ell}")
    return list(iter_pair_partitions(range(two_ell)))


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def check_symmetric(T: MomentTensor, n_samples: int = 32, tol: float = 1e-12, seed: int = 0) -> bool:
    """Sampled check that T is invariant under coordinate permutations.

    Checks the adjacent transpositions (which generate the symmetric group)
    plus ``n_samples`` random permutations.
    """
    k = T.order
    if k == 1:
        return True
    scale = max(1.0, float(np.max(np.abs(T.entries))))
    perms = [tuple(range(i)) + (i + 1, i) + tuple(range(i + 2, k)) for i in range(k - 1)]
    rng = np.random.default_rng(seed)
    perms += [tuple(rng.permutation(k)) for _ in range(n_samples)]
    return all(np.max(np.abs(np.transpose(T.entries, p) - T.entries)) <= tol * scale for p in perms)
