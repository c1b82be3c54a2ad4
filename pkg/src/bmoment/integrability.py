"""In which integral sense does E X^{⊗k} exist for X = a_N e_N?

With ``P(N = n) = p_n`` proportional to ``n^-alpha`` and ``a_n = n^beta``,
every existence condition in the rule table reduces to one of

* ``sum_n p_n^j a_n^m < inf``,
* ``sup_n p_n^j a_n^m < inf``,
* ``p_n^j a_n^m -> 0``,

for small integers ``j, m``.  :func:`classify` decides these symbolically
from the exponent ``m beta - j alpha``; :func:`numeric_verify` evaluates
the truncated sequence itself and is kept as an independent check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .families import PowerLawFamily
from .process_lab import ProcessModel, sample_block
from .rng import block_generator, blocks

__all__ = [
    "PowerLawFamily",
    "Space",
    "MomentKind",
    "Condition",
    "SenseVerdict",
    "NotInTableError",
    "Requirement",
    "rule",
    "classify",
    "numeric_verify",
    "verify_cell",
    "UIResult",
    "ui_check",
    "EXPONENT_TOL",
]

EXPONENT_TOL = 1e-9


class Space(str, enum.Enum):
    C0 = "c0"
    L1 = "l1"
    L2 = "l2"


class MomentKind(str, enum.Enum):
    INJECTIVE = "injective"
    PROJECTIVE = "projective"


class Condition(str, enum.Enum):
    SUM_FINITE = "sum_finite"
    SUP_FINITE = "sup_finite"
    TENDS_TO_ZERO = "tends_to_zero"


class NotInTableError(ValueError):
    """The (space, k, moment) combination has no rule."""


@dataclass(frozen=True)
class SenseVerdict:
    bochner: bool
    pettis: bool
    dunford: bool

    def __post_init__(self) -> None:
        if (self.bochner and not self.pettis) or (self.pettis and not self.dunford):
            raise ValueError(f"inconsistent verdict {self}: Bochner implies Pettis implies Dunford")

    def to_json(self) -> dict:
        return {"bochner": self.bochner, "pettis": self.pettis, "dunford": self.dunford}


@dataclass(frozen=True)
class Requirement:
    """``condition`` applied to the sequence ``p_n^p_power * a_n^a_power``."""

    condition: Condition
    p_power: int
    a_power: int

    def describe(self) -> str:
        p = "p_n" if self.p_power == 1 else f"p_n^{self.p_power}"
        seq = f"{p} a_n^{self.a_power}"
        return {
            Condition.SUM_FINITE: f"sum {seq} < inf",
            Condition.SUP_FINITE: f"sup {seq} < inf",
            Condition.TENDS_TO_ZERO: f"{seq} -> 0",
        }[self.condition]


def _c0_like(m: int) -> dict[str, Requirement]:
    return {
        "bochner": Requirement(Condition.SUM_FINITE, 1, m),
        "pettis": Requirement(Condition.TENDS_TO_ZERO, 1, m),
        "dunford": Requirement(Condition.SUP_FINITE, 1, m),
    }


def _all_same(req: Requirement) -> dict[str, Requirement]:
    return {"bochner": req, "pettis": req, "dunford": req}


def rule(space: Space, k: int, moment: MomentKind) -> dict[str, Requirement]:
    """The requirement for each of the three senses.

    Raises
    ------
    NotInTableError
        For combinations without a known characterisation.
    """
    space = Space(space)
    moment = MomentKind(moment)
    if k < 1:
        raise ValueError("order must be positive")
    if space is Space.C0:
        # the diagonal subspace is a copy of c0 in both tensor products
        return _c0_like(k)
    if space is Space.L1 and k == 1:
        # testing against sign(a_n) gives E|a_N| < inf, so all senses coincide
        return _all_same(Requirement(Condition.SUM_FINITE, 1, 1))
    if space is Space.L2 and k == 1:
        weak = Requirement(Condition.SUM_FINITE, 2, 2)
        return {"bochner": Requirement(Condition.SUM_FINITE, 1, 1), "pettis": weak, "dunford": weak}
    if space is Space.L2 and k == 2:
        if moment is MomentKind.PROJECTIVE:
            return _all_same(Requirement(Condition.SUM_FINITE, 1, 2))
        return _c0_like(2)
    raise NotInTableError(f"no rule for space={space.value}, k={k}, moment={moment.value}")


def _symbolic(family: PowerLawFamily, req: Requirement) -> bool:
    e = family.exponent(req.a_power, req.p_power)
    if req.condition is Condition.SUM_FINITE:
        return e < -1.0 - EXPONENT_TOL
    if req.condition is Condition.SUP_FINITE:
        return e <= EXPONENT_TOL
    return e < -EXPONENT_TOL


def classify(family: PowerLawFamily, space: Space, k: int, moment: MomentKind = MomentKind.INJECTIVE) -> SenseVerdict:
    """Symbolic verdict from the power-law exponents."""
    reqs = rule(space, k, moment)
    return SenseVerdict(**{sense: _symbolic(family, req) for sense, req in reqs.items()})


def numeric_verify(
    family: PowerLawFamily,
    condition: Condition,
    k: int,
    N_terms: int = 10**5,
    p_power: int = 1,
) -> dict:
    """Decide ``condition`` for ``p_n^p_power a_n^k`` from the first ``N_terms`` terms.

    The terms are evaluated in log space from the normalised probabilities.
    The decay rate is read off as the slope of ``log t_n`` against ``log n``
    between ``N_terms / 10`` and ``N_terms``; the partial sum and the
    integral tail bound for that rate are returned as evidence.

    Returns
    -------
    dict
        ``verdict`` plus ``slope``, ``partial_sum``, ``tail_bound``,
        ``last_term`` and ``max_term``.
    """
    condition = Condition(condition)
    if N_terms < 1000:
        raise ValueError("N_terms must be at least 1000")
    n = np.arange(1, N_terms + 1, dtype=float)
    log_t = p_power * np.log(family.p(n)) + k * np.log(family.a(n))
    lo = N_terms // 10
    slope = float((log_t[-1] - log_t[lo - 1]) / (math.log(N_terms) - math.log(lo)))
    terms = np.exp(log_t)
    partial = float(math.fsum(terms))
    last = float(terms[-1])
    if slope < -1.0:
        # sum_{n > N} t_N (n / N)^slope <= t_N * N / (-slope - 1)
        tail = last * N_terms / (-slope - 1.0)
    else:
        tail = math.inf
    if condition is Condition.SUM_FINITE:
        verdict = slope < -1.0 - EXPONENT_TOL and math.isfinite(tail)
    elif condition is Condition.SUP_FINITE:
        verdict = slope <= EXPONENT_TOL
    else:
        verdict = slope < -EXPONENT_TOL and last < float(terms[lo - 1])
    return {
        "verdict": bool(verdict),
        "slope": slope,
        "partial_sum": partial,
        "tail_bound": tail,
        "last_term": last,
        "max_term": float(np.max(terms)),
    }


def verify_cell(family: PowerLawFamily, space: Space, k: int, moment: MomentKind, N_terms: int = 10**4) -> SenseVerdict:
    """The verdict for one table cell computed through :func:`numeric_verify`."""
    reqs = rule(space, k, moment)
    out = {}
    for sense, req in reqs.items():
        out[sense] = numeric_verify(family, req.condition, req.a_power, N_terms, p_power=req.p_power)["verdict"]
    return SenseVerdict(**out)


@dataclass(frozen=True)
class UIResult:
    thresholds: tuple
    statistics: tuple
    scale: float
    tol: float
    verdict: bool

    def to_json(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "statistics": list(self.statistics),
            "scale": self.scale,
            "tol": self.tol,
            "verdict": self.verdict,
        }


def ui_check(model: ProcessModel, k: int, n_samples: int, thresholds, seed: int, tol: float = 0.01) -> UIResult:
    """Empirical uniform-integrability check for ``{|X(t)|^k}`` over the coordinates t.

    For each threshold ``M`` the statistic is
    ``max_t mean(|X(t)|^k 1{|X(t)|^k > M})``.  The verdict is true when the
    statistic at the largest threshold is at most ``tol`` times
    ``max_t mean |X(t)|^k``.
    """
    M = np.asarray(thresholds, dtype=float)
    if M.ndim != 1 or M.size == 0 or np.any(np.diff(M) <= 0):
        raise ValueError("thresholds must be a non-empty increasing sequence")
    if n_samples < 1 or k < 1:
        raise ValueError("n_samples and k must be positive")
    parts = []
    for b, count in blocks(int(n_samples)):
        Y = np.abs(sample_block(model, block_generator(seed, b), count)) ** k
        tails = np.stack([np.sum(np.where(Y > m, Y, 0.0), axis=0) for m in M])
        parts.append((np.sum(Y, axis=0), tails))
    # fixed-order pairwise sums, as for the moment estimates
    first = _pairwise_sum([p[0] for p in parts]) / n_samples
    tails = _pairwise_sum([p[1] for p in parts]) / n_samples
    stats = tuple(float(v) for v in np.max(tails, axis=1))
    scale = float(np.max(first))
    verdict = stats[-1] <= tol * scale if scale > 0 else True
    return UIResult(tuple(float(m) for m in M), stats, scale, float(tol), bool(verdict))


def _pairwise_sum(items: list) -> np.ndarray:
    while len(items) > 1:
        merged = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            merged.append(items[-1])
        items = merged
    return items[0]
