"""The power-law family X = a_N e_N with P(N = n) proportional to n^-alpha and a_n = n^beta."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

__all__ = ["PowerLawFamily"]


@dataclass(frozen=True)
class PowerLawFamily:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must exceed 1 for the weights to be summable, got {self.alpha}")
        if not self.beta >= 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    @property
    def normalizer(self) -> float:
        """sum_{n>=1} n^-alpha."""
        return float(zeta(self.alpha, 1))

    def p(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return n ** (-self.alpha) / self.normalizer

    def a(self, n) -> np.ndarray:
        return np.asarray(n, dtype=float) ** self.beta

    def exponent(self, k: int, p_power: int = 1) -> float:
        """e such that p_n^p_power * a_n^k is proportional to n^e."""
        return k * self.beta - p_power * self.alpha

    def truncated_probabilities(self, N: int) -> np.ndarray:
        """P(N = n) for n = 1..N with the tail mass P(N > N) added to the last index."""
        if N < 1:
            raise ValueError("truncation must be positive")
        p = self.p(np.arange(1, N + 1))
        p[-1] += max(0.0, 1.0 - float(np.sum(p)))
        return p

    def tail_mass(self, N: int) -> float:
        return float(zeta(self.alpha, N + 1)) / self.normalizer
