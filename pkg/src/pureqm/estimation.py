"""What the statistician does with registered counts.

Counts only identify moduli ``|c_j|``; relative phases are invisible to this
module and need a different coupling (see :func:`pureqm.measurement.test_protocol`).
The plug-in estimator is used as is, with no shrinkage at ``m0 in {0, N}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Iterable

import numpy as np
from scipy.stats import beta


@dataclass(frozen=True)
class CountRecord:
    m0: int
    m1: int

    def __post_init__(self):
        if self.m0 < 0 or self.m1 < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def N(self) -> int:
        return self.m0 + self.m1

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "CountRecord":
        b = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if b.size and not np.isin(b, (0, 1)).all():
            raise ValueError("outcome bits must be 0 or 1")
        m0 = int(np.count_nonzero(b == 0))
        return cls(m0, int(b.size) - m0)


@dataclass(frozen=True)
class CoefficientEstimate:
    c0_hat: float
    c1_hat: float
    N: int
    standard_error: float
    """Delta-method standard error of ``p_hat = c0_hat**2`` (not of ``c0_hat``)."""

    @property
    def p_hat(self) -> float:
        return self.c0_hat**2


def estimate_coefficients(r: CountRecord) -> CoefficientEstimate:
    """``c0 = sqrt(m0/N)``, ``c1 = sqrt(1 - m0/N)``."""
    if r.N == 0:
        raise ValueError("no counts")
    p = r.m0 / r.N
    return CoefficientEstimate(sqrt(p), sqrt(1.0 - p), r.N, sqrt(p * (1.0 - p) / r.N))


@dataclass(frozen=True)
class CascadeCounts:
    """Joint counts of ``(A, B)`` readings over ``N`` runs.

    The optional conditional triple ``(m0_given_0, m1_given_0, M0)`` comes from
    an experiment that read ``A`` before the second stage and then counted ``B``
    among the ``M0`` runs with ``A = 0``. Real-valued expected counts are
    accepted as well as integers.
    """

    m00: float
    m01: float
    m10: float
    m11: float
    m0_given_0: int | None = None
    m1_given_0: int | None = None
    M0: int | None = None

    def __post_init__(self):
        if min(self.m00, self.m01, self.m10, self.m11) < 0:
            raise ValueError("counts must be nonnegative")
        cond = (self.m0_given_0, self.m1_given_0, self.M0)
        if any(c is not None for c in cond):
            if any(c is None for c in cond):
                raise ValueError("conditional counts need m0_given_0, m1_given_0 and M0 together")
            if self.m0_given_0 + self.m1_given_0 != self.M0:
                raise ValueError("conditional counts do not sum to M0")

    @property
    def N(self) -> float:
        return self.m00 + self.m01 + self.m10 + self.m11


@dataclass(frozen=True)
class CascadeEstimates:
    """Squared-modulus estimates; ``None`` marks an empty conditioning branch."""

    first0: float
    first1: float
    after0_0: float | None
    after0_1: float | None
    after1_0: float | None
    after1_1: float | None

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k, v in self.as_dict().items() if v is None)

    def as_dict(self) -> dict:
        return {
            "|c0|^2": self.first0,
            "|c1|^2": self.first1,
            "|c0'|^2": self.after0_0,
            "|c1'|^2": self.after0_1,
            "|c0''|^2": self.after1_0,
            "|c1''|^2": self.after1_1,
        }


def cascade_estimates(c: CascadeCounts) -> CascadeEstimates:
    N = c.N
    if N == 0:
        raise ValueError("no counts")
    a0 = c.m00 + c.m01
    a1 = c.m10 + c.m11
    return CascadeEstimates(
        a0 / N,
        a1 / N,
        c.m00 / a0 if a0 else None,
        c.m01 / a0 if a0 else None,
        c.m10 / a1 if a1 else None,
        c.m11 / a1 if a1 else None,
    )


def test_confidence(failures: int, N: int, level: float = 0.95) -> float:
    """One-sided Clopper-Pearson upper bound on the per-trial flag probability.

    With no failures this is ``1 - (1 - level)^(1/N)``.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level {level} not in (0, 1)")
    if N < 1 or not 0 <= failures <= N:
        raise ValueError("need 0 <= failures <= N and N >= 1")
    if failures == N:
        return 1.0
    if failures == 0:
        return float(-np.expm1(np.log1p(-level) / N))
    return float(beta.ppf(level, failures + 1, N - failures))


