"""N-fold product states in the permutation-symmetric type basis.

``(c0|00> + c1|11>)^{(x)N}`` lives in a ``2^N``-dimensional space (one bit per
system/apparatus pair), but it is invariant under permuting the ``N`` pairs.
Grouping basis sequences by their number ``m`` of ``|00>`` pairs gives ``N+1``
orthonormal symmetrized vectors ``S(|00>^m |11>^(N-m))`` and the expansion

    sum_m  p^(m/2) q^((N-m)/2) sqrt(C(N, m))  S(|00>^m |11>^(N-m)),

with ``p = |c0|^2`` and ``q = 1 - p``. Only the ``N+1`` coefficients are
stored, in log form, so ``N = 10^6`` costs a few megabytes.

Sampling a world
----------------
:func:`sample_world` draws a type ``m`` with weight equal to the squared
coefficient and then a uniformly random ordering of the ``m`` zeros. The
uniform ordering follows from the symmetrized vector giving every sequence
in a type class the same amplitude. Drawing ``m`` from the squared
coefficients is where the amplitude picture is turned into a frequency
model; that step is what the concentration results justify as ``N`` grows,
so it sits in this module and nowhere in :mod:`pureqm.hilbert`.

Only two-outcome measurements are handled; ``k`` outcomes would group by
multinomial types instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor, isclose

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from .hilbert import TOL, ResourceLimitError

DENSE_MAX_N = 24
EXACT_MAX_N = 64


def _check_pair(c0, c1):
    p = abs(c0) ** 2
    q = abs(c1) ** 2
    if abs(p + q - 1.0) > TOL:
        raise ValueError(f"|c0|^2 + |c1|^2 = {p + q!r}, expected 1")
    return p, q


_LN_SQRT_2PI = 0.5 * np.log(2 * np.pi)
_STIRLING = (1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188)


def _stirlerr(n):
    """``ln(n!) - ln(sqrt(2 pi n) (n/e)^n)``, vectorized; 0 at n = 0."""
    n = np.asarray(n, dtype=float)
    out = np.zeros_like(n)
    small = (n > 0) & (n <= 15)
    ns = n[small]
    out[small] = gammaln(ns + 1) - (ns + 0.5) * np.log(ns) + ns - _LN_SQRT_2PI
    big = n > 15
    nb = n[big]
    nn = nb * nb
    s0, s1, s2, s3, s4 = _STIRLING
    out[big] = (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nb
    return out


def _bd0(x, mean):
    """Deviance ``x ln(x/mean) + mean - x`` without cancellation near x = mean."""
    x = np.asarray(x, dtype=float)
    mean = np.broadcast_to(np.asarray(mean, dtype=float), x.shape)
    out = xlogy(x, x) - xlogy(x, mean) + mean - x
    near = np.abs(x - mean) < 0.1 * (x + mean)
    if near.any():
        xs, ms = x[near], mean[near]
        v = (xs - ms) / (xs + ms)
        acc = (xs - ms) * v
        ej = 2 * xs * v
        v2 = v * v
        for j in range(1, 200):
            ej = ej * v2
            step = ej / (2 * j + 1)
            acc = acc + step
            if np.all(np.abs(step) <= 1e-17 * np.abs(acc)):
                break
        out[near] = acc
    return out


def _log_type_prob(m, N, p):
    """ln of the squared coefficient ``C(N,m) p^m q^(N-m)``, vectorized over ``m``.

    Saddle-point form: Stirling remainders plus the deviances of ``m`` from
    ``Np`` and of ``N-m`` from ``Nq``. Differencing ``gammaln`` values loses
    about ``1e-9`` in the log at ``N = 10^6``; this form keeps full precision.
    Exactly-zero weights come back as ``-inf``.
    """
    m = np.asarray(m, dtype=float)
    q = 1.0 - p
    if p == 0.0 or q == 0.0:
        target = 0.0 if p == 0.0 else float(N)
        return np.where(m == target, 0.0, -np.inf)
    out = np.empty_like(m)
    lo, hi = m == 0, m == N
    mid = ~(lo | hi)
    out[lo] = N * np.log1p(-p)
    out[hi] = N * np.log(p)
    mm = m[mid]
    out[mid] = (
        _stirlerr(N) - _stirlerr(mm) - _stirlerr(N - mm)
        - _bd0(mm, N * p) - _bd0(N - mm, N * q)
        - _LN_SQRT_2PI - 0.5 * (np.log(mm) + np.log1p(-mm / N))
    )
    return out


@dataclass(frozen=True, eq=False)
class TypeDistribution:
    """Coefficients of ``|Psi_out>^{(x)N}`` in the type basis.

    ``log_weight[m]`` is the natural log of the (real, nonnegative) coefficient
    of ``S(|00>^m |11>^(N-m))``; ``m`` counts zeros. Exactly-zero coefficients
    are stored as ``-inf``.
    """

    N: int
    p: float
    log_weight: np.ndarray

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(self.log_weight)

    @property
    def weight_squared(self) -> np.ndarray:
        return np.exp(2.0 * self.log_weight)

    def total(self) -> float:
        """Sum of squared coefficients, computed in log space."""
        return float(np.exp(logsumexp(2.0 * self.log_weight)))

    def csv_rows(self):
        """``(m, log_weight, weight_squared)`` for every type."""
        ws = self.weight_squared
        return [(m, float(self.log_weight[m]), float(ws[m])) for m in range(self.N + 1)]


def symmetric_expand(c0: complex, c1: complex, N: int) -> TypeDistribution:
    if N < 1:
        raise ValueError("N must be at least 1")
    p, _ = _check_pair(c0, c1)
    m = np.arange(N + 1)
    logw = 0.5 * _log_type_prob(m, N, p)
    logw.setflags(write=False)
    return TypeDistribution(int(N), float(p), logw)


def type_weight(m: int, N: int, p: float) -> float:
    """Squared coefficient of type ``m``: the Binomial(N, p) mass at ``m``."""
    if not 0 <= m <= N:
        raise ValueError(f"type {m} out of range 0..{N}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    return float(np.exp(_log_type_prob(m, N, p)))


def type_weight_exact(m: int, N: int, p) -> Fraction:
    """Rational ``C(N,m) p^m (1-p)^(N-m)`` with ``p`` taken as an exact fraction.

    Big-integer cross-check for small ``N``; floats are converted exactly.
    """
    if N > EXACT_MAX_N:
        raise ResourceLimitError(f"exact path limited to N <= {EXACT_MAX_N}")
    p = Fraction(p)
    return comb(N, m) * p**m * (1 - p) ** (N - m)


@dataclass(frozen=True)
class DominantType:
    m: int
    """Most heavily weighted type (smaller one on a tie)."""
    floor_np: int
    tie: bool = False
    tied_with: int | None = None

    @property
    def adjusted(self) -> bool:
        """True when the argmax is not ``floor(N p)``."""
        return self.m != self.floor_np

    def __int__(self):
        return self.m


def dominant_type(N: int, p: float) -> DominantType:
    """Type with the largest coefficient.

    Usually ``floor(N p)``. The true binomial mode can sit one above it; that
    case returns the true argmax with ``adjusted`` set. Equal neighbours are
    reported as a tie, keeping the smaller ``m``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    base = min(N, max(0, floor(N * p)))
    lw = _log_type_prob(np.arange(max(0, base - 1), min(N, base + 1) + 1), N, p)
    cands = list(range(max(0, base - 1), min(N, base + 1) + 1))
    best = cands[int(np.argmax(lw))]
    # neighbours tie when w(m+1)/w(m) = (N-m) p / ((m+1) q) equals 1
    tie_with = None
    for other in (best - 1, best + 1):
        if 0 <= other <= N and 0.0 < p < 1.0:
            lo = min(best, other)
            if isclose((N - lo) * p, (lo + 1) * (1.0 - p), rel_tol=1e-12):
                tie_with = other
    if tie_with is not None and tie_with < best:
        best, tie_with = tie_with, best
    return DominantType(m=best, floor_np=base, tie=tie_with is not None, tied_with=tie_with)


def binary_kl(x: float, p: float) -> float:
    """D(x || p) for Bernoulli distributions, in nats."""
    return float(xlogy(x, x / p) + xlogy(1 - x, (1 - x) / (1 - p))) if 0 < p < 1 else float("inf")


def chernoff_log_bound(N: int, p: float, eps: float) -> float:
    """ln of ``2 exp(-N D*)`` with ``D*`` the smaller KL rate at ``p +- eps``.

    Boundaries falling outside ``[0, 1]`` have an empty tail and are skipped;
    ``-inf`` if both are.
    """
    rates = [binary_kl(x, p) for x in (p - eps, p + eps) if 0.0 <= x <= 1.0]
    if not rates:
        return float("-inf")
    return float(np.log(2.0) - N * min(rates))


def log_tail_mass(N: int, p: float, eps: float) -> float:
    """ln of the squared-coefficient mass on types with ``|m/N - p| > eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = np.arange(N + 1)
    outside = np.abs(m / N - p) > eps
    if not outside.any():
        return float("-inf")
    lw = _log_type_prob(m[outside], N, p)
    return float(logsumexp(lw))


def tail_mass(N: int, p: float, eps: float) -> float:
    return float(np.exp(log_tail_mass(N, p, eps)))


@dataclass(frozen=True, eq=False)
class WorldSample:
    bits: np.ndarray
    m0: int

    def __post_init__(self):
        if int(np.count_nonzero(self.bits == 0)) != self.m0:
            raise ValueError("m0 does not match the number of zeros in bits")

    @property
    def N(self) -> int:
        return int(self.bits.size)


def sample_types(N: int, p: float, size: int, seed) -> np.ndarray:
    """Draw ``size`` zero-counts from the squared type coefficients."""
    rng = np.random.default_rng(seed)
    w = np.exp(_log_type_prob(np.arange(N + 1), N, p))
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(size), side="right").clip(0, N)


def sample_world(N: int, p: float, seed) -> WorldSample:
    """One length-``N`` outcome sequence, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    w = np.exp(_log_type_prob(np.arange(N + 1), N, p))
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    m = int(min(N, np.searchsorted(cdf, rng.random(), side="right")))
    bits = np.ones(N, dtype=np.uint8)
    bits[rng.choice(N, size=m, replace=False)] = 0
    bits.setflags(write=False)
    return WorldSample(bits, m)


@dataclass(frozen=True, eq=False)
class DenseExpansion:
    N: int
    amplitudes: np.ndarray

    def zeros_per_index(self) -> np.ndarray:
        idx = np.arange(self.amplitudes.size, dtype=np.uint64)
        return self.N - np.bitwise_count(idx).astype(np.int64)

    def type_sums(self) -> np.ndarray:
        """Squared amplitude summed within each type, indexed by zero count."""
        return np.bincount(
            self.zeros_per_index(), weights=np.abs(self.amplitudes) ** 2, minlength=self.N + 1
        )


def dense_oracle_expand(c0: complex, c1: complex, N: int) -> DenseExpansion:
    """Brute-force ``(c0|0> + c1|1>)^{(x)N}``, one bit per system/apparatus pair.

    Bit value 0 stands for the pair ``|00>`` and 1 for ``|11>``; the first copy
    is the most significant bit.
    """
    if N > DENSE_MAX_N:
        raise ResourceLimitError(f"dense expansion needs 2^{N} amplitudes; limit is N <= {DENSE_MAX_N}")
    if N < 1:
        raise ValueError("N must be at least 1")
    single = np.array([c0, c1], dtype=np.complex128)
    amps = single
    for _ in range(N - 1):
        amps = np.kron(amps, single)
    return DenseExpansion(N, amps)
