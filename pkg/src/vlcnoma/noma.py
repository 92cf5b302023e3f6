"""Power-domain NOMA rate model with imperfect successive decoding.

K users share one optical cell.  Users are indexed weakest channel
first (h_1 <= ... <= h_K) and the superposed transmit signal spends a
fraction a_k^2 of the (unit) electrical power on user k.  Receiver k
decodes the messages of all weaker users before its own; cancellation
is imperfect, leaving a fraction ``epsilon`` of each cancelled power
term behind as residual interference.

The spectral efficiency of user k decoding message j (j <= k) is

    R_{k->j} = log2(1 + (h_k a_j)^2 /
                    (sum_{i>j} (h_k a_i)^2 + eps * sum_{i<j} (h_k a_i)^2 + 1/rho))

where rho folds responsivity and transmit SNR into one link budget
constant.  For the strongest user's own message (j = k = K) only the
residual terms remain.  In cumulative form s_k = sum_{i>=k} a_i^2 the
per-user rates become ratios of affine expressions,

    R_k = log2(((1-eps) s_k + m_k) / (s_{k+1} - eps s_k + m_k)),

with s_{K+1} = 0 and the per-user constant m_k = eps + 1/(rho h_k^2).
That affine form is what the allocation solvers optimize over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinkBudget",
    "UserSet",
    "PowerAllocation",
    "CumulativePower",
    "RateVector",
    "to_cumulative",
    "from_cumulative",
    "m_coefficient",
    "rate_k_to_j",
    "rate_vector",
    "sic_ordering_check",
    "qos_satisfied",
    "noma_power_ordered",
]

#: Per-user spectral efficiencies in bit/s/Hz, weakest user first.
RateVector = np.ndarray

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class LinkBudget:
    """Electrical link budget shared by every user of a cell.

    ``tsnr_db`` is the transmit signal-to-noise ratio in dB;
    ``rho = responsivity^2 * 10^(tsnr_db/10)`` is the derived budget
    constant, and ``residual_interference`` is the fraction of
    imperfectly cancelled power (0 = ideal SIC).
    """

    tsnr_db: float
    responsivity: float = 0.4
    residual_interference: float = 0.0
    rho: float = field(init=False)

    def __post_init__(self) -> None:
        if self.responsivity <= 0.0:
            raise ValueError(f"responsivity must be positive, got {self.responsivity!r}")
        if not 0.0 <= self.residual_interference < 1.0:
            raise ValueError(
                "residual interference fraction must lie in [0, 1), "
                f"got {self.residual_interference!r}"
            )
        rho = self.responsivity**2 * 10.0 ** (self.tsnr_db / 10.0)
        if not math.isfinite(rho) or rho <= 0.0:
            raise ValueError(f"link budget rho must be positive and finite, got {rho!r}")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class UserSet:
    """Channel gains (ascending) and QoS targets of the users in one cell."""

    gains: np.ndarray
    qos_targets: np.ndarray

    def __post_init__(self) -> None:
        gains = np.asarray(self.gains, dtype=float)
        targets = np.asarray(self.qos_targets, dtype=float)
        if gains.ndim != 1 or gains.size == 0:
            raise ValueError("gains must be a non-empty 1-D array")
        if np.any(gains <= 0.0) or not np.all(np.isfinite(gains)):
            raise ValueError("channel gains must be positive and finite")
        if np.any(np.diff(gains) < 0.0):
            raise ValueError("channel gains must be sorted ascending (weakest first)")
        if targets.shape != gains.shape:
            raise ValueError(
                f"need one QoS target per user, got {targets.shape} for {gains.shape}"
            )
        if np.any(targets < 0.0) or not np.all(np.isfinite(targets)):
            raise ValueError("QoS targets must be nonnegative and finite")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "qos_targets", targets)

    @property
    def k_users(self) -> int:
        return int(self.gains.size)


@dataclass(frozen=True)
class PowerAllocation:
    """Amplitude coefficients a_k with unit total electrical power."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.coefficients, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D array")
        if np.any(a < 0.0) or not np.all(np.isfinite(a)):
            raise ValueError("power coefficients must be nonnegative and finite")
        total = float(np.sum(a**2))
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"power coefficients must satisfy sum(a^2) = 1, got {total!r}")
        object.__setattr__(self, "coefficients", a)


@dataclass(frozen=True)
class CumulativePower:
    """Tail power sums s_k = sum_{i>=k} a_i^2; s_1 = 1 and s is nonincreasing."""

    s: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("s must be a non-empty 1-D array")
        if abs(s[0] - 1.0) > _NORM_TOL:
            raise ValueError(f"s_1 must equal 1 (total power), got {s[0]!r}")
        if np.any(np.diff(s) > _NORM_TOL):
            raise ValueError("cumulative power must be nonincreasing")
        if np.any(s < -_NORM_TOL) or not np.all(np.isfinite(s)):
            raise ValueError("cumulative power values must lie in [0, 1]")
        object.__setattr__(self, "s", s)


def to_cumulative(allocation: PowerAllocation) -> CumulativePower:
    """Tail sums of squared coefficients; inverse of :func:`from_cumulative`."""
    powers = allocation.coefficients**2
    s = np.cumsum(powers[::-1])[::-1]
    # snap the validated ~1 total to exactly 1 so downstream algebra is clean
    return CumulativePower(s / s[0])


def from_cumulative(cumulative: CumulativePower) -> PowerAllocation:
    """Recover amplitude coefficients a_k = sqrt(s_k - s_{k+1})."""
    s = cumulative.s
    diffs = np.diff(np.append(s, 0.0))
    if np.any(diffs > _NORM_TOL):
        raise ValueError("cumulative power must be nonincreasing")
    return PowerAllocation(np.sqrt(np.maximum(-diffs, 0.0)))


def m_coefficient(budget: LinkBudget, gain: float) -> float:
    """Per-user constant m = eps + 1/(rho h^2) entering every rate ratio."""
    if gain <= 0.0 or not math.isfinite(gain):
        raise ValueError(f"channel gain must be positive and finite, got {gain!r}")
    return budget.residual_interference + 1.0 / (budget.rho * gain**2)


def _decode_rate(rho: float, eps: float, gains: np.ndarray, powers: np.ndarray,
                 k: int, j: int) -> float:
    """Rate of receiver k (0-based) decoding message j; no ordering checks."""
    n = gains.size
    h2 = gains[k] ** 2
    signal = h2 * powers[j]
    if j == n - 1:
        interference = eps * h2 * float(np.sum(powers[:j]))
    else:
        interference = h2 * float(np.sum(powers[j + 1:])) + eps * h2 * float(np.sum(powers[:j]))
    return math.log2(1.0 + signal / (interference + 1.0 / rho))


def rate_k_to_j(budget: LinkBudget, users: UserSet, allocation: PowerAllocation,
                k: int, j: int) -> float:
    """Spectral efficiency of user k decoding user j's message (1-based, j <= k)."""
    n = users.k_users
    if not 1 <= j <= k <= n:
        raise ValueError(f"need 1 <= j <= k <= {n}, got k={k}, j={j}")
    if allocation.coefficients.size != n:
        raise ValueError("allocation length must match the user set")
    return _decode_rate(budget.rho, budget.residual_interference,
                        users.gains, allocation.coefficients**2, k - 1, j - 1)


def _rates_from_s(s: np.ndarray, m: np.ndarray, eps: float) -> np.ndarray:
    """Per-user rates from cumulative powers via the affine-ratio form."""
    s_next = np.append(s[1:], 0.0)
    numer = (1.0 - eps) * s + m
    denom = s_next - eps * s + m
    if np.any(denom <= 0.0) or np.any(numer <= 0.0):
        raise ValueError(
            "rate ratio is undefined (nonpositive numerator or denominator); "
            "check the link budget and power ordering"
        )
    return np.log2(numer / denom)


def rate_vector(budget: LinkBudget, users: UserSet,
                allocation: PowerAllocation | CumulativePower) -> RateVector:
    """Per-user achieved spectral efficiencies under the given allocation."""
    if isinstance(allocation, PowerAllocation):
        cumulative = to_cumulative(allocation)
    else:
        cumulative = allocation
    if cumulative.s.size != users.k_users:
        raise ValueError("allocation length must match the user set")
    m = np.array([m_coefficient(budget, h) for h in users.gains])
    return _rates_from_s(cumulative.s, m, budget.residual_interference)


def sic_ordering_check(budget: LinkBudget, users: UserSet,
                       allocation: PowerAllocation, tol: float = 1e-9) -> bool:
    """True when every stronger receiver decodes weaker messages at least as fast.

    Verifies R_{k1->j} >= R_{k2->j} - tol for all j <= k2 <= k1, the
    property that makes successive decoding well posed once gains are
    sorted ascending.
    """
    n = users.k_users
    powers = allocation.coefficients**2
    rho = budget.rho
    eps = budget.residual_interference
    for j in range(n):
        prev = None
        for k in range(j, n):
            # R_{k->j} for fixed j is checked monotone nondecreasing in k
            r = _decode_rate(rho, eps, users.gains, powers, k, j)
            if prev is not None and r < prev - tol:
                return False
            prev = r
    return True


def qos_satisfied(rates: RateVector, targets: np.ndarray, tol: float = 1e-9) -> bool:
    """True when every user meets its QoS target within tolerance."""
    rates = np.asarray(rates, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if rates.shape != targets.shape:
        raise ValueError(f"shape mismatch: rates {rates.shape}, targets {targets.shape}")
    return bool(np.all(rates >= targets - tol))


def noma_power_ordered(allocation: PowerAllocation, tol: float = 1e-9) -> bool:
    """True when weaker users get at least as much power (a_1 >= ... >= a_K)."""
    return bool(np.all(np.diff(allocation.coefficients) <= tol))
