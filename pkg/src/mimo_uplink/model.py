"""Scenario types and closed-form quantities of the training-based uplink.

All powers are linear and relative to unit noise variance. Rates are in
bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

__all__ = [
    "DomainError",
    "SystemParams",
    "EnergySplit",
    "EstimationVariances",
    "RateReport",
    "validate_params",
    "estimation_variances",
    "data_power",
    "noise_variance_equiv",
    "effective_snr",
    "effective_snr_equal_power",
    "rate_mrc",
    "rate_zf",
]


class DomainError(ValueError):
    """Raised when an input violates a model constraint."""


@dataclass(frozen=True)
class SystemParams:
    """One scenario: M receive antennas, K users, coherence T, power P."""

    M: int
    K: int
    T: int
    P: float


@dataclass(frozen=True)
class EnergySplit:
    """How one user's coherence-interval energy ``P*T`` is spent.

    ``alpha_train`` is the training fraction ``E/(P*T)``, ``E`` the training
    energy and ``P_d`` the per-symbol data power over the ``T-K`` data slots.
    """

    alpha_train: float
    E: float
    P_d: float

    @classmethod
    def from_alpha(cls, alpha: float, P: float, T: int, K: int) -> "EnergySplit":
        if not 0.0 <= alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
        E = alpha * P * T
        return cls(alpha, E, data_power(P, T, K, E))

    @classmethod
    def from_energy(cls, E: float, P: float, T: int, K: int) -> "EnergySplit":
        P_d = data_power(P, T, K, E)
        alpha = E / (P * T) if P > 0 else 0.0
        return cls(alpha, E, P_d)

    @classmethod
    def equal_power(cls, P: float, T: int, K: int) -> "EnergySplit":
        """Same power ``P`` in every slot: ``E = K*P`` and ``P_d = P``."""
        return cls(K / T, K * P, P)


class EstimationVariances(NamedTuple):
    sigma2_hat: float
    sigma2_tilde: float


@dataclass(frozen=True)
class RateReport:
    receiver: str
    per_user_rate: float
    total_rate: float
    active_users: int
    std_error: Optional[float] = None


def validate_params(p: SystemParams, needs_training: bool = True) -> SystemParams:
    """Return ``p`` unchanged or raise :class:`DomainError`.

    Training-based schemes additionally need ``K <= M`` and ``K < T``.
    """
    if int(p.M) != p.M or p.M < 1:
        raise DomainError(f"M >= 1 violated (M={p.M})")
    if int(p.K) != p.K or p.K < 1:
        raise DomainError(f"K >= 1 violated (K={p.K})")
    if int(p.T) != p.T or p.T < 1:
        raise DomainError(f"T >= 1 violated (T={p.T})")
    if not p.P >= 0 or math.isinf(p.P):
        raise DomainError(f"P >= 0 violated (P={p.P})")
    if needs_training:
        if p.K > p.M:
            raise DomainError(f"K ≤ M violated (K={p.K}, M={p.M})")
        if p.K >= p.T:
            raise DomainError(f"K < T violated (K={p.K}, T={p.T})")
    return p


def estimation_variances(E: float) -> EstimationVariances:
    """Per-entry variances of the MMSE estimate and of its error."""
    if E < 0:
        raise DomainError(f"training energy must be >= 0, got {E}")
    if math.isinf(E):
        return EstimationVariances(1.0, 0.0)
    return EstimationVariances(E / (E + 1.0), 1.0 / (E + 1.0))


def data_power(P: float, T: int, K: int, E: float) -> float:
    if K >= T:
        raise DomainError(f"K < T violated (K={K}, T={T})")
    if E < 0:
        raise DomainError(f"training energy must be >= 0, got {E}")
    budget = P * T
    if E > budget:
        raise DomainError(f"E={E} exceeds the interval energy P*T={budget}")
    return (budget - E) / (T - K)


def noise_variance_equiv(P_d: float, E: float, K: int) -> float:
    """Variance of the equivalent noise (estimation-error leakage plus noise)."""
    if math.isinf(E):
        return 1.0
    return K * P_d / (E + 1.0) + 1.0


def effective_snr(P_d: float, E: float, K: int) -> float:
    """Post-estimation SNR of the equivalent perfect-CSI channel.

    Equals ``P_d / (1 + (K*P_d + 1)/E)``; zero when ``E == 0``.
    """
    if P_d < 0 or E < 0:
        raise DomainError("P_d and E must be non-negative")
    if math.isinf(E):
        return float(P_d)
    return P_d * E / (K * P_d + E + 1.0)


def effective_snr_equal_power(P: float, K: int) -> float:
    """Effective SNR with ``E = K*P`` and ``P_d = P``, i.e. ``K P^2/(2KP+1)``."""
    if P < 0 or K < 1:
        raise DomainError("need P >= 0 and K >= 1")
    return K * P * P / (2.0 * K * P + 1.0)


def _check_rate_args(rho: float, M: int, K: int, T: int) -> None:
    if rho < 0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    if M < 1 or K < 1:
        raise DomainError("M >= 1 and K >= 1 required")
    if K >= T:
        raise DomainError(f"K < T violated (K={K}, T={T})")


def rate_mrc(rho: float, M: int, K: int, T: int) -> RateReport:
    """Per-user ergodic rate lower bound with MRC processing.

    Only offered for ``K <= M``; the expression itself is computable beyond.
    """
    _check_rate_args(rho, M, K, T)
    if K > M:
        raise DomainError(f"K ≤ M violated (K={K}, M={M})")
    prelog = 1.0 - K / T
    r = prelog * math.log2(1.0 + rho * (M - 1) / (rho * (K - 1) + 1.0))
    return RateReport("MRC", r, K * r, K)


def rate_zf(rho: float, M: int, K: int, T: int) -> RateReport:
    """Per-user ergodic rate lower bound with zero-forcing; zero at ``M == K``."""
    _check_rate_args(rho, M, K, T)
    if M < K:
        raise DomainError(f"ZF needs M ≥ K (M={M}, K={K})")
    prelog = 1.0 - K / T
    r = prelog * math.log2(1.0 + rho * (M - K))
    return RateReport("ZF", r, K * r, K)
