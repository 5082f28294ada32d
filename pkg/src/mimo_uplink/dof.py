"""Degrees of freedom: the closed-form total DoF and numerical slope checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    DomainError,
    RateReport,
    SystemParams,
    effective_snr_equal_power,
    rate_mrc,
    rate_zf,
    validate_params,
)
from .montecarlo import TrialStream, complex_normal, run_chunked
from .slope import SlopeEstimate, check_high_snr_grid, fit_slope

__all__ = [
    "DofResult",
    "SCHEMES",
    "k_star",
    "dof_total",
    "achievable_rate_equal_power_zf",
    "achievable_rate_equal_power_mrc",
    "rho_floor_check",
    "coherent_mac_sum_rate",
    "coherent_mac_trials",
    "dof_slope_estimate",
]

SCHEMES = ("zf_equal_power", "mrc_equal_power", "coherent_mac")


@dataclass(frozen=True)
class DofResult:
    k_star: int
    dof_total: float


def k_star(M: int, K: int, T: int) -> int:
    """Number of users served at once: ``min(M, K, floor(T/2))``."""
    validate_params(SystemParams(M, K, T, 0.0), needs_training=False)
    return min(M, K, T // 2)


def dof_total(M: int, K: int, T: int) -> DofResult:
    ks = k_star(M, K, T)
    return DofResult(ks, ks * (1.0 - ks / T))


def achievable_rate_equal_power_zf(P: float, M: int, K: int, T: int) -> RateReport:
    """ZF rate of the first ``K*`` users with ``E = K*P`` and ``P_d = P``.

    Requires ``K* < M``; the remaining users stay silent.
    """
    ks = k_star(M, K, T)
    if ks >= M:
        raise DomainError(f"equal-power ZF needs K* < M (K*={ks}, M={M}); use coherent_mac")
    rho = effective_snr_equal_power(P, ks)
    return rate_zf(rho, M, ks, T)


def achievable_rate_equal_power_mrc(P: float, M: int, K: int, T: int) -> RateReport:
    ks = k_star(M, K, T)
    return rate_mrc(effective_snr_equal_power(P, ks), M, ks, T)


def rho_floor_check(P: float, K: int) -> bool:
    """True iff the equal-power effective SNR strictly exceeds ``P/3``."""
    if not P > 0 or K < 1:
        raise DomainError("need P > 0 and K >= 1")
    return effective_snr_equal_power(P, K) > P / 3.0


def coherent_mac_trials(rhos, M: int, K_active: int, trials: int, seed: int,
                        threads: int | None = None) -> np.ndarray:
    """Per-trial ``log2 det(I + rho G^H G)`` for each SNR, shape ``(trials, len(rhos))``.

    The same channel draw is reused for every SNR of a trial.
    """
    rhos = np.asarray(rhos, dtype=float).reshape(-1)
    if np.any(rhos < 0):
        raise DomainError("rho must be >= 0")
    eye = np.eye(K_active)

    def chunk(start: int, stop: int) -> np.ndarray:
        G = np.empty((stop - start, M, K_active), dtype=complex)
        for n, idx in enumerate(range(start, stop)):
            G[n] = complex_normal(TrialStream(seed, idx).generator(0), (M, K_active))
        gram = np.swapaxes(G, -1, -2).conj() @ G
        A = eye + rhos[None, :, None, None] * gram[:, None]
        _, logdet = np.linalg.slogdet(A)
        return logdet / math.log(2.0)

    return run_chunked(chunk, trials, threads)


def coherent_mac_sum_rate(rho: float, M: int, K_active: int, T: int, trials: int,
                          seed: int, threads: int | None = None) -> RateReport:
    """Monte Carlo sum rate of a MAC with receiver CSI over ``T - K_active`` slots.

    ``std_error`` is the standard error of the total rate.
    """
    if K_active < 1 or M < 1 or trials < 1:
        raise DomainError("need K_active >= 1, M >= 1, trials >= 1")
    if K_active >= T:
        raise DomainError(f"K_active < T violated (K_active={K_active}, T={T})")
    prelog = 1.0 - K_active / T
    values = prelog * coherent_mac_trials([rho], M, K_active, trials, seed, threads)[:, 0]
    total = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return RateReport("coherent-MAC", total / K_active, total, K_active, se)


def dof_slope_estimate(scheme: str, M: int, K: int, T: int, p_grid,
                       trials: int = 10_000, seed: int = 0,
                       threads: int | None = None) -> SlopeEstimate:
    """Slope of the total rate against ``log2(P)`` over a high-SNR grid.

    ``zf_equal_power`` and ``mrc_equal_power`` use the closed-form bounds;
    ``coherent_mac`` uses Monte Carlo log-det rates with common random
    numbers across the grid (``trials`` and ``seed`` apply only there).
    """
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    p = check_high_snr_grid(p_grid)
    ks = k_star(M, K, T)
    if scheme == "zf_equal_power":
        rates = [achievable_rate_equal_power_zf(P, M, K, T).total_rate for P in p]
    elif scheme == "mrc_equal_power":
        rates = [achievable_rate_equal_power_mrc(P, M, K, T).total_rate for P in p]
    else:
        if ks < 1:
            raise DomainError("coherent_mac needs K* >= 1 (T >= 2)")
        rhos = [effective_snr_equal_power(P, ks) for P in p]
        values = coherent_mac_trials(rhos, M, ks, trials, seed, threads)
        rates = (1.0 - ks / T) * np.ascontiguousarray(values.T).mean(axis=1)
    return fit_slope(p, rates, scheme)
