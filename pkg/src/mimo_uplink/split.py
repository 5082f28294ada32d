"""Training/data energy split that maximizes the effective SNR.

``alpha`` is always the *training* fraction ``E/(P*T)``. Writing
``x = P*T`` the effective SNR as a function of ``alpha`` is the rational map

    rho(alpha) = x^2 alpha (1 - alpha) / (alpha x (T - 2K) + K x + T - K)

which is unimodal on ``[0, 1]``. Two independent solvers are provided: the
closed-form branch formulas and a dense grid scan refined by golden-section
search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DomainError, EnergySplit, data_power, effective_snr

__all__ = [
    "SplitSolution",
    "rho_of_alpha",
    "rho_of_alpha_direct",
    "gamma_aux",
    "optimal_split_closed_form",
    "optimal_split_grid",
    "asymptotic_split_high_snr",
    "asymptotic_split_low_snr",
    "split_for_target_rho",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SplitSolution:
    alpha_train: float
    E: float
    P_d: float
    rho_star: float
    method: str

    def as_energy_split(self) -> EnergySplit:
        return EnergySplit(self.alpha_train, self.E, self.P_d)


def _check(P: float, T: int, K: int, strict_power: bool = True) -> None:
    if K < 1:
        raise DomainError(f"K >= 1 violated (K={K})")
    if K >= T:
        raise DomainError(f"K < T violated (K={K}, T={T})")
    if strict_power and not P > 0:
        raise DomainError(f"P > 0 violated (P={P})")


def _coefficients(P: float, T: int, K: int) -> tuple[float, float, float]:
    x = P * T
    return x * x, x * (T - 2 * K), K * x + T - K


def rho_of_alpha(alpha, P: float, T: int, K: int):
    """Effective SNR for training fraction ``alpha`` (scalar or array)."""
    _check(P, T, K)
    a_arr = np.asarray(alpha, dtype=float)
    if np.any((a_arr < 0.0) | (a_arr > 1.0)):
        raise DomainError("alpha must lie in [0, 1]")
    c, a, b = _coefficients(P, T, K)
    rho = c * a_arr * (1.0 - a_arr) / (a * a_arr + b)
    return float(rho) if rho.ndim == 0 else rho


def rho_of_alpha_direct(alpha: float, P: float, T: int, K: int) -> float:
    """Same quantity evaluated through ``data_power`` and ``effective_snr``."""
    E = alpha * P * T
    return effective_snr(data_power(P, T, K, E), E, K)


def gamma_aux(P: float, T: int, K: int) -> float:
    _check(P, T, K)
    if T == 2 * K:
        raise DomainError("gamma is undefined at T = 2K")
    x = P * T
    return (1.0 + x) * (T - K) / (x * (T - 2 * K))


def _closed_form_rho(P: float, T: int, K: int) -> float:
    x = P * T
    if T == 2 * K:
        return x * x / (2.0 * T * (1.0 + x))
    g = gamma_aux(P, T, K)
    # (sqrt(u) - sqrt(u - 1))^2 written as 1/(sqrt(u) + sqrt(u - 1))^2
    if T > 2 * K:
        return x / (T - 2 * K) / (math.sqrt(g) + math.sqrt(g - 1.0)) ** 2
    return x / (2 * K - T) / (math.sqrt(-g) + math.sqrt(1.0 - g)) ** 2


def _stationary_alpha(P: float, T: int, K: int) -> float:
    # root in (0, 1) of a*alpha^2 + 2*b*alpha - b = 0
    _, a, b = _coefficients(P, T, K)
    if a == 0.0:
        return 0.5
    return b / (b + math.sqrt(b * (a + b)))


def optimal_split_closed_form(P: float, T: int, K: int) -> SplitSolution:
    """Maximized effective SNR from the three branch formulas (T vs 2K).

    The reported ``alpha_train`` is the stationary point of ``rho(alpha)``.
    """
    _check(P, T, K)
    alpha = _stationary_alpha(P, T, K)
    E = alpha * P * T
    return SplitSolution(alpha, E, data_power(P, T, K, E),
                         _closed_form_rho(P, T, K), "closed_form")


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def optimal_split_grid(P: float, T: int, K: int,
                       resolution: float = 1e-4) -> SplitSolution:
    """Brute-force maximizer of ``rho(alpha)``.

    Scans ``alpha`` on a uniform grid with step ``resolution`` and refines
    the best cell by golden-section search to 1e-10. Ties on the grid go to
    the smallest ``alpha``.
    """
    _check(P, T, K)
    if not 0 < resolution <= 1e-4:
        raise DomainError("resolution must be in (0, 1e-4]")
    n = int(math.ceil(1.0 / resolution))
    grid = np.linspace(0.0, 1.0, n + 1)
    c, a, b = _coefficients(P, T, K)
    values = c * grid * (1.0 - grid) / (a * grid + b)
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n)]

    def f(t: float) -> float:
        return c * t * (1.0 - t) / (a * t + b)

    alpha = _golden_max(f, lo, hi, 1e-10)
    E = alpha * P * T
    P_d = data_power(P, T, K, E)
    return SplitSolution(alpha, E, P_d, effective_snr(P_d, E, K), "grid")


def asymptotic_split_high_snr(T: int, K: int) -> tuple[float, float]:
    """High-SNR pair ``(data fraction, rho/P)``, valid for ``P*T >> 1``.

    The first element is the *data-phase* fraction ``1 - alpha_train``.
    """
    _check(1.0, T, K)
    s_data, s_train = math.sqrt(T - K), math.sqrt(K)
    return s_data / (s_data + s_train), T / (s_data + s_train) ** 2


def asymptotic_split_low_snr(P: float, T: int, K: int) -> tuple[float, float]:
    """Low-SNR pair ``(alpha, rho)``, valid for ``P*T << 1``."""
    _check(P, T, K, strict_power=False)
    return 0.5, (P * T) ** 2 / (4.0 * (T - K))


def split_for_target_rho(rho: float, T: int, K: int,
                         iterations: int = 200) -> tuple[float, SplitSolution]:
    """Smallest power ``P`` whose optimal split reaches effective SNR ``rho``.

    Returns ``(P, solution)``; geometric bisection on ``[1e-12, 1e12]``.
    """
    _check(1.0, T, K)
    if rho <= 0:
        raise DomainError("target rho must be positive")
    lo, hi = 1e-12, 1e12
    if _closed_form_rho(hi, T, K) < rho:
        raise DomainError(f"rho={rho} not reachable with P <= {hi}")
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        if mid in (lo, hi):
            break
        if _closed_form_rho(mid, T, K) < rho:
            lo = mid
        else:
            hi = mid
    return hi, optimal_split_closed_form(hi, T, K)
