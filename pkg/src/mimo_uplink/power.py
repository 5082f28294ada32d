"""Transmit power needed to hold a per-user rate as the array grows."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import DomainError, rate_mrc, rate_zf
from .split import optimal_split_grid

__all__ = [
    "P_LOW",
    "P_HIGH",
    "BISECTION_ITERATIONS",
    "RATE_RTOL",
    "UnachievableRateError",
    "PowerSolveResult",
    "PowerRow",
    "target_rho_for_rate",
    "required_power_asymptotic",
    "required_power_exact",
    "power_sweep",
]

P_LOW = 1e-12
P_HIGH = 1e6
BISECTION_ITERATIONS = 200
RATE_RTOL = 1e-9


class UnachievableRateError(ArithmeticError):
    """The target rate is not reached inside the power bracket."""


@dataclass(frozen=True)
class PowerSolveResult:
    P_required: float
    method: str
    target_rate: Optional[float] = None
    achieved_rate: Optional[float] = None


@dataclass(frozen=True)
class PowerRow:
    M: int
    P_exact: Optional[float]
    P_asymptotic: float
    ratio: Optional[float]
    error: Optional[str] = None


def target_rho_for_rate(R: float, K: int, T: int) -> float:
    """SNR ``rho0`` with ``(1 - K/T) log2(1 + rho0) == R``."""
    if R < 0:
        raise DomainError("R must be >= 0")
    if K >= T:
        raise DomainError(f"K < T violated (K={K}, T={T})")
    return 2.0 ** (R / (1.0 - K / T)) - 1.0


def required_power_asymptotic(rho_0: float, M: int, K: int, T: int) -> PowerSolveResult:
    """Large-array power law ``sqrt(4 rho0 (T-K) / (M T^2))``; assumes ``M >> K``.

    The rate fields stay unset: the target enters through ``rho_0``.
    """
    if rho_0 < 0 or M < 1:
        raise DomainError("need rho_0 >= 0 and M >= 1")
    if K >= T:
        raise DomainError(f"K < T violated (K={K}, T={T})")
    P = math.sqrt(4.0 * rho_0 * (T - K) / (M * T * T))
    return PowerSolveResult(P, "asymptotic")


def _rate_at_power(P: float, M: int, K: int, T: int, receiver: str) -> float:
    rho = optimal_split_grid(P, T, K).rho_star
    if receiver == "mrc":
        return rate_mrc(rho, M, K, T).per_user_rate
    return rate_zf(rho, M, K, T).per_user_rate


def required_power_exact(R: float, M: int, K: int, T: int,
                         receiver: str = "mrc") -> PowerSolveResult:
    """Smallest power whose optimally split rate bound reaches ``R``.

    Geometric bisection on ``[P_LOW, P_HIGH]`` for ``BISECTION_ITERATIONS``
    steps; the split comes from the grid search.
    """
    receiver = receiver.lower()
    if receiver not in ("mrc", "zf"):
        raise DomainError(f"receiver must be 'mrc' or 'zf', got {receiver!r}")
    if not R > 0:
        raise DomainError("R must be > 0")
    if K >= T:
        raise DomainError(f"K < T violated (K={K}, T={T})")
    if receiver == "zf" and M <= K:
        raise DomainError(f"ZF needs M > K (M={M}, K={K})")
    if receiver == "mrc" and M < K:
        raise DomainError(f"K ≤ M violated (K={K}, M={M})")

    def f(P: float) -> float:
        return _rate_at_power(P, M, K, T, receiver)

    lo, hi = P_LOW, P_HIGH
    f_hi = f(hi)
    if f_hi < R:
        raise UnachievableRateError(
            f"rate {R} exceeds {f_hi} reached by {receiver.upper()} at P={hi:g}")
    f_lo = f(lo)
    if f_lo >= R:
        return PowerSolveResult(lo, "exact_bisection", R, f_lo)
    for _ in range(BISECTION_ITERATIONS):
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid < R:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    P, achieved = (lo, f_lo) if abs(f_lo - R) < abs(f_hi - R) else (hi, f_hi)
    if abs(achieved - R) > RATE_RTOL * R:
        raise UnachievableRateError(f"bisection stalled at rate {achieved} for target {R}")
    return PowerSolveResult(P, "exact_bisection", R, achieved)


def power_sweep(R: float, K: int, T: int, receiver: str, m_values: Sequence[int],
                threads: int = 1) -> list[PowerRow]:
    """Exact and asymptotic power for each ``M``; rows keep input order."""
    ms = list(m_values)
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise DomainError("m_values must be strictly increasing")
    bad = [m for m in ms if m <= K]
    if bad:
        raise DomainError(f"every M must exceed K={K}; got {bad}")
    rho_0 = target_rho_for_rate(R, K, T)

    def row(M: int) -> PowerRow:
        P_asym = required_power_asymptotic(rho_0, M, K, T).P_required
        try:
            P_exact = required_power_exact(R, M, K, T, receiver).P_required
        except (ArithmeticError, DomainError) as exc:
            return PowerRow(M, None, P_asym, None, str(exc))
        return PowerRow(M, P_exact, P_asym, P_exact / P_asym if P_asym > 0 else None)

    if threads > 1 and len(ms) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(row, ms))
    return [row(M) for M in ms]
