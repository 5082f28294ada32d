"""High-SNR slope estimation shared by the DoF and Monte Carlo modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DomainError

__all__ = ["SlopeEstimate", "check_high_snr_grid", "fit_slope", "octave_grid"]


@dataclass(frozen=True)
class SlopeEstimate:
    """Least-squares slope of a rate curve against ``log2(P)``."""

    slope: float
    p_grid: tuple
    r_values: tuple
    scheme: str


def octave_grid(lo_log2: float = 10, hi_log2: float = 30, step: float = 1.0) -> np.ndarray:
    n = int(round((hi_log2 - lo_log2) / step)) + 1
    return 2.0 ** np.linspace(lo_log2, hi_log2, n)


def check_high_snr_grid(p_grid, min_power: float = 1e3, min_octaves: float = 10.0) -> np.ndarray:
    """Validate a geometric, increasing, high-SNR power grid."""
    p = np.asarray(p_grid, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError("power grid needs at least two points")
    if np.any(np.diff(p) <= 0):
        raise DomainError("power grid must be strictly increasing")
    if p[0] < min_power:
        raise DomainError(f"power grid must start at >= {min_power:g}")
    logs = np.log2(p)
    if logs[-1] - logs[0] < min_octaves - 1e-9:
        raise DomainError(f"power grid must span >= {min_octaves:g} octaves")
    steps = np.diff(logs)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-9):
        raise DomainError("power grid must be geometric")
    return p


def fit_slope(p_grid, r_values, scheme: str) -> SlopeEstimate:
    p = np.asarray(p_grid, dtype=float)
    r = np.asarray(r_values, dtype=float)
    slope = float(np.polyfit(np.log2(p), r, 1)[0])
    return SlopeEstimate(slope, tuple(p.tolist()), tuple(r.tolist()), scheme)
