"""Fast smoke checks for CI; Monte Carlo stays at or below 1000 trials."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import dof, model, montecarlo, power, split


def _estimation_variances() -> bool:
    v = model.estimation_variances(3.0)
    return v == (0.75, 0.25)


def _effective_snr_two_routes() -> bool:
    for P_d, E, K in [(1.0, 1.0, 1), (2.0, 4.0, 2), (0.3, 7.0, 5)]:
        s = model.estimation_variances(E)
        alt = P_d * s.sigma2_hat / model.noise_variance_equiv(P_d, E, K)
        if not math.isclose(model.effective_snr(P_d, E, K), alt, rel_tol=1e-14):
            return False
    return True


def _split_oracle() -> bool:
    for P, T, K in [(1.0, 10, 2), (1.0, 4, 2), (0.1, 3, 2), (100.0, 40, 8)]:
        a = split.optimal_split_closed_form(P, T, K).rho_star
        b = split.optimal_split_grid(P, T, K).rho_star
        if abs(a - b) / b > 1e-6:
            return False
    return True


def _dof_formula() -> bool:
    return (dof.dof_total(64, 8, 20).dof_total == 4.8
            and math.isclose(dof.dof_total(4, 10, 5).dof_total, 1.2))


def _zf_slope() -> bool:
    est = dof.dof_slope_estimate("zf_equal_power", 8, 4, 16, 2.0 ** np.arange(10, 31))
    return abs(est.slope - 3.0) <= 0.05


def _power_law() -> bool:
    a = power.required_power_asymptotic(1.0, 100, 2, 10).P_required
    b = power.required_power_asymptotic(1.0, 400, 2, 10).P_required
    r = power.required_power_exact(0.8, 100, 2, 10, "mrc")
    return math.isclose(a / b, 2.0, rel_tol=1e-12) and abs(r.achieved_rate - 0.8) <= 1e-9 * 0.8


def _mc_dominance() -> bool:
    params = model.SystemParams(10, 2, 10, 1.0)
    sol = split.optimal_split_closed_form(1.0, 10, 2)
    emp = montecarlo.empirical_rate("zf", params, sol.as_energy_split(), 1000, 7)
    bound = model.rate_zf(sol.rho_star, 10, 2, 10).per_user_rate
    return emp.mean_per_user_rate >= bound - 3 * emp.std_error


def _mc_determinism() -> bool:
    params = model.SystemParams(8, 4, 16, 2.0)
    sp = split.optimal_split_closed_form(2.0, 16, 4).as_energy_split()
    a = montecarlo.empirical_rate("mmse", params, sp, 600, 3, threads=1)
    b = montecarlo.empirical_rate("mmse", params, sp, 600, 3, threads=3)
    return a == b


CHECKS: list[tuple[str, Callable[[], bool]]] = [
    ("estimation variances", _estimation_variances),
    ("effective SNR two routes", _effective_snr_two_routes),
    ("split closed form vs grid", _split_oracle),
    ("total DoF formula", _dof_formula),
    ("ZF equal-power slope", _zf_slope),
    ("power scaling law", _power_law),
    ("ZF Monte Carlo dominance", _mc_dominance),
    ("Monte Carlo determinism", _mc_determinism),
]


def run(write: Callable[[str], None] = print) -> bool:
    ok = True
    for name, check in CHECKS:
        try:
            passed = bool(check())
        except Exception as exc:  # report and keep going
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        write(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
