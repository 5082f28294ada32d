import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from mimo_uplink.dof import (
    achievable_rate_equal_power_zf,
    coherent_mac_sum_rate,
    dof_slope_estimate,
    dof_total,
    k_star,
    rho_floor_check,
)
from mimo_uplink.model import DomainError
from mimo_uplink.slope import octave_grid

HIGH_SNR = octave_grid(10, 30)

dims = st.integers(1, 40)


class TestKStar:
    @pytest.mark.parametrize("M,K,T,expected", [(64, 8, 20, 8), (4, 10, 5, 2), (1, 1, 2, 1)])
    def test_values(self, M, K, T, expected):
        assert k_star(M, K, T) == expected


class TestDofTotal:
    @pytest.mark.parametrize("M,K,T,expected", [(64, 8, 20, 4.8), (4, 10, 5, 1.2), (2, 2, 4, 1.0)])
    def test_values(self, M, K, T, expected):
        assert dof_total(M, K, T).dof_total == pytest.approx(expected, rel=1e-15)

    def test_zero_only_at_t_one(self):
        assert dof_total(5, 5, 1).dof_total == 0.0
        assert dof_total(1, 1, 2).dof_total > 0

    @given(dims, dims, dims)
    def test_bounds_and_symmetry(self, M, K, T):
        d = dof_total(M, K, T)
        assert 0 <= d.dof_total <= d.k_star <= min(M, K)
        assert d == dof_total(K, M, T)
        assert (d.dof_total == 0) == (T == 1)

    @given(dims, dims, dims)
    def test_monotone(self, M, K, T):
        d = dof_total(M, K, T).dof_total
        assert dof_total(M + 1, K, T).dof_total >= d
        assert dof_total(M, K + 1, T).dof_total >= d
        assert dof_total(M, K, T + 1).dof_total >= d

    @given(dims, dims, st.integers(1, 20))
    def test_saturation_in_m(self, M, K, extra):
        T = 2 * K + 3
        if M > k_star(M, K, T):
            assert dof_total(M + extra, K, T) == dof_total(M, K, T)

    def test_per_user_dof_tends_to_one(self):
        K, M = 4, 8
        per_user = [dof_total(M, K, T).dof_total / K for T in (10, 100, 1000, 10**6)]
        assert all(b > a for a, b in zip(per_user, per_user[1:]))
        assert per_user[-1] == pytest.approx(1.0, abs=1e-5)


class TestEqualPowerZf:
    def test_zero_power(self):
        assert achievable_rate_equal_power_zf(0.0, 8, 4, 16).total_rate == 0.0

    def test_silent_users(self):
        r = achievable_rate_equal_power_zf(10.0, 4, 10, 5)
        assert r.active_users == 2
        rho = 2 * 100 / (2 * 2 * 10 + 1)
        assert r.per_user_rate == pytest.approx((1 - 2 / 5) * math.log2(1 + rho * 2), rel=1e-14)

    def test_requires_kstar_below_m(self):
        with pytest.raises(DomainError):
            achievable_rate_equal_power_zf(10.0, 2, 2, 4)


class TestRhoFloor:
    def test_cases(self):
        assert rho_floor_check(2.0, 1)
        assert not rho_floor_check(1.0, 1)
        assert rho_floor_check(10.0, 4)

    def test_boundary_value(self):
        from mimo_uplink.model import effective_snr_equal_power
        assert effective_snr_equal_power(10.0, 4) == pytest.approx(400 / 81, rel=1e-15)


class TestSlopes:
    def test_zf_slope_matches_count(self):
        est = dof_slope_estimate("zf_equal_power", 8, 4, 16, HIGH_SNR)
        assert est.slope == pytest.approx(3.0, abs=0.05)

    def test_mrc_slope_vanishes_as_grid_moves_up(self):
        slopes = [dof_slope_estimate("mrc_equal_power", 8, 4, 16, octave_grid(lo, lo + 20)).slope
                  for lo in (10, 20, 30)]
        assert all(abs(b) < abs(a) for a, b in zip(slopes, slopes[1:]))
        assert abs(slopes[0]) < 0.1

    def test_coherent_mac_slope(self):
        est = dof_slope_estimate("coherent_mac", 2, 2, 4, octave_grid(10, 30, 2), trials=2000, seed=5)
        assert est.slope == pytest.approx(1.0, abs=0.05)

    @pytest.mark.parametrize("M,K,T", [(8, 4, 16), (3, 6, 7), (2, 2, 8)])
    def test_count_never_exceeds_mac_slope(self, M, K, T):
        est = dof_slope_estimate("coherent_mac", M, K, T, octave_grid(10, 30, 2), trials=1000, seed=9)
        assert dof_total(M, K, T).dof_total <= est.slope + 0.05

    @pytest.mark.parametrize("grid", [[1e3], [1e2, 1e6], [2**10, 2**15], [2**10, 2**12, 2**21],
                                      [2**20, 2**10]])
    def test_malformed_grid(self, grid):
        with pytest.raises(DomainError):
            dof_slope_estimate("zf_equal_power", 8, 4, 16, grid)

    def test_unknown_scheme(self):
        with pytest.raises(DomainError):
            dof_slope_estimate("sic", 8, 4, 16, HIGH_SNR)


class TestCoherentMac:
    def test_zero_snr(self):
        r = coherent_mac_sum_rate(0.0, 4, 2, 8, trials=50, seed=1)
        assert r.total_rate == 0.0

    def test_scalar_channel_matches_integral(self):
        # oracle: E[log2(1 + |g|^2)] with |g|^2 ~ Exp(1)
        exact, _ = integrate.quad(lambda x: math.log2(1 + x) * math.exp(-x), 0, np.inf)
        assert exact == pytest.approx(0.8609, abs=1e-3)
        T = 10
        r = coherent_mac_sum_rate(1.0, 1, 1, T, trials=20000, seed=2)
        assert abs(r.total_rate - (1 - 1 / T) * exact) <= 3 * r.std_error
        assert r.per_user_rate == r.total_rate

    def test_deterministic(self):
        a = coherent_mac_sum_rate(3.0, 4, 2, 8, trials=700, seed=4, threads=1)
        b = coherent_mac_sum_rate(3.0, 4, 2, 8, trials=700, seed=4, threads=4)
        assert a == b
