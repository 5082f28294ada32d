import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_uplink.model import DomainError, rate_mrc, rate_zf
from mimo_uplink.power import (
    PowerRow,
    UnachievableRateError,
    power_sweep,
    required_power_asymptotic,
    required_power_exact,
    target_rho_for_rate,
)
from mimo_uplink.split import optimal_split_grid


def rate_at(P, M, K, T, receiver):
    """Oracle: rebuild the rate from the grid split and the closed-form bound."""
    rho = optimal_split_grid(P, T, K).rho_star
    fn = rate_mrc if receiver == "mrc" else rate_zf
    return fn(rho, M, K, T).per_user_rate


class TestTargetRho:
    @pytest.mark.parametrize("R,K,T,expected", [(0.0, 2, 10, 0.0), (0.8, 2, 10, 1.0), (1.0, 2, 4, 3.0)])
    def test_values(self, R, K, T, expected):
        assert target_rho_for_rate(R, K, T) == pytest.approx(expected, rel=1e-15, abs=1e-15)

    @given(st.floats(0, 20), st.integers(1, 10), st.integers(1, 50))
    def test_inversion(self, R, K, extra):
        T = K + extra
        rho = target_rho_for_rate(R, K, T)
        assert (1 - K / T) * math.log2(1 + rho) == pytest.approx(R, rel=1e-12, abs=1e-15)

    def test_errors(self):
        with pytest.raises(DomainError):
            target_rho_for_rate(-1.0, 2, 10)
        with pytest.raises(DomainError):
            target_rho_for_rate(1.0, 4, 4)


class TestAsymptotic:
    def test_zero_target(self):
        assert required_power_asymptotic(0.0, 100, 2, 10).P_required == 0.0

    def test_values(self):
        a = required_power_asymptotic(1.0, 100, 2, 10)
        b = required_power_asymptotic(1.0, 400, 2, 10)
        assert a.P_required == pytest.approx(math.sqrt(32 / 1e4), rel=1e-15)
        assert a.P_required == pytest.approx(0.0565685, abs=1e-7)
        assert b.P_required == pytest.approx(0.0282843, abs=1e-7)
        assert a.method == "asymptotic"

    @given(st.floats(1e-6, 1e3), st.integers(1, 10**5), st.integers(1, 8), st.integers(1, 100))
    def test_quartering_halves(self, rho0, M, K, extra):
        T = K + extra
        a = required_power_asymptotic(rho0, M, K, T).P_required
        b = required_power_asymptotic(rho0, 4 * M, K, T).P_required
        assert b == pytest.approx(a / 2, rel=1e-15)

    def test_coherence_scaling(self):
        a = required_power_asymptotic(1.0, 100, 2, 1000).P_required
        b = required_power_asymptotic(1.0, 100, 2, 4000).P_required
        assert b / a == pytest.approx(0.5, rel=0.02)


class TestExact:
    @pytest.mark.parametrize("receiver", ["mrc", "zf"])
    @pytest.mark.parametrize("R,M", [(0.8, 100), (0.3, 40), (2.0, 16)])
    def test_reproduces_rate(self, receiver, R, M):
        K, T = 2, 10
        res = required_power_exact(R, M, K, T, receiver)
        assert res.method == "exact_bisection" and res.target_rate == R
        assert abs(res.achieved_rate - R) <= 1e-9 * R
        assert rate_at(res.P_required, M, K, T, receiver) == pytest.approx(R, rel=1e-9)

    def test_small_target_small_power(self):
        powers = [required_power_exact(R, 100, 2, 10).P_required for R in (1e-2, 1e-4, 1e-6)]
        assert powers[0] > powers[1] > powers[2]
        assert powers[-1] < 1e-3

    def test_ratio_to_asymptote_shrinks(self):
        # measured ratios: 1.2008, 1.0939, 1.0455, 1.0179 (the gap is O(P T))
        rho0 = target_rho_for_rate(0.8, 2, 10)
        ratios = [required_power_exact(0.8, M, 2, 10).P_required
                  / required_power_asymptotic(rho0, M, 2, 10).P_required for M in (100, 400, 1600, 10**4)]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))
        assert ratios[0] == pytest.approx(1.2008, abs=1e-3)
        assert ratios[-1] == pytest.approx(1.0179, abs=1e-3)

    @pytest.mark.parametrize("R", [0.1, 0.5, 0.8])
    def test_mrc_zf_converge(self, R):
        mrc = required_power_exact(R, 10**4, 8, 40, "mrc").P_required
        zf = required_power_exact(R, 10**4, 8, 40, "zf").P_required
        assert abs(mrc / zf - 1) <= 1e-3

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.01, 0.5), st.integers(9, 200))
    def test_mrc_needs_no_more_power_at_low_rate(self, R, M):
        # rho0 < 1 here, where the MRC bound is at least the ZF bound
        mrc = required_power_exact(R, M, 8, 40, "mrc").P_required
        zf = required_power_exact(R, M, 8, 40, "zf").P_required
        assert mrc <= zf * (1 + 1e-9)

    def test_unachievable(self):
        with pytest.raises(UnachievableRateError):
            required_power_exact(1e3, 100, 2, 10)

    @pytest.mark.parametrize("args", [(0.0, 100, 2, 10, "mrc"), (1.0, 2, 2, 10, "zf"),
                                      (1.0, 1, 2, 10, "mrc"), (1.0, 100, 2, 10, "mmse"),
                                      (1.0, 100, 10, 10, "mrc")])
    def test_domain_errors(self, args):
        with pytest.raises(DomainError):
            required_power_exact(*args)


class TestSweep:
    def test_table(self):
        rows = power_sweep(0.8, 2, 10, "mrc", [100, 400, 1600])
        assert [r.M for r in rows] == [100, 400, 1600]
        asym = [r.P_asymptotic for r in rows]
        assert asym[1] == pytest.approx(asym[0] / 2, rel=1e-15)
        assert asym[2] == pytest.approx(asym[1] / 2, rel=1e-15)
        ratios = [r.ratio for r in rows]
        assert all(r > 1 for r in ratios)
        assert ratios[0] > ratios[1] > ratios[2]
        assert all(r.error is None and r.ratio == r.P_exact / r.P_asymptotic for r in rows)

    def test_empty(self):
        assert power_sweep(0.8, 2, 10, "mrc", []) == []

    def test_threads_keep_order_and_values(self):
        ms = [10, 50, 100, 400]
        assert power_sweep(0.8, 2, 10, "zf", ms, threads=4) == power_sweep(0.8, 2, 10, "zf", ms)

    def test_row_errors_are_reported(self):
        rows = power_sweep(50.0, 2, 10, "mrc", [3, 100])
        assert all(isinstance(r, PowerRow) for r in rows)
        assert rows[0].P_exact is None and rows[0].ratio is None and rows[0].error
        assert rows[0].P_asymptotic > 0

    @pytest.mark.parametrize("ms", [[100, 100], [400, 100], [2, 100]])
    def test_bad_inputs(self, ms):
        with pytest.raises(DomainError):
            power_sweep(0.8, 2, 10, "mrc", ms)
