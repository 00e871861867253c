import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statecoder.gaussian_dpc import (GaussianCompound, branch_rate, costa_coefficient, dpc_auxiliary,
                                     gaussian_capacity, grid_power_split, optimize_power_split, report)


class TestParams:
    @pytest.mark.parametrize("kw", [dict(alpha=0.0), dict(alpha=1.0), dict(g1=0.0),
                                    dict(Q0=-1.0), dict(P=0.0)])
    def test_invalid(self, kw):
        base = dict(alpha=0.5, g1=1.0, g2=1.0, Q0=1.0, Q1=1.0, P=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            GaussianCompound(**base)


class TestBranchRate:
    def test_silent_branch(self):
        p = GaussianCompound(0.5, 1, 1, P=1)
        assert branch_rate(p, 0.0, 2.0).rate == 0.0

    def test_symmetric(self):
        r = branch_rate(GaussianCompound(0.5, 1, 1, P=1), 1.0, 1.0)
        assert r.rate == pytest.approx(0.25)
        assert gaussian_capacity(1.0) == pytest.approx(0.5)

    def test_power_constraint(self):
        p = GaussianCompound(0.3, 1, 2, P=1)
        with pytest.raises(ValueError, match="power"):
            branch_rate(p, 1.0, 1.0 + 1e-6)
        branch_rate(p, 1.0, 1.0 + 1e-10)
        with pytest.raises(ValueError):
            branch_rate(p, -0.1, 1.0)

    def test_scaled_single_channel_rates(self):
        p = GaussianCompound(0.3, 0.7, 2.0, P=2.0)
        r = branch_rate(p, 4.0, (2.0 - 1.2) / 0.7)
        assert r.rate1 == pytest.approx(0.3 * dpc_auxiliary(0.7, 4.0, 1.0).rate, abs=1e-12)
        assert r.rate2 == pytest.approx(0.7 * dpc_auxiliary(2.0, 0.8 / 0.7, 1.0).rate, abs=1e-12)


class TestOptimizer:
    def test_symmetric(self):
        for g, P in ((1.0, 1.0), (2.0, 3.0), (0.5, 0.2)):
            s = optimize_power_split(GaussianCompound(0.5, g, g, P=P))
            assert s.P1 == pytest.approx(P, abs=1e-9) and s.P2 == pytest.approx(P, abs=1e-9)
            assert s.rate == pytest.approx(0.5 * gaussian_capacity(g * g * P), abs=1e-9)

    def test_asymmetric_closed_form(self):
        # 4 P1 = P2 and P1 + P2 = 2
        s = optimize_power_split(GaussianCompound(0.5, 2, 1, P=1))
        assert s.P1 == pytest.approx(0.4, abs=1e-9)
        assert s.rate == pytest.approx(0.25 * math.log2(2.6), abs=1e-12)

    @settings(max_examples=10)
    @given(st.floats(0.05, 0.95), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.1, 5))
    def test_grid_oracle(self, alpha, g1, g2, P):
        params = GaussianCompound(alpha, g1, g2, P=P)
        s = optimize_power_split(params)
        _, grid_rate = grid_power_split(params, step=1e-6 * max(1.0, P / alpha) / 4)
        assert s.rate >= grid_rate - 1e-12
        assert s.rate == pytest.approx(grid_rate, abs=1e-5)
        assert abs(s.rate1 - s.rate2) <= 1e-6
        assert params.alpha * s.P1 + params.alpha_bar * s.P2 == pytest.approx(P, abs=1e-9)

    def test_monotone_in_power(self):
        rates = [optimize_power_split(GaussianCompound(0.3, 1.5, 0.8, P=P)).rate
                 for P in np.linspace(0.1, 10, 40)]
        assert np.all(np.diff(rates) > 0)

    def test_split_rate_below_branch_values(self):
        p = GaussianCompound(0.4, 1.2, 0.6, P=2)
        s = optimize_power_split(p)
        assert s.rate <= 0.4 * gaussian_capacity(1.44 * s.P1) + 1e-15


class TestDpc:
    def test_unit(self):
        c = dpc_auxiliary(1, 1, 1)
        assert c.coefficient == pytest.approx(0.5)
        assert c.rate == pytest.approx(0.5, abs=1e-12)

    def test_second_example(self):
        c = dpc_auxiliary(1, 3, 2)
        assert c.coefficient == pytest.approx(0.75)
        assert c.rate == pytest.approx(1.0, abs=1e-12)

    def test_no_interference(self):
        for a in (0.0, 0.3, 2.0):
            assert dpc_auxiliary(1.7, 2.0, 0.0, a=a).rate == pytest.approx(gaussian_capacity(1.7**2 * 2))

    def test_coefficient_is_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            g = rng.uniform(0.1, 4) * rng.choice([-1, 1])
            Pk, Q = rng.uniform(0.01, 20), rng.uniform(0.0, 20)
            c = dpc_auxiliary(g, Pk, Q)
            assert c.error <= 1e-9

    def test_coefficient_is_optimal(self):
        g, Pk, Q = 2.5, 0.7, 3.0
        best = dpc_auxiliary(g, Pk, Q).rate
        for a in np.linspace(-1, 2, 61):
            assert dpc_auxiliary(g, Pk, Q, a=a).rate <= best + 1e-12
        # the square-gain variant misses the target when g != 1
        assert dpc_auxiliary(g, Pk, Q, a=g * g * Pk / (1 + g * g * Pk)).error > 0.1
        assert costa_coefficient(1.0, 3.0) == pytest.approx(0.75)

    def test_invalid(self):
        with pytest.raises(ValueError):
            dpc_auxiliary(1, 0, 1)


def test_report_round_trip():
    r = report(GaussianCompound(0.5, 2, 1, Q0=0.5, Q1=2.0, P=1))
    assert r["params"]["Q1"] == 2.0
    for chk in r["dpc"]:
        assert chk["rate"] == pytest.approx(chk["target"], abs=1e-9)
