import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_joint, h_bits, random_channel, random_gp, random_scheme
from statecoder.bound_eval import (CONSTRAINTS, GP_TERMS, THM1_TERMS, PremiseError, RateReport,
                                   constraint_region, cutset_upper, deterministic_capacity,
                                   deterministic_rate, gp_rate, max_feasible_rate, thm1_rate)
from statecoder.channel_model import AuxScheme, GpAux, StateChannel
from statecoder.itcore import binary_entropy
from statecoder.optimizer import appendix_b_witness

seeds = st.integers(0, 2**32 - 1)
R_GP = 4 / 3 * binary_entropy(0.75) - 2 / 3
I_Y1_S = binary_entropy(0.25) - 0.5


def reference_terms(ch, aux):
    """Three-term bound from loop-built joints and plain entropies of marginals."""
    p1, p2 = brute_joint(ch, aux, 1), brute_joint(ch, aux, 2)
    # axes: s w u v x y
    H = lambda p, keep: h_bits(p.sum(axis=tuple(i for i in range(6) if i not in keep)))
    i_wu_y1 = H(p1, (1, 2)) + H(p1, (5,)) - H(p1, (1, 2, 5))
    i_wu_s = H(p1, (1, 2)) + H(p1, (0,)) - H(p1, (0, 1, 2))
    i_wv_y2 = H(p2, (1, 3)) + H(p2, (5,)) - H(p2, (1, 3, 5))
    i_wv_s = H(p2, (1, 3)) + H(p2, (0,)) - H(p2, (0, 1, 3))
    i_uv_ws = H(p1, (0, 1, 2)) + H(p1, (0, 1, 3)) - H(p1, (0, 1, 2, 3)) - H(p1, (0, 1))
    ta, tb = i_wu_y1 - i_wu_s, i_wv_y2 - i_wv_s
    return ta, tb, 0.5 * (ta + tb - i_uv_ws)


def sample(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng)
    return ch, random_scheme(rng, ch)


class TestRateReport:
    def test_overall_is_min(self):
        r = RateReport({"a": 0.3, "b": -0.1, "c": 0.2})
        assert r.overall == -0.1
        assert r.achievable == 0.0
        assert r.to_dict()["overall"] == -0.1

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            RateReport({"a": float("nan")})
        with pytest.raises(ValueError):
            RateReport({})


class TestGpRate:
    def test_constant_aux(self, ex):
        r = gp_rate(ex, GpAux(np.ones((2, 1)), np.zeros((1, 2), dtype=int)))
        assert r.terms == {GP_TERMS[0]: 0.0, GP_TERMS[1]: 0.0}

    def test_witness(self, ex):
        r = gp_rate(ex, appendix_b_witness())
        for v in r.terms.values():
            assert v == pytest.approx(R_GP, abs=1e-9)

    def test_u_equals_s(self, ex):
        # x = 0 makes Y1 = S and Y2 constant, so the terms are I(S;Yk) - H(S)
        r = gp_rate(ex, GpAux(np.eye(2), np.zeros((2, 2), dtype=int)))
        np.testing.assert_allclose(list(r.terms.values()), [0.0, -1.0], atol=1e-12)
        assert all(v <= 1e-12 for v in r.terms.values())


class TestThreeTermRate:
    def test_section3(self, ex, s3):
        r = thm1_rate(ex, s3)
        assert r.overall == pytest.approx(0.5, abs=1e-12)
        assert tuple(r.terms) == THM1_TERMS

    def test_trivial(self, ex):
        aux = AuxScheme(np.ones((2, 1, 1, 1)), np.zeros((1, 1, 1, 2), dtype=int))
        assert thm1_rate(ex, aux).overall == pytest.approx(0.0, abs=1e-12)

    @given(seeds)
    def test_against_reference(self, seed):
        ch, aux = sample(seed)
        np.testing.assert_allclose(list(thm1_rate(ch, aux).terms.values()),
                                   reference_terms(ch, aux), atol=1e-10)


@settings(max_examples=80)
@given(seeds)
def test_elimination_identity(seed):
    ch, aux = sample(seed)
    assert thm1_rate(ch, aux).overall == pytest.approx(max_feasible_rate(ch, aux), abs=1e-9)


@settings(max_examples=60)
@given(seeds)
def test_gp_is_degenerate_thm1(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng)
    gp = random_gp(rng, ch)
    g = gp_rate(ch, gp)
    t = thm1_rate(ch, gp.as_aux_scheme())
    assert t.overall == pytest.approx(g.overall, abs=1e-12)
    np.testing.assert_allclose(list(t.terms.values())[:2], list(g.terms.values()), atol=1e-12)


@settings(max_examples=60)
@given(seeds)
def test_cutset_dominates(seed):
    ch, aux = sample(seed)
    assert thm1_rate(ch, aux).overall <= cutset_upper(ch, aux.x_given_s(ch.n_inputs)) + 1e-9


class TestConstraintRegion:
    def test_zero_rates_infeasible(self, ex, s3):
        chk = constraint_region(ex, s3, (0, 0, 0, 0))
        assert not chk.feasible
        assert chk.slacks[CONSTRAINTS[3]] == pytest.approx(-I_Y1_S, abs=1e-9)

    def test_margin_point(self, ex, s3):
        chk = constraint_region(ex, s3, (0.43, 0, 0.35, 0.35))
        assert chk.feasible
        assert chk.min_slack == pytest.approx(0.0313, abs=1e-4)
        assert chk.binding in CONSTRAINTS[:2]
        assert chk.slacks[CONSTRAINTS[0]] == pytest.approx(binary_entropy(0.25) - 0.78, abs=1e-12)

    @settings(max_examples=30)
    @given(seeds, st.floats(1e-6, 0.5))
    def test_above_bound_infeasible(self, seed, excess):
        ch, aux = sample(seed)
        R = thm1_rate(ch, aux).overall + excess
        if R < 0:
            return
        rng = np.random.default_rng(seed)
        for _ in range(30):
            T = rng.random(3) * 3
            assert not constraint_region(ch, aux, (R, *T)).feasible

    def test_negative_rates(self, ex, s3):
        with pytest.raises(ValueError):
            constraint_region(ex, s3, (-0.1, 0, 0, 0))


class TestDeterministic:
    def test_uniform(self, ex):
        assert deterministic_rate(ex, np.full((2, 2), 0.5)) == pytest.approx(0.5)
        assert cutset_upper(ex, np.full((2, 2), 0.5)) == pytest.approx(0.5)

    def test_constant_input(self, ex):
        q = np.array([[1.0, 0.0], [1.0, 0.0]])
        assert deterministic_rate(ex, q) == 0.0
        assert cutset_upper(ex, q) == 0.0

    def test_capacity(self, ex):
        cap = deterministic_capacity(ex)
        assert cap.value == pytest.approx(0.5, abs=1e-4)
        np.testing.assert_allclose(cap.x_given_s, 0.5, atol=1e-3)

    def test_noisy_channel_rejected(self):
        ch = random_channel(np.random.default_rng(0), S=2, X=2, Y1=2, Y2=2, sparse=0.0)
        with pytest.raises(PremiseError, match="H\\(Y\\|X,S\\)"):
            deterministic_capacity(ch)

    def test_correlated_outputs_rejected(self):
        # Y1 = Y2 = X: deterministic but I(Y1;Y2|S) = H(X|S) > 0
        t = np.eye(2)[:, None, :]
        ch = StateChannel(np.array([1.0]), t, t)
        with pytest.raises(PremiseError, match="I\\(Y1;Y2\\|S\\)"):
            deterministic_rate(ch, [[0.5, 0.5]])
