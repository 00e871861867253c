import numpy as np
import pytest
from hypothesis import given, strategies as st

from statecoder.channel_model import example_channel
from statecoder.itcore import (JointPmf, SequenceTuple, binary_entropy, conditional_table,
                               count_bounds, entropy, entropy_of, is_typical, mutual_information)

seeds = st.integers(0, 2**32 - 1)


def random_pmf(seed, shape=(2, 3, 2)):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    p = np.where(rng.random(shape) < 0.2, 0.0, p)
    if p.sum() == 0:
        p.flat[0] = 1.0
    return JointPmf([("A", shape[0]), ("B", shape[1]), ("C", shape[2])], p / p.sum())


class TestJointPmf:
    def test_rejects_bad_tables(self):
        with pytest.raises(ValueError):
            JointPmf([("A", 2), ("A", 2)], np.full(4, 0.25))
        with pytest.raises(ValueError):
            JointPmf([("A", 2)], [0.5, 0.6])
        with pytest.raises(ValueError):
            JointPmf([("A", 3)], [0.5, 0.5])
        with pytest.raises(ValueError):
            JointPmf([("A", 2)], [1.5, -0.5])

    def test_normalize_on_request(self):
        p = JointPmf([("A", 2)], [2.0, 6.0], normalize=True)
        np.testing.assert_allclose(p.probs, [0.25, 0.75])

    def test_tolerance_is_1e9(self):
        JointPmf([("A", 2)], [0.5, 0.5 + 5e-10])
        with pytest.raises(ValueError):
            JointPmf([("A", 2)], [0.5, 0.5 + 5e-9])

    def test_marginal_respects_requested_order(self):
        p = random_pmf(3)
        ba = p.marginal(["C", "A"])
        assert ba.names == ("C", "A")
        np.testing.assert_allclose(ba.probs, p.probs.sum(axis=1).T)

    def test_immutable(self):
        p = random_pmf(1)
        with pytest.raises(ValueError):
            p.probs[0, 0, 0] = 1.0

    def test_unknown_axis(self):
        with pytest.raises(KeyError):
            entropy(random_pmf(0), "Z")


class TestEntropy:
    def test_reference_values(self):
        assert entropy_of([0.5, 0.5]) == pytest.approx(1.0)
        assert binary_entropy(0.75) == pytest.approx(0.811278, abs=1e-6)
        assert entropy_of([1.0, 0.0]) == 0.0

    @given(seeds)
    def test_chain_rule(self, seed):
        p = random_pmf(seed)
        h_ab = entropy(p, ["A", "B"])
        assert h_ab == pytest.approx(entropy(p, "A") + entropy(p, "B", "A"), abs=1e-9)

    @given(seeds)
    def test_mi_bounds(self, seed):
        p = random_pmf(seed)
        i = mutual_information(p, "A", "B")
        assert -1e-9 <= i <= min(entropy(p, "A"), entropy(p, "B")) + 1e-9
        assert mutual_information(p, "A", "B", "C") >= -1e-9

    @given(seeds)
    def test_mi_symmetric(self, seed):
        p = random_pmf(seed)
        assert mutual_information(p, "A", ["B", "C"]) == pytest.approx(
            mutual_information(p, ["C", "B"], "A"), abs=1e-12)


class TestMutualInformation:
    def test_independent_product(self):
        p = JointPmf([("A", 2), ("B", 3)], np.outer([0.3, 0.7], [0.2, 0.5, 0.3]))
        assert mutual_information(p, "A", "B") == pytest.approx(0.0, abs=1e-12)

    def test_copied_axis(self):
        p = JointPmf([("A", 3), ("B", 3)], np.diag([0.2, 0.3, 0.5]))
        assert mutual_information(p, "A", "B") == pytest.approx(entropy(p, "A"), abs=1e-12)

    def test_example_channel_state_leakage(self):
        j = example_channel().input_joint(np.full((2, 2), 0.5))
        assert mutual_information(j, "Y1", "S") == pytest.approx(binary_entropy(0.25) - 0.5, abs=1e-6)

    def test_overlap_rejected(self):
        p = random_pmf(0)
        with pytest.raises(ValueError):
            mutual_information(p, ["A", "B"], "B")
        with pytest.raises(ValueError):
            mutual_information(p, "A", "B", "A")
        with pytest.raises(KeyError):
            mutual_information(p, "A", "Q")


def test_conditional_table_zero_rows_uniform():
    t = conditional_table(np.array([[1.0, 3.0], [0.0, 0.0]]))
    np.testing.assert_allclose(t, [[0.25, 0.75], [0.5, 0.5]])


class TestTypicality:
    p = JointPmf([("A", 2)], [0.5, 0.5])

    def test_exact_type_always_typical(self):
        q = JointPmf([("A", 2), ("B", 2)], [[0.25, 0.25], [0.5, 0.0]])
        seqs = {"A": [0, 0, 1, 1], "B": [0, 1, 0, 0]}
        for eps in (1e-6, 0.01, 0.5):
            assert is_typical(seqs, q, eps)

    def test_zero_probability_symbol(self):
        q = JointPmf([("A", 2), ("B", 2)], [[0.25, 0.25], [0.5, 0.0]])
        assert not is_typical({"A": [0, 0, 1, 1], "B": [0, 1, 1, 0]}, q, 10.0)

    def test_hand_example(self):
        assert not is_typical({"A": [0, 0, 0, 1]}, self.p, 0.2)
        assert is_typical({"A": [0, 0, 0, 1]}, self.p, 0.5)

    def test_length_mismatch(self):
        q = JointPmf([("A", 2), ("B", 2)], np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            is_typical({"A": [0, 1], "B": [0, 1, 1]}, q, 0.1)
        with pytest.raises(ValueError):
            SequenceTuple({"A": [0, 1], "B": [0]})

    def test_symbol_range(self):
        with pytest.raises(ValueError):
            is_typical({"A": [0, 2]}, self.p, 0.1)

    def test_count_bounds_match_definition(self):
        p = np.array([0.1, 0.25, 0.65, 0.0])
        for n in (1, 7, 24, 100):
            lo, hi = count_bounds(p, n, 0.3)
            for a, pa in enumerate(p):
                ok = [c for c in range(n + 1) if abs(c / n - pa) <= 0.3 * pa + 1e-12]
                if ok:
                    assert (lo[a], hi[a]) == (min(ok), max(ok))
                else:
                    assert lo[a] > hi[a]

    @given(seeds, st.integers(1, 12), st.floats(0.01, 1.0))
    def test_bounds_agree_with_is_typical(self, seed, n, eps):
        rng = np.random.default_rng(seed)
        q = JointPmf([("A", 3)], rng.dirichlet(np.ones(3)))
        seq = rng.integers(3, size=n)
        c = np.bincount(seq, minlength=3)
        direct = all(abs(c[a] / n - q.probs[a]) <= eps * q.probs[a] + 1e-12 for a in range(3))
        assert is_typical({"A": seq}, q, eps) == direct

    def test_typical_fraction_grows_with_n(self):
        rng = np.random.default_rng(11)
        p = JointPmf([("A", 3)], [0.2, 0.3, 0.5])
        fractions = []
        for n in (10, 100, 1000):
            samples = rng.choice(3, size=(1000, n), p=p.probs)
            fractions.append(np.mean([is_typical({"A": row}, p, 0.1) for row in samples]))
        assert fractions[0] < fractions[1] < fractions[2]
        assert fractions[2] > 0.85
