import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalfair.errors import StructuralError
from causalfair.scm import (
    DiscreteSCM,
    JointTable,
    PathSelector,
    direct_effect,
    indirect_effect,
    joint_distribution,
    positive_class_effect,
    random_scm,
    sample,
    total_causal_effect,
)

from conftest import FIXTURE_P_H_X, FIXTURE_P_S, FIXTURE_P_X_YS, FIXTURE_P_Y_S
from oracles import bf_arm, bf_de, bf_ie, bf_joint, bf_marginal, bf_tce

# Frozen expectations for the shared fixture model, computed by exhaustive
# pure-Python enumeration (tests/oracles.py).
FIXTURE_TCE = [-0.294, 0.294]
FIXTURE_DE = [-0.231, 0.231]
FIXTURE_IE = [-0.063, 0.063]


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

class TestDiscreteSCM:
    def test_tables_are_read_only(self, fixture_scm):
        with pytest.raises(ValueError):
            fixture_scm.p_s[0] = 0.9

    def test_cardinalities(self, fixture_scm):
        assert (fixture_scm.card_s, fixture_scm.card_y) == (2, 2)
        assert (fixture_scm.card_x, fixture_scm.card_yhat) == (2, 2)

    def test_rejects_non_normalised_rows(self):
        with pytest.raises(StructuralError, match="sum to 1"):
            DiscreteSCM(
                p_s=[0.5, 0.6],
                p_y_given_s=FIXTURE_P_Y_S,
                p_x_given_ys=FIXTURE_P_X_YS,
                p_yhat_given_x=FIXTURE_P_H_X,
            )

    def test_rejects_negative_entries(self):
        with pytest.raises(StructuralError, match="outside"):
            DiscreteSCM(
                p_s=[-0.5, 1.5],
                p_y_given_s=FIXTURE_P_Y_S,
                p_x_given_ys=FIXTURE_P_X_YS,
                p_yhat_given_x=FIXTURE_P_H_X,
            )

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(StructuralError, match="p_s"):
            DiscreteSCM(
                p_s=[0.2, 0.3, 0.5],
                p_y_given_s=FIXTURE_P_Y_S,
                p_x_given_ys=FIXTURE_P_X_YS,
                p_yhat_given_x=FIXTURE_P_H_X,
            )

    def test_rejects_mismatched_feature_rows(self):
        with pytest.raises(StructuralError, match="feature rows"):
            DiscreteSCM(
                p_s=FIXTURE_P_S,
                p_y_given_s=FIXTURE_P_Y_S,
                p_x_given_ys=FIXTURE_P_X_YS,
                p_yhat_given_x=[[0.8, 0.2], [0.1, 0.9], [0.5, 0.5]],
            )

    def test_rejects_oversized_cardinality(self):
        with pytest.raises(StructuralError, match="cap"):
            DiscreteSCM(
                p_s=[0.5, 0.5],
                p_y_given_s=FIXTURE_P_Y_S,
                p_x_given_ys=np.full((2, 2, 65), 1 / 65),
                p_yhat_given_x=np.full((65, 2), 0.5),
            )
        with pytest.raises(ValueError, match="cardinality"):
            random_scm(0, cards=(2, 2, 65, 2))


class TestJointTable:
    def test_mass_violation_rejected(self):
        with pytest.raises(StructuralError, match="mass"):
            JointTable(("a", "b"), [[0.5, 0.5], [0.5, 0.5]])

    def test_duplicate_names_rejected(self):
        with pytest.raises(StructuralError, match="duplicate"):
            JointTable(("a", "a"), [[0.5, 0.0], [0.0, 0.5]])

    def test_marginal_preserves_requested_order(self, fixture_scm):
        j = joint_distribution(fixture_scm)
        forward = j.marginal("s", "x").probs
        flipped = j.marginal("x", "s").probs
        assert np.allclose(forward, flipped.T)

    def test_marginal_unknown_name(self, fixture_scm):
        with pytest.raises(ValueError, match="unknown variable"):
            joint_distribution(fixture_scm).marginal("z")

    def test_marginal_matches_enumeration(self, fixture_scm):
        j = joint_distribution(fixture_scm)
        oracle = bf_marginal(
            bf_joint(FIXTURE_P_S, FIXTURE_P_Y_S, FIXTURE_P_X_YS, FIXTURE_P_H_X),
            (0, 3),
        )
        got = j.marginal("s", "yhat").probs
        for (s, h), p in oracle.items():
            assert got[s, h] == pytest.approx(p, abs=1e-15)


# ---------------------------------------------------------------------------
# effects against the enumeration oracle
# ---------------------------------------------------------------------------

class TestEffects:
    def test_fixture_tce(self, fixture_scm):
        got = total_causal_effect(fixture_scm, 1, 0)
        assert np.allclose(got, FIXTURE_TCE, atol=1e-12)

    def test_fixture_de(self, fixture_scm):
        got = direct_effect(fixture_scm, PathSelector(1, 0), 0)
        assert np.allclose(got, FIXTURE_DE, atol=1e-12)

    def test_fixture_ie(self, fixture_scm):
        got = indirect_effect(fixture_scm, 1, 0)
        assert np.allclose(got, FIXTURE_IE, atol=1e-12)

    def test_selector_must_hold_reference_arm(self, fixture_scm):
        with pytest.raises(ValueError, match="indirect"):
            direct_effect(fixture_scm, PathSelector(1, 1), 0)

    def test_out_of_range_value(self, fixture_scm):
        with pytest.raises(ValueError, match="outside"):
            total_causal_effect(fixture_scm, 2, 0)

    def test_positive_class_effect(self, fixture_scm):
        tce = total_causal_effect(fixture_scm, 1, 0)
        assert positive_class_effect(tce) == pytest.approx(0.294, abs=1e-12)

    def test_positive_class_effect_rejects_nonbinary(self):
        with pytest.raises(ValueError, match="binary"):
            positive_class_effect([0.1, -0.2, 0.1])

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_scm_matches_oracle(self, seed):
        scm = random_scm(seed)
        p_y_s = scm.p_y_given_s.tolist()
        p_x_ys = scm.p_x_given_ys.tolist()
        p_h_x = scm.p_yhat_given_x.tolist()
        assert np.allclose(
            total_causal_effect(scm, 1, 0), bf_tce(p_y_s, p_x_ys, p_h_x, 1, 0), atol=1e-14
        )
        assert np.allclose(
            direct_effect(scm, PathSelector(1, 0), 0),
            bf_de(p_y_s, p_x_ys, p_h_x, 1, 0),
            atol=1e-14,
        )
        assert np.allclose(
            indirect_effect(scm, 1, 0), bf_ie(p_y_s, p_x_ys, p_h_x, 1, 0), atol=1e-14
        )

    @settings(max_examples=300, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        cards=st.tuples(*[st.integers(2, 5)] * 4),
    )
    def test_decomposition_is_exact(self, seed, cards):
        scm = random_scm(seed, cards)
        tce = total_causal_effect(scm, 1, 0)
        de = direct_effect(scm, PathSelector(1, 0), 0)
        ie = indirect_effect(scm, 1, 0)
        assert np.abs(de + ie - tce).max() < 1e-12

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), cards=st.tuples(*[st.integers(2, 4)] * 4))
    def test_effect_vectors_sum_to_zero(self, seed, cards):
        scm = random_scm(seed, cards)
        for eff in (
            total_causal_effect(scm, 1, 0),
            direct_effect(scm, PathSelector(1, 0), 0),
            indirect_effect(scm, 1, 0),
        ):
            assert abs(eff.sum()) < 1e-12
            assert np.all(np.abs(eff) <= 1.0 + 1e-12)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_same_arm_gives_zero_effect(self, seed):
        scm = random_scm(seed)
        assert np.all(total_causal_effect(scm, 1, 1) == 0.0)
        assert np.all(direct_effect(scm, PathSelector(0, 0), 0) == 0.0)


# ---------------------------------------------------------------------------
# joint distribution and sampling
# ---------------------------------------------------------------------------

class TestJointAndSampling:
    def test_joint_matches_enumeration(self, fixture_scm):
        j = joint_distribution(fixture_scm)
        oracle = bf_joint(FIXTURE_P_S, FIXTURE_P_Y_S, FIXTURE_P_X_YS, FIXTURE_P_H_X)
        for (s, y, x, h), p in oracle.items():
            assert j.probs[s, y, x, h] == pytest.approx(p, abs=1e-15)

    def test_joint_mass_is_one(self, fixture_scm):
        assert joint_distribution(fixture_scm).probs.sum() == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), cards=st.tuples(*[st.integers(2, 4)] * 4))
    def test_interventional_arm_matches_oracle(self, seed, cards):
        scm = random_scm(seed, cards)
        for s_val in range(scm.card_s):
            oracle = bf_arm(
                scm.p_y_given_s.tolist(),
                scm.p_x_given_ys.tolist(),
                scm.p_yhat_given_x.tolist(),
                s_val,
                s_val,
            )
            base = total_causal_effect(scm, s_val, 0) + bf_arm(
                scm.p_y_given_s.tolist(),
                scm.p_x_given_ys.tolist(),
                scm.p_yhat_given_x.tolist(),
                0,
                0,
            )
            assert np.allclose(base, oracle, atol=1e-13)

    def test_sampling_is_deterministic(self, fixture_scm):
        a = sample(fixture_scm, 500, seed=7)
        b = sample(fixture_scm, 500, seed=7)
        assert np.array_equal(a.s, b.s)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.yhat, b.yhat)

    def test_sampling_converges_to_marginals(self, fixture_scm):
        n = 200_000
        batch = sample(fixture_scm, n, seed=11)
        j = joint_distribution(fixture_scm)
        p_y1 = j.marginal("y").probs[1]
        p_h1 = j.marginal("yhat").probs[1]
        # three standard errors of a Bernoulli mean
        for got, want in ((batch.y.mean(), p_y1), (batch.yhat.mean(), p_h1)):
            se = np.sqrt(want * (1 - want) / n)
            assert abs(got - want) < 3.5 * se

    def test_sample_rejects_empty(self, fixture_scm):
        with pytest.raises(ValueError, match="positive"):
            sample(fixture_scm, 0, seed=0)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_sampled_values_in_range(self, seed):
        scm = random_scm(seed, cards=(3, 2, 4, 2))
        batch = sample(scm, 200, seed=seed)
        assert batch.s.min() >= 0 and batch.s.max() < 3
        assert batch.y.min() >= 0 and batch.y.max() < 2
        assert batch.x.min() >= 0 and batch.x.max() < 4
        assert batch.yhat.min() >= 0 and batch.yhat.max() < 2
