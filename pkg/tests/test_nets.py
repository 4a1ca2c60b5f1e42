import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalfair.errors import NumericError, StructuralError
from causalfair.nets import (
    GradientSet,
    Layer,
    Network,
    add_gradients,
    backward,
    cross_entropy_with_grad,
    finite_diff_check,
    forward,
    init_network,
    mean_prediction_entropy_with_grad,
    parameters_equal,
    scale_gradients,
    step,
    stepped_lr,
)

from oracles import mp_cross_entropy

# softplus(-1): mean CE of logits (0, 1) when the true class is the second.
CE_TWO_LOGITS = 0.31326168751822283


def tiny_net(seed=0):
    return init_network((3, 4, 2), ("relu", "identity"), seed)


def ce_loss_fn(x, labels):
    def fn(net):
        acts = forward(net, x)
        loss, dlog = cross_entropy_with_grad(acts[-1], labels)
        grads, _ = backward(net, acts, dlog)
        return loss, grads

    return fn


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

class TestStructure:
    def test_layer_validation(self):
        with pytest.raises(StructuralError, match="2-d"):
            Layer(np.zeros(3), np.zeros(3), "relu")
        with pytest.raises(StructuralError, match="bias"):
            Layer(np.zeros((2, 3)), np.zeros(2), "relu")
        with pytest.raises(StructuralError, match="activation"):
            Layer(np.zeros((2, 3)), np.zeros(3), "swish")
        with pytest.raises(StructuralError, match="finite"):
            Layer(np.full((2, 2), np.nan), np.zeros(2), "relu")

    def test_network_width_chaining(self):
        good = Layer(np.zeros((3, 4)), np.zeros(4), "relu")
        bad = Layer(np.zeros((5, 2)), np.zeros(2), "identity")
        with pytest.raises(StructuralError, match="expects width"):
            Network((good, bad))

    def test_dims(self):
        net = tiny_net()
        assert net.dims == (3, 4, 2)
        assert net.in_dim == 3
        assert net.out_dim == 2

    def test_parameters_are_read_only(self):
        net = tiny_net()
        with pytest.raises(ValueError):
            net.layers[0].w[0, 0] = 1.0

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_init_bounds_and_zero_biases(self, seed):
        net = init_network((6, 5, 3), ("tanh", "identity"), seed)
        for layer in net.layers:
            bound = np.sqrt(3.0 / layer.w.shape[0])
            assert np.all(np.abs(layer.w) <= bound)
            assert np.all(layer.b == 0.0)

    def test_init_is_deterministic(self):
        assert parameters_equal(tiny_net(7), tiny_net(7))
        assert not parameters_equal(tiny_net(7), tiny_net(8))

    def test_init_argument_errors(self):
        with pytest.raises(ValueError, match="input and output"):
            init_network((3,), (), 0)
        with pytest.raises(ValueError, match="activations"):
            init_network((3, 2), ("relu", "relu"), 0)


# ---------------------------------------------------------------------------
# forward pass against hand arithmetic
# ---------------------------------------------------------------------------

class TestForward:
    def test_hand_computed_identity_chain(self):
        net = Network(
            (
                Layer([[2.0, 0.0], [0.0, 3.0]], [1.0, -1.0], "identity"),
                Layer([[1.0], [1.0]], [0.5], "identity"),
            )
        )
        acts = forward(net, [[1.0, 1.0]])
        # x W + b = (3, 2); second layer sums and adds 0.5
        assert np.allclose(acts[1], [[3.0, 2.0]])
        assert np.allclose(acts[2], [[5.5]])

    def test_relu_clips_negative_preactivations(self):
        net = Network((Layer([[1.0], [-1.0]], [0.0], "relu"),))
        acts = forward(net, [[0.0, 2.0], [2.0, 0.0]])
        assert np.allclose(acts[1], [[0.0], [2.0]])

    def test_tanh_saturates(self):
        net = Network((Layer([[100.0]], [0.0], "tanh"),))
        assert forward(net, [[1.0]])[1][0, 0] == pytest.approx(1.0)

    def test_batch_width_mismatch(self):
        with pytest.raises(ValueError, match="width"):
            forward(tiny_net(), np.zeros((4, 5)))

    def test_returns_all_activations(self):
        acts = forward(tiny_net(), np.zeros((7, 3)))
        assert len(acts) == 3
        assert acts[0].shape == (7, 3)
        assert acts[-1].shape == (7, 2)


# ---------------------------------------------------------------------------
# gradients against central differences
# ---------------------------------------------------------------------------

class TestGradients:
    @pytest.mark.parametrize("acts", [("relu", "identity"), ("tanh", "identity"), ("tanh", "tanh")])
    def test_backward_matches_finite_differences(self, acts, rng):
        net = init_network((4, 6, 3), acts, 11)
        x = rng.uniform(0.0, 1.0, size=(10, 4))
        labels = rng.integers(0, 3, size=10)
        assert finite_diff_check(net, ce_loss_fn(x, labels)) < 1e-6

    def test_input_gradient_matches_finite_differences(self, rng):
        net = init_network((3, 5, 2), ("relu", "identity"), 4)
        x = rng.uniform(0.2, 0.8, size=(6, 3))
        labels = rng.integers(0, 2, size=6)

        acts = forward(net, x)
        _, dlog = cross_entropy_with_grad(acts[-1], labels)
        _, dx = backward(net, acts, dlog)

        eps = 1e-6
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                for sign in (1.0,):
                    xp = x.copy()
                    xp[i, j] += eps
                    xm = x.copy()
                    xm[i, j] -= eps
                    lp, _ = cross_entropy_with_grad(forward(net, xp)[-1], labels)
                    lm, _ = cross_entropy_with_grad(forward(net, xm)[-1], labels)
                    fd = (lp - lm) / (2 * eps)
                    assert dx[i, j] == pytest.approx(fd, abs=1e-7)

    def test_backward_shape_checks(self):
        net = tiny_net()
        acts = forward(net, np.zeros((2, 3)))
        with pytest.raises(ValueError, match="activation arrays"):
            backward(net, acts[:-1], np.zeros((2, 2)))
        with pytest.raises(ValueError, match="output_grad"):
            backward(net, acts, np.zeros((2, 5)))


class TestStep:
    def test_lr_zero_is_identity(self, rng):
        net = tiny_net()
        grads = GradientSet(
            tuple(rng.normal(size=l.w.shape) for l in net.layers),
            tuple(rng.normal(size=l.b.shape) for l in net.layers),
        )
        assert parameters_equal(step(net, grads, 0.0), net)

    def test_step_is_value_semantic(self, rng):
        net = tiny_net()
        grads = GradientSet(
            tuple(np.ones(l.w.shape) for l in net.layers),
            tuple(np.ones(l.b.shape) for l in net.layers),
        )
        out = step(net, grads, 0.1)
        assert not parameters_equal(out, net)
        # original untouched
        assert parameters_equal(net, tiny_net())
        assert np.allclose(out.layers[0].w, net.layers[0].w - 0.1)

    def test_negative_lr_rejected(self):
        net = tiny_net()
        grads = GradientSet(
            tuple(np.zeros(l.w.shape) for l in net.layers),
            tuple(np.zeros(l.b.shape) for l in net.layers),
        )
        with pytest.raises(ValueError, match="non-negative"):
            step(net, grads, -0.1)

    def test_non_finite_gradients_raise(self):
        net = tiny_net()
        grads = GradientSet(
            tuple(np.full(l.w.shape, np.inf) for l in net.layers),
            tuple(np.zeros(l.b.shape) for l in net.layers),
        )
        with pytest.raises(NumericError, match="non-finite"):
            step(net, grads, 0.1)

    def test_gradient_algebra(self):
        g = GradientSet((np.ones((2, 2)),), (np.ones(2),))
        h = add_gradients(g, scale_gradients(g, 2.0))
        assert np.allclose(h.w[0], 3.0)
        assert np.allclose(h.b[0], 3.0)

    def test_stepped_lr_schedule(self):
        assert stepped_lr(0.1, 5, halve_every=0) == 0.1
        assert stepped_lr(0.1, 0, halve_every=10) == 0.1
        assert stepped_lr(0.1, 10, halve_every=10) == pytest.approx(0.05)
        assert stepped_lr(0.1, 25, halve_every=10) == pytest.approx(0.025)


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

class TestLosses:
    def test_ce_frozen_two_logit_value(self):
        loss, _ = cross_entropy_with_grad([[0.0, 1.0]], np.array([1]))
        assert loss == pytest.approx(CE_TWO_LOGITS, abs=1e-15)

    def test_ce_uniform_logits_equal_log_k(self):
        loss, _ = cross_entropy_with_grad(np.zeros((5, 4)), np.zeros(5, dtype=int))
        assert loss == pytest.approx(np.log(4), abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_ce_matches_high_precision_oracle(self, seed):
        rng = np.random.default_rng(seed)
        logits = rng.normal(size=(6, 3))
        labels = rng.integers(0, 3, size=6)
        loss, _ = cross_entropy_with_grad(logits, labels)
        want = mp_cross_entropy(logits.tolist(), labels.tolist())
        assert loss == pytest.approx(float(want), rel=1e-12)

    def test_ce_gradient_rows_sum_to_zero(self, rng):
        logits = rng.normal(size=(8, 4))
        labels = rng.integers(0, 4, size=8)
        _, grad = cross_entropy_with_grad(logits, labels)
        assert np.allclose(grad.sum(axis=1), 0.0, atol=1e-15)

    def test_ce_is_shift_invariant(self, rng):
        logits = rng.normal(size=(5, 3))
        labels = rng.integers(0, 3, size=5)
        a, _ = cross_entropy_with_grad(logits, labels)
        b, _ = cross_entropy_with_grad(logits + 100.0, labels)
        assert a == pytest.approx(b, rel=1e-12)

    def test_ce_label_validation(self):
        with pytest.raises(ValueError, match="integers"):
            cross_entropy_with_grad(np.zeros((2, 2)), np.array([0.0, 1.0]))
        with pytest.raises(ValueError, match="lie in"):
            cross_entropy_with_grad(np.zeros((2, 2)), np.array([0, 2]))

    def test_entropy_loss_extremes(self):
        h, _ = mean_prediction_entropy_with_grad(np.zeros((3, 2)))
        assert h == pytest.approx(np.log(2), abs=1e-15)
        h, _ = mean_prediction_entropy_with_grad([[0.0, 60.0]])
        assert h == pytest.approx(0.0, abs=1e-12)

    def test_entropy_gradient_matches_finite_differences(self, rng):
        logits = rng.normal(size=(4, 3))
        _, grad = mean_prediction_entropy_with_grad(logits)
        eps = 1e-6
        for i in range(4):
            for j in range(3):
                zp = logits.copy()
                zp[i, j] += eps
                zm = logits.copy()
                zm[i, j] -= eps
                hp, _ = mean_prediction_entropy_with_grad(zp)
                hm, _ = mean_prediction_entropy_with_grad(zm)
                assert grad[i, j] == pytest.approx((hp - hm) / (2 * eps), abs=1e-8)

    def test_entropy_loss_through_network_finite_diff(self, rng):
        net = init_network((3, 4, 2), ("tanh", "identity"), 21)
        x = rng.uniform(0.0, 1.0, size=(6, 3))

        def fn(candidate):
            acts = forward(candidate, x)
            h, dh = mean_prediction_entropy_with_grad(acts[-1])
            grads, _ = backward(candidate, acts, dh)
            return h, grads

        assert finite_diff_check(net, fn) < 1e-6

    def test_finite_diff_check_validates_eps(self):
        with pytest.raises(ValueError, match="eps"):
            finite_diff_check(tiny_net(), ce_loss_fn(np.zeros((1, 3)), np.array([0])), eps=0.0)
