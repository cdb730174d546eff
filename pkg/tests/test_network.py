"""Forward/backward correctness of the layer kernel.

The backward pass is checked against central finite differences on random
small architectures; probe inputs stay at least 1e-3 away from activation
kinks so the subgradient convention never enters.
"""

import numpy as np
import pytest

from gibbsnn.activations import ActivationParams
from gibbsnn.errors import NumericalError, ShapeError
from gibbsnn.network import (
    Network,
    NetworkSpec,
    act,
    concat_weights,
    conv2d,
    dense,
    flatten,
    maxpool,
    softmax_layer,
    split_weights,
)
from gibbsnn.optim import Adam, SGD
from gibbsnn.presets import build_preset, cnn1, mlp


def _dense_net(n_in, n_out, activation="mmelu", hidden=None):
    layers = []
    prev = n_in
    for h in hidden or ():
        layers += [dense(prev, h), act(activation)]
        prev = h
    layers += [dense(prev, n_out), softmax_layer()]
    return Network(NetworkSpec(layers, (n_in,), n_out))


class TestForward:
    def test_identity_dense_relu(self):
        """W=I, b=0, pure-ReLU blend: logits (1, 0) for input (1, -1)."""
        net = _dense_net(2, 2)
        w = [np.concatenate([np.eye(2).ravel(), np.zeros(2)])]
        p = ActivationParams(c=0.0)
        # insert an activation before softmax: rebuild with explicit layers
        layers = [dense(2, 2), act("mmelu"), softmax_layer()]
        net = Network(NetworkSpec(layers, (2,), 2))
        out = net.forward(w, p, np.array([1.0, -1.0]))
        expect = np.exp([1.0, 0.0])
        expect = expect / expect.sum()
        np.testing.assert_allclose(out, expect, rtol=1e-12)

    def test_zero_weights_uniform_softmax(self):
        for classes in (2, 3, 7):
            net = _dense_net(4, classes, hidden=(5,))
            w = [np.zeros(n) for n in net.weight_lengths]
            out = net.forward(w, ActivationParams(), np.ones(4))
            np.testing.assert_allclose(out, 1.0 / classes, rtol=1e-12)

    def test_softmax_simplex(self):
        rng = np.random.default_rng(0)
        net = _dense_net(3, 4, hidden=(6,))
        w = net.init_weights(rng)
        x = rng.normal(size=(50, 3)) * 5.0
        out = net.forward(w, ActivationParams(c=0.3), x)
        assert np.all(out >= 0)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)

    def test_cnn1_output_shape(self):
        spec, _ = cnn1(input_shape=(28, 28, 1), classes=10)
        net = Network(spec)
        rng = np.random.default_rng(1)
        w = net.init_weights(rng)
        out = net.forward(w, ActivationParams(), rng.uniform(size=(28, 28, 1)))
        assert out.shape == (10,)
        np.testing.assert_allclose(out.sum(), 1.0, atol=1e-12)

    def test_shape_mismatch_names_layer(self):
        net = _dense_net(4, 2)
        w = [np.zeros(n) for n in net.weight_lengths]
        with pytest.raises(ShapeError):
            net.forward(w, ActivationParams(), np.ones(7))

    def test_bad_layer_composition_rejected(self):
        with pytest.raises(ShapeError):
            Network(NetworkSpec([dense(3, 2), dense(3, 2), softmax_layer()], (3,), 2))

    def test_nonfinite_detection(self):
        net = _dense_net(2, 2)
        w = [np.full(n, 1e308) for n in net.weight_lengths]
        with np.errstate(over="ignore"), pytest.raises(NumericalError):
            net.forward(w, ActivationParams(), np.full(2, 1e30))

    def test_forward_deterministic(self):
        rng = np.random.default_rng(5)
        net = _dense_net(3, 2, hidden=(4,))
        w = net.init_weights(rng)
        x = rng.normal(size=(10, 3))
        a = net.forward(w, ActivationParams(c=0.7), x)
        b = net.forward(w, ActivationParams(c=0.7), x)
        assert np.array_equal(a, b)


class TestWeightLayout:
    def test_split_concat_round_trip(self):
        net = _dense_net(3, 2, hidden=(4, 5))
        rng = np.random.default_rng(2)
        w = net.init_weights(rng)
        vec = concat_weights(w)
        assert vec.shape == (net.n_weights,)
        back = split_weights(vec, net.weight_lengths)
        for a, b in zip(w, back):
            np.testing.assert_array_equal(a, b)

    def test_layer_count_excludes_unweighted(self):
        spec, _ = cnn1()
        net = Network(spec)
        # conv, conv, dense, dense carry weights; pool/flatten/act/softmax do not
        assert net.n_layers == sum(
            1 for l in spec.layers if l.kind in ("dense", "conv2d"))


def _fd_grad_w(net, w, p, x, y, loss_kind, h=1e-5):
    out = []
    for li, wl in enumerate(w):
        g = np.zeros_like(wl)
        for j in range(len(wl)):
            wp = [v.copy() for v in w]
            wm = [v.copy() for v in w]
            wp[li][j] += h
            wm[li][j] -= h
            g[j] = (net.loss(wp, p, x, y, loss_kind)
                    - net.loss(wm, p, x, y, loss_kind)) / (2 * h)
        out.append(g)
    return out


class TestBackward:
    def test_zero_net_squared_error_zero_target(self):
        """Linear head, all weights zero, target zero: gradient is zero."""
        net = Network(NetworkSpec([dense(3, 2)], (3,), 2))
        w = [np.zeros(net.weight_lengths[0])]
        grad_w, grad_act, loss = net.backward(
            w, ActivationParams(), np.ones((4, 3)), np.zeros((4, 2)),
            loss_kind="squared-error")
        assert loss == 0.0
        np.testing.assert_array_equal(grad_w[0], 0.0)

    def test_softmax_ce_error_signal(self):
        """With a softmax head the logit gradient is probabilities minus one-hot."""
        net = Network(NetworkSpec([dense(3, 4), softmax_layer()], (3,), 4))
        rng = np.random.default_rng(3)
        w = [rng.normal(size=net.weight_lengths[0]) * 0.3]
        x = rng.normal(size=3)
        y = 2
        probs = net.forward(w, None, x)
        grad_w, _, _ = net.backward(w, None, x, np.array([y]))
        signal = probs.copy()
        signal[y] -= 1.0
        # dense-layer weight gradient is outer(x, signal), bias gradient is signal
        W_grad = grad_w[0][:12].reshape(3, 4)
        b_grad = grad_w[0][12:]
        np.testing.assert_allclose(W_grad, np.outer(x, signal), rtol=1e-10)
        np.testing.assert_allclose(b_grad, signal, rtol=1e-10)

    def test_fd_dense_2_4_2(self):
        rng = np.random.default_rng(4)
        net = _dense_net(2, 2, hidden=(4,))
        w = net.init_weights(rng)
        p = ActivationParams(c=0.47, gamma=0.2, b=1.3)
        x = rng.normal(size=(6, 2)) + 0.1
        y = rng.integers(0, 2, size=6)
        grad_w, _, _ = net.backward(w, p, x, y)
        fd = _fd_grad_w(net, w, p, x, y, "cross-entropy")
        for a, b in zip(grad_w, fd):
            np.testing.assert_allclose(a, b, rtol=2e-5, atol=1e-8)

    @pytest.mark.parametrize("loss_kind", ["cross-entropy", "squared-error"])
    def test_fd_random_nets(self, loss_kind):
        """20 random dense nets: max relative error < 1e-5 against differences."""
        rng = np.random.default_rng(20)
        worst = 0.0
        for trial in range(20):
            n_in = int(rng.integers(2, 5))
            n_hidden = int(rng.integers(2, 6))
            classes = int(rng.integers(2, 4))
            net = _dense_net(n_in, classes, hidden=(n_hidden,))
            w = net.init_weights(rng)
            p = ActivationParams(c=0.42, gamma=0.15, b=1.1)
            x = rng.normal(size=(5, n_in)) * 1.5
            y = rng.integers(0, classes, size=5)
            grad_w, _, _ = net.backward(w, p, x, y, loss_kind=loss_kind)
            fd = _fd_grad_w(net, w, p, x, y, loss_kind)
            got = concat_weights(grad_w)
            want = concat_weights(fd)
            denom = np.maximum(np.abs(want), 1e-4)
            worst = max(worst, float(np.max(np.abs(got - want) / denom)))
        assert worst < 1e-5, f"worst relative error {worst}"

    def test_fd_activation_params(self):
        """Gradient in (c, gamma, b) matches differences; c away from 0.5."""
        rng = np.random.default_rng(6)
        net = _dense_net(3, 2, hidden=(4,))
        w = net.init_weights(rng)
        x = rng.normal(size=(8, 3))
        y = rng.integers(0, 2, size=8)
        h = 1e-6
        for c in (0.23, 0.47, 0.81):
            p = ActivationParams(c=c, gamma=0.1, b=1.2)
            _, grad_act, _ = net.backward(w, p, x, y)
            for name in ("c", "gamma", "b"):
                up = {"c": p.c, "gamma": p.gamma, "b": p.b}
                dn = dict(up)
                up[name] += h
                dn[name] -= h
                fd = (net.loss(w, ActivationParams(**up), x, y)
                      - net.loss(w, ActivationParams(**dn), x, y)) / (2 * h)
                np.testing.assert_allclose(grad_act[name], fd, rtol=1e-4, atol=1e-7,
                                           err_msg=f"c={c} d/d{name}")

    def test_fd_conv_pool_net(self):
        """Small conv + pool + dense stack against finite differences."""
        rng = np.random.default_rng(7)
        layers = [conv2d(2, 1), act("mmelu"), maxpool(), flatten(),
                  dense(8, 2), softmax_layer()]
        net = Network(NetworkSpec(layers, (4, 4, 1), 2))
        w = net.init_weights(rng)
        p = ActivationParams(c=0.47, gamma=0.1, b=1.5)
        x = rng.normal(size=(3, 4, 4, 1))
        y = rng.integers(0, 2, size=3)
        grad_w, _, _ = net.backward(w, p, x, y)
        fd = _fd_grad_w(net, w, p, x, y, "cross-entropy")
        for a, b in zip(grad_w, fd):
            np.testing.assert_allclose(a, b, rtol=5e-5, atol=1e-7)


class TestMaxpool:
    def test_routing_single_winner(self):
        """Each pooling window's gradient lands on exactly one input cell."""
        layers = [maxpool(), flatten(), dense(4, 2), softmax_layer()]
        net = Network(NetworkSpec(layers, (4, 4, 1), 2))
        rng = np.random.default_rng(8)
        w = net.init_weights(rng)
        x = rng.normal(size=(1, 4, 4, 1))
        # distinct values guarantee unique argmax per window
        grad_w, _, _ = net.backward(w, None, x, np.array([1]))
        h = 1e-5
        for i in range(4):
            for j in range(4):
                xp = x.copy()
                xm = x.copy()
                xp[0, i, j, 0] += h
                xm[0, i, j, 0] -= h
                fd = (net.loss(w, None, xp, np.array([1]))
                      - net.loss(w, None, xm, np.array([1]))) / (2 * h)
                win_i, win_j = i // 2, j // 2
                window = x[0, 2 * win_i:2 * win_i + 2, 2 * win_j:2 * win_j + 2, 0]
                is_winner = x[0, i, j, 0] == window.max()
                if not is_winner:
                    assert abs(fd) < 1e-12

    def test_pool_halves_spatial_dims(self):
        layers = [maxpool(), flatten(), dense(2 * 3 * 2, 2), softmax_layer()]
        net = Network(NetworkSpec(layers, (5, 6, 2), 2))
        assert net.layer_shapes[0] == (2, 3, 2)


class TestOptimizers:
    def test_adam_zero_gradient_keeps_weights(self):
        opt = Adam(1e-3)
        w = [np.array([1.0, -2.0, 3.0])]
        out = opt.step(w, [np.zeros(3)])
        np.testing.assert_array_equal(out[0], w[0])

    def test_adam_first_step_magnitude(self):
        """From zeroed moments a unit gradient moves each weight by about lr."""
        opt = Adam(1e-3)
        w = [np.zeros(1)]
        out = opt.step(w, [np.ones(1)])
        np.testing.assert_allclose(abs(out[0][0]), 1e-3, rtol=1e-6)

    def test_adam_constant_gradient_limit(self):
        """With a constant gradient the per-step move approaches lr."""
        opt = Adam(1e-2)
        w = [np.zeros(1)]
        prev = 0.0
        for _ in range(400):
            w = opt.step(w, [np.ones(1)])
        step = prev - w[0][0]
        # sign(g) = 1 so steps settle near lr in magnitude
        last = None
        w = [np.zeros(1)]
        opt = Adam(1e-2)
        for _ in range(400):
            nxt = opt.step(w, [np.ones(1)])
            last = w[0][0] - nxt[0][0]
            w = nxt
        np.testing.assert_allclose(last, 1e-2, rtol=5e-3)

    def test_sgd_step(self):
        opt = SGD(0.1)
        out = opt.step([np.array([1.0])], [np.array([2.0])])
        np.testing.assert_allclose(out[0], np.array([0.8]), rtol=1e-12)


class TestPresets:
    def test_mlp_shapes(self):
        spec, dropout = mlp(10, 3, hidden=(8, 4))
        net = Network(spec)
        assert net.n_layers == 3
        assert net.layer_shapes[-2] == (3,)

    def test_build_preset_names(self):
        for name in ("cnn1", "cnn2", "deep"):
            spec, _ = build_preset(name, (28, 28, 1), 10)
            Network(spec)
        with pytest.raises(Exception):
            build_preset("resnet", (28, 28, 1), 10)

    def test_spec_round_trip(self):
        spec, _ = mlp(6, 2, hidden=(5,))
        again = NetworkSpec.from_dict(spec.to_dict())
        assert again.to_dict() == spec.to_dict()
