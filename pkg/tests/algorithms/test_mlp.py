import numpy as np
import pytest

from app.algorithms.perturb.mlp import (
    Adam,
    DenseLayer,
    Mlp,
    bce,
    bce_gradient,
    build_mlp,
    discriminator,
    generator,
)
from app.core.exceptions import DimensionMismatchError, InvalidParameterError, StaleCacheError


def _zeroed(net: Mlp) -> Mlp:
    for param in net.parameters():
        param[...] = 0.0
    return net


def test_zero_weights_give_neutral_outputs() -> None:
    rng = np.random.default_rng(0)
    gen = _zeroed(generator(4, 8, 3, rng, dropout=0.0))
    disc = _zeroed(discriminator(3, 8, rng, dropout=0.0))
    assert np.array_equal(gen.predict(rng.normal(size=(5, 4))), np.zeros((5, 3)))
    assert np.allclose(disc.predict(rng.normal(size=(5, 3))), 0.5)


def test_dropout_only_on_hidden_layers() -> None:
    net = generator(4, 8, 3, np.random.default_rng(0), dropout=0.4)
    assert [layer.dropout for layer in net.layers] == [0.4, 0.0]


def test_layers_must_chain() -> None:
    first = DenseLayer(np.zeros((2, 3)), np.zeros(3), "relu")
    second = DenseLayer(np.zeros((4, 1)), np.zeros(1), "sigmoid")
    with pytest.raises(InvalidParameterError):
        Mlp([first, second])


def test_forward_rejects_wrong_width() -> None:
    net = discriminator(3, 4, np.random.default_rng(0), dropout=0.0)
    with pytest.raises(DimensionMismatchError):
        net.predict(np.zeros((2, 5)))


def test_training_dropout_needs_generator() -> None:
    net = discriminator(3, 4, np.random.default_rng(0), dropout=0.5)
    with pytest.raises(InvalidParameterError):
        net.forward(np.zeros((2, 3)), training=True)


def test_backward_matches_finite_differences() -> None:
    rng = np.random.default_rng(3)
    net = build_mlp([3, 5, 2], ["tanh", "sigmoid"], rng)
    inputs = rng.normal(size=(4, 3))
    weights = rng.normal(size=(4, 2))

    def loss() -> float:
        return float(np.sum(net.predict(inputs) * weights))

    _, cache = net.forward(inputs, training=True)
    assert cache is not None
    grads = net.backward(cache, weights)
    eps = 1e-6
    for layer, grad_w in zip(net.layers, grads.weights, strict=True):
        for index in [(0, 0), (1, 1), (2, 0)]:
            original = layer.weights[index]
            layer.weights[index] = original + eps
            upper = loss()
            layer.weights[index] = original - eps
            lower = loss()
            layer.weights[index] = original
            assert grad_w[index] == pytest.approx((upper - lower) / (2 * eps), abs=1e-6)


def test_input_gradient_matches_finite_differences() -> None:
    rng = np.random.default_rng(5)
    net = build_mlp([2, 4, 1], ["relu", "sigmoid"], rng)
    point = rng.normal(size=(1, 2))
    _, cache = net.forward(point, training=True)
    assert cache is not None
    grads = net.backward(cache, np.ones((1, 1)))
    eps = 1e-6
    for j in range(2):
        step = np.zeros((1, 2))
        step[0, j] = eps
        numeric = (net.predict(point + step) - net.predict(point - step)).item() / (2 * eps)
        assert grads.inputs[0, j] == pytest.approx(numeric, abs=1e-6)


def test_gradients_scale_with_output_gradient() -> None:
    rng = np.random.default_rng(1)
    net = build_mlp([3, 4, 1], ["relu", "sigmoid"], rng)
    _, cache = net.forward(rng.normal(size=(6, 3)), training=True)
    assert cache is not None
    zero = net.backward(cache, np.zeros((6, 1)))
    single = net.backward(cache, np.ones((6, 1)))
    double = net.backward(cache, 2 * np.ones((6, 1)))
    assert all(not g.any() for g in zero.weights + zero.bias)
    for one, two in zip(single.weights + single.bias, double.weights + double.bias, strict=True):
        assert np.allclose(two, 2 * one)


def test_backward_after_update_is_stale() -> None:
    rng = np.random.default_rng(2)
    net = build_mlp([2, 3, 1], ["relu", "sigmoid"], rng)
    _, cache = net.forward(rng.normal(size=(4, 2)), training=True)
    assert cache is not None
    grads = net.backward(cache, np.ones((4, 1)))
    Adam(learning_rate=0.01).step(net, grads)
    assert net.version == 1
    with pytest.raises(StaleCacheError):
        net.backward(cache, np.ones((4, 1)))


def test_adam_descends_a_simple_loss() -> None:
    rng = np.random.default_rng(4)
    net = build_mlp([2, 1], ["sigmoid"], rng)
    inputs = np.array([[1.0, 0.0], [0.0, 1.0]])
    targets = np.array([[1.0], [0.0]])
    optimizer = Adam(learning_rate=0.05)
    start = bce(net.predict(inputs), targets)
    for _ in range(200):
        probs, cache = net.forward(inputs, training=True)
        assert cache is not None
        optimizer.step(net, net.backward(cache, bce_gradient(probs, targets)))
    assert bce(net.predict(inputs), targets) < start


def test_bce_gradient_matches_finite_differences() -> None:
    p = np.array([0.2, 0.7, 0.9])
    targets = np.array([0.0, 1.0, 0.9])
    grad = bce_gradient(p, targets)
    eps = 1e-7
    for i in range(3):
        step = np.zeros(3)
        step[i] = eps
        numeric = (bce(p + step, targets) - bce(p - step, targets)) / (2 * eps)
        assert grad[i] == pytest.approx(numeric, rel=1e-4)
