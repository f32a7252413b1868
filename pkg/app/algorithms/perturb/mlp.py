"""A small fully connected network with manual backpropagation and Adam."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit

from app.core.exceptions import DimensionMismatchError, InvalidParameterError, StaleCacheError

Activation = Literal["relu", "tanh", "sigmoid", "linear"]

_EPS = 1e-7


def _activate(name: Activation, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return expit(z)
    return z


def _derivative(name: Activation, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a**2
    if name == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: Activation
    dropout: float = 0.0

    @property
    def fan_in(self) -> int:
        return int(self.weights.shape[0])

    @property
    def fan_out(self) -> int:
        return int(self.weights.shape[1])


@dataclass(frozen=True)
class ForwardCache:
    version: int
    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]
    outputs: list[np.ndarray]
    masks: list[np.ndarray | None]


@dataclass(frozen=True)
class Gradients:
    weights: list[np.ndarray]
    bias: list[np.ndarray]
    inputs: np.ndarray


@dataclass
class Mlp:
    """Chain of dense layers; ``version`` advances on every parameter update."""

    layers: list[DenseLayer]
    version: int = 0

    def __post_init__(self) -> None:
        if not self.layers:
            raise InvalidParameterError("An MLP needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.fan_out != nxt.fan_in:
                raise InvalidParameterError(
                    f"Layer dimensions do not chain: {prev.fan_out} -> {nxt.fan_in}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[np.ndarray]:
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.extend((layer.weights, layer.bias))
        return params

    def forward(
        self,
        inputs: np.ndarray,
        *,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[np.ndarray, ForwardCache | None]:
        x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        if x.shape[1] != self.input_dim:
            raise DimensionMismatchError(expected=self.input_dim, received=x.shape[1])
        if training and rng is None and any(layer.dropout > 0 for layer in self.layers):
            raise InvalidParameterError("Training with dropout needs a random generator")

        cache_inputs, pre, outs, masks = [], [], [], []
        for layer in self.layers:
            cache_inputs.append(x)
            z = x @ layer.weights + layer.bias
            a = _activate(layer.activation, z)
            mask = None
            if training and layer.dropout > 0:
                assert rng is not None
                # Inverted dropout keeps the expected activation unchanged.
                mask = (rng.random(a.shape) >= layer.dropout) / (1.0 - layer.dropout)
                a = a * mask
            pre.append(z)
            outs.append(a)
            masks.append(mask)
            x = a
        if not training:
            return x, None
        return x, ForwardCache(self.version, cache_inputs, pre, outs, masks)

    def predict(self, inputs: np.ndarray) -> np.ndarray:
        return self.forward(inputs, training=False)[0]

    def backward(self, cache: ForwardCache, grad_output: np.ndarray) -> Gradients:
        """Reverse-mode gradients of a loss whose output gradient is ``grad_output``."""
        if cache.version != self.version:
            raise StaleCacheError()
        grad = np.asarray(grad_output, dtype=np.float64).reshape(cache.outputs[-1].shape)
        grad_w: list[np.ndarray] = []
        grad_b: list[np.ndarray] = []
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            mask = cache.masks[i]
            if mask is not None:
                grad = grad * mask
                activated = cache.outputs[i] / np.where(mask > 0, mask, 1.0)
            else:
                activated = cache.outputs[i]
            grad = grad * _derivative(layer.activation, cache.pre_activations[i], activated)
            grad_w.append(cache.inputs[i].T @ grad)
            grad_b.append(grad.sum(axis=0))
            grad = grad @ layer.weights.T
        grad_w.reverse()
        grad_b.reverse()
        return Gradients(grad_w, grad_b, grad)


def build_mlp(
    sizes: Sequence[int],
    activations: Sequence[Activation],
    rng: np.random.Generator,
    *,
    dropout: float = 0.0,
) -> Mlp:
    """He-initialized ReLU layers, Xavier-initialized others; dropout after hidden layers."""
    if len(sizes) != len(activations) + 1:
        raise InvalidParameterError("Need one activation per layer")
    layers = []
    last = len(activations) - 1
    for i, activation in enumerate(activations):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        if activation == "relu":
            scale = np.sqrt(2.0 / fan_in)
        else:
            scale = np.sqrt(2.0 / (fan_in + fan_out))
        layers.append(
            DenseLayer(
                weights=rng.normal(0.0, scale, size=(fan_in, fan_out)),
                bias=np.zeros(fan_out),
                activation=activation,
                dropout=dropout if i < last else 0.0,
            )
        )
    return Mlp(layers)


def generator(noise_dim: int, hidden: int, out_dim: int, rng: np.random.Generator, *, dropout: float) -> Mlp:
    return build_mlp([noise_dim, hidden, out_dim], ["relu", "tanh"], rng, dropout=dropout)


def discriminator(in_dim: int, hidden: int, rng: np.random.Generator, *, dropout: float) -> Mlp:
    return build_mlp([in_dim, hidden, 1], ["relu", "sigmoid"], rng, dropout=dropout)


def bce(probabilities: np.ndarray, targets: np.ndarray | float) -> float:
    p = np.clip(np.asarray(probabilities, dtype=np.float64), _EPS, 1.0 - _EPS)
    t = np.broadcast_to(np.asarray(targets, dtype=np.float64), p.shape)
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def bce_gradient(probabilities: np.ndarray, targets: np.ndarray | float) -> np.ndarray:
    """d bce / d probabilities, averaged over all entries."""
    p = np.clip(np.asarray(probabilities, dtype=np.float64), _EPS, 1.0 - _EPS)
    t = np.broadcast_to(np.asarray(targets, dtype=np.float64), p.shape)
    return (p - t) / (p * (1.0 - p)) / p.size


@dataclass
class Adam:
    learning_rate: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    _m: list[np.ndarray] = field(default_factory=list, repr=False)
    _v: list[np.ndarray] = field(default_factory=list, repr=False)

    def step(self, net: Mlp, grads: Gradients) -> None:
        params = net.parameters()
        flat: list[np.ndarray] = []
        for gw, gb in zip(grads.weights, grads.bias, strict=True):
            flat.extend((gw, gb))
        if not self._m:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for param, grad, m, v in zip(params, flat, self._m, self._v, strict=True):
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad**2
            param -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
        net.version += 1
