"""Dense feed-forward networks with hand-derived reverse-mode gradients.

Everything runs on 64-bit numpy arrays and plain gradient descent; there is
deliberately no autograd.  A network is an immutable tuple of layers
``(w, b, activation)`` with ``w`` of shape (fan_in, fan_out).  The forward
pass returns every layer output so the backward pass can be driven from any
downstream gradient; the backward pass returns both parameter gradients and
the gradient with respect to the network input, which is what lets losses
flow through frozen networks into upstream ones.

Supported activations and their derivatives (recoverable from the layer
output ``a`` alone):

    relu      max(z, 0)    da/dz = 1[a > 0]
    tanh      tanh(z)      da/dz = 1 - a^2
    identity  z            da/dz = 1

Weights initialise from a uniform law scaled so the per-weight variance is
1/fan_in (bound sqrt(3/fan_in)); biases start at zero.  ``step`` is
value-semantic: it returns a new network and never mutates its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NumericError, StructuralError

ACTIVATIONS = ("relu", "tanh", "identity")


@dataclass(frozen=True)
class Layer:
    w: np.ndarray
    b: np.ndarray
    activation: str

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        b = np.array(self.b, dtype=float)
        if w.ndim != 2:
            raise StructuralError(f"weights must be 2-d, got shape {w.shape}")
        if b.shape != (w.shape[1],):
            raise StructuralError(f"bias shape {b.shape} does not match fan_out {w.shape[1]}")
        if self.activation not in ACTIVATIONS:
            raise StructuralError(f"unknown activation {self.activation!r}, choose from {ACTIVATIONS}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise StructuralError("layer parameters must be finite")
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class Network:
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise StructuralError("network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].w.shape[0] != layers[i - 1].w.shape[1]:
                raise StructuralError(
                    f"layer {i} expects width {layers[i].w.shape[0]} "
                    f"but layer {i - 1} emits {layers[i - 1].w.shape[1]}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0].w.shape[0],) + tuple(l.w.shape[1] for l in self.layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].w.shape[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].w.shape[1]


@dataclass(frozen=True)
class GradientSet:
    """Per-layer gradients congruent with a Network's parameters."""

    w: tuple[np.ndarray, ...]
    b: tuple[np.ndarray, ...]


def init_network(dims: Sequence[int], activations: Sequence[str], seed: int) -> Network:
    """Fresh network with uniform fan-in-scaled weights and zero biases."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError(f"need input and output widths, got dims={dims}")
    if any(d < 1 for d in dims):
        raise ValueError(f"layer widths must be positive, got dims={dims}")
    acts = tuple(activations)
    if len(acts) != len(dims) - 1:
        raise ValueError(f"{len(dims) - 1} layers but {len(acts)} activations")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], acts):
        bound = np.sqrt(3.0 / fan_in)
        layers.append(Layer(rng.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out), act))
    return Network(tuple(layers))


def forward(net: Network, batch) -> list[np.ndarray]:
    """All layer outputs, input first: [x, a_1, ..., a_L]."""
    x = np.asarray(batch, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"batch must be 2-d, got shape {x.shape}")
    if x.shape[1] != net.in_dim:
        raise ValueError(f"batch width {x.shape[1]} does not match network input {net.in_dim}")
    acts = [x]
    for layer in net.layers:
        z = acts[-1] @ layer.w + layer.b
        if layer.activation == "relu":
            a = np.maximum(z, 0.0)
        elif layer.activation == "tanh":
            a = np.tanh(z)
        else:
            a = z
        acts.append(a)
    return acts


def backward(net: Network, activations: list[np.ndarray], output_grad) -> tuple[GradientSet, np.ndarray]:
    """Backpropagate d(loss)/d(output) through the stored activations.

    Returns (parameter gradients, gradient with respect to the input batch).
    """
    if len(activations) != len(net.layers) + 1:
        raise ValueError(f"expected {len(net.layers) + 1} activation arrays, got {len(activations)}")
    delta = np.asarray(output_grad, dtype=float)
    if delta.shape != activations[-1].shape:
        raise ValueError(
            f"output_grad shape {delta.shape} does not match output {activations[-1].shape}"
        )
    gw: list[np.ndarray] = [np.empty(0)] * len(net.layers)
    gb: list[np.ndarray] = [np.empty(0)] * len(net.layers)
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        a = activations[i + 1]
        if layer.activation == "relu":
            dz = delta * (a > 0.0)
        elif layer.activation == "tanh":
            dz = delta * (1.0 - a * a)
        else:
            dz = delta
        gw[i] = activations[i].T @ dz
        gb[i] = dz.sum(axis=0)
        delta = dz @ layer.w.T
    return GradientSet(tuple(gw), tuple(gb)), delta


def step(net: Network, grads: GradientSet, lr: float) -> Network:
    """One gradient-descent update; lr=0 is the identity.  Non-finite
    gradients raise rather than poison the parameters."""
    if lr < 0.0:
        raise ValueError(f"learning rate must be non-negative, got {lr}")
    if len(grads.w) != len(net.layers) or len(grads.b) != len(net.layers):
        raise StructuralError("gradient set does not match network layer count")
    new_layers = []
    for layer, gw, gb in zip(net.layers, grads.w, grads.b):
        if gw.shape != layer.w.shape or gb.shape != layer.b.shape:
            raise StructuralError(
                f"gradient shapes {gw.shape}/{gb.shape} do not match layer {layer.w.shape}/{layer.b.shape}"
            )
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            raise NumericError("non-finite gradient in step")
        new_layers.append(Layer(layer.w - lr * gw, layer.b - lr * gb, layer.activation))
    return Network(tuple(new_layers))


def add_gradients(a: GradientSet, b: GradientSet) -> GradientSet:
    return GradientSet(
        tuple(x + y for x, y in zip(a.w, b.w)),
        tuple(x + y for x, y in zip(a.b, b.b)),
    )


def scale_gradients(g: GradientSet, factor: float) -> GradientSet:
    return GradientSet(tuple(factor * x for x in g.w), tuple(factor * x for x in g.b))


def parameters_equal(a: Network, b: Network) -> bool:
    """Bit-level equality of two networks' parameters and activations."""
    if len(a.layers) != len(b.layers):
        return False
    for la, lb in zip(a.layers, b.layers):
        if la.activation != lb.activation:
            return False
        if not (np.array_equal(la.w, lb.w) and np.array_equal(la.b, lb.b)):
            return False
    return True


def stepped_lr(base_lr: float, epoch: int, halve_every: int = 0) -> float:
    """Optional step decay: halve the rate every `halve_every` epochs (0 = constant)."""
    if halve_every <= 0:
        return base_lr
    return base_lr * 0.5 ** (epoch // halve_every)


# --- losses ------------------------------------------------------------------

def _softmax_and_logp(logits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    denom = ez.sum(axis=1, keepdims=True)
    return ez / denom, z - np.log(denom)


def cross_entropy_with_grad(logits, labels) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy in nats and its gradient w.r.t. the logits."""
    z = np.asarray(logits, dtype=float)
    lab = np.asarray(labels)
    if z.ndim != 2:
        raise ValueError(f"logits must be 2-d, got shape {z.shape}")
    if lab.shape != (z.shape[0],):
        raise ValueError(f"labels shape {lab.shape} does not match batch {z.shape[0]}")
    if lab.dtype.kind not in "iu":
        raise ValueError("labels must be integers")
    if np.any(lab < 0) or np.any(lab >= z.shape[1]):
        raise ValueError(f"labels must lie in [0, {z.shape[1]}), got range "
                         f"[{lab.min()}, {lab.max()}]")
    p, logp = _softmax_and_logp(z)
    n = z.shape[0]
    loss = float(-logp[np.arange(n), lab].mean())
    grad = p.copy()
    grad[np.arange(n), lab] -= 1.0
    return loss, grad / n


def mean_prediction_entropy_with_grad(logits) -> tuple[float, np.ndarray]:
    """Mean per-row entropy of softmax(logits), with gradient w.r.t. the logits.

    d/dz_j of a row entropy H = -sum_k p_k log p_k is -p_j (log p_j + H).
    """
    z = np.asarray(logits, dtype=float)
    if z.ndim != 2:
        raise ValueError(f"logits must be 2-d, got shape {z.shape}")
    p, logp = _softmax_and_logp(z)
    h_rows = -(p * logp).sum(axis=1)
    n = z.shape[0]
    grad = -p * (logp + h_rows[:, None]) / n
    return float(h_rows.mean()), grad


LossFn = Callable[[Network], tuple[float, GradientSet]]


def _shifted(net: Network, layer_idx: int, field: str, index, delta: float) -> Network:
    layers = list(net.layers)
    layer = layers[layer_idx]
    arr = np.array(layer.w if field == "w" else layer.b)
    arr[index] += delta
    if field == "w":
        layers[layer_idx] = Layer(arr, layer.b, layer.activation)
    else:
        layers[layer_idx] = Layer(layer.w, arr, layer.activation)
    return Network(tuple(layers))


def finite_diff_check(net: Network, loss_fn: LossFn, eps: float = 1e-5) -> float:
    """Worst relative error between analytic and central-difference gradients.

    Relative error uses max(|analytic|, |numeric|, 1e-8) as the denominator so
    near-zero coordinates do not blow up the ratio.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    _, grads = loss_fn(net)
    worst = 0.0
    for li in range(len(net.layers)):
        for field, ga in (("w", grads.w[li]), ("b", grads.b[li])):
            for index in np.ndindex(ga.shape):
                lp, _ = loss_fn(_shifted(net, li, field, index, eps))
                lm, _ = loss_fn(_shifted(net, li, field, index, -eps))
                fd = (lp - lm) / (2.0 * eps)
                denom = max(abs(float(ga[index])), abs(fd), 1e-8)
                worst = max(worst, abs(float(ga[index]) - fd) / denom)
    return worst
