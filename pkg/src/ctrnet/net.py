"""Dense network core shared by the deep models.

Covers forward/backward passes with optional dropout masks, the clamped
cross-entropy loss, elementwise SGD updates, and Bernoulli RBM CD-1 used
for greedy layer-wise pre-training of the upper stack.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ctrnet import kernels
from ctrnet.kernels import PROB_CLAMP

ACT_CODES = {"linear": 0, "tanh": 1, "sigmoid": 2}


@dataclass
class DenseLayer:
    W: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in ACT_CODES:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.W.shape[0] != self.b.shape[0]:
            raise ValueError("bias length does not match weight rows")

    @property
    def act_code(self):
        return ACT_CODES[self.activation]


@dataclass
class MlpStack:
    """Dense layers ending in a single sigmoid output unit."""

    layers: list = field(default_factory=list)

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.W.shape[1] != prev.W.shape[0]:
                raise ValueError("adjacent layer dimensions do not chain")
        out = self.layers[-1]
        if out.W.shape[0] != 1 or out.activation != "sigmoid":
            raise ValueError("output layer must be one sigmoid unit")

    @property
    def input_size(self):
        return self.layers[0].W.shape[1]

    @property
    def hidden_sizes(self):
        return tuple(layer.W.shape[0] for layer in self.layers[:-1])


@dataclass
class DropoutMask:
    """0/1 keep masks for each hidden layer, drawn at keep probability p."""

    masks: list
    keep_prob: float
    input_mask: np.ndarray = None


def make_mlp(input_size, hidden_sizes, activation, rng):
    """Random stack: hidden layers of the given activation, sigmoid output.

    Weights are uniform in +-1/sqrt(fan_in), biases zero.
    """
    layers = []
    fan_in = input_size
    for size in hidden_sizes:
        bound = 1.0 / math.sqrt(fan_in)
        layers.append(DenseLayer(
            W=rng.uniform(-bound, bound, size=(size, fan_in)),
            b=np.zeros(size),
            activation=activation,
        ))
        fan_in = size
    bound = 1.0 / math.sqrt(fan_in)
    layers.append(DenseLayer(
        W=rng.uniform(-bound, bound, size=(1, fan_in)),
        b=np.zeros(1),
        activation="sigmoid",
    ))
    return MlpStack(layers=layers)


def forward(stack, z, mask=None, keep_prob=1.0):
    """Run the stack on z; returns (prediction, per-layer activations).

    With a mask (training) each hidden unit is zeroed or kept as drawn;
    without one (inference) hidden activations are scaled by keep_prob,
    the probability a unit was active during training.
    """
    if z.shape[0] != stack.input_size:
        raise ValueError(f"input size {z.shape[0]} != stack input {stack.input_size}")
    activations = []
    a = z
    last = len(stack.layers) - 1
    for i, layer in enumerate(stack.layers):
        a = kernels.dense_forward(layer.W, layer.b, a, layer.act_code)
        if i < last:
            if mask is not None:
                a = a * mask.masks[i]
            elif keep_prob < 1.0:
                a = a * keep_prob
        activations.append(a)
    return float(a[0]), activations


def cross_entropy(y, p):
    """Clamped cross-entropy of one prediction; always finite, always > 0."""
    p = min(max(p, PROB_CLAMP), 1.0 - PROB_CLAMP)
    return -y * math.log(p) - (1.0 - y) * math.log(1.0 - p)


def backward(stack, activations, z, y, mask=None):
    """Exact gradients of cross_entropy(forward(...)) for every parameter.

    Returns ([(dW, db) per layer], dL/dz). Expects the activations cache
    produced by a forward call with the same mask.
    """
    num = len(stack.layers)
    yhat = activations[-1][0]
    delta = np.array([yhat - y])  # sigmoid + cross-entropy identity
    grads = [None] * num
    d_prev = None
    for i in range(num - 1, -1, -1):
        a_prev = activations[i - 1] if i > 0 else z
        dW, db, d_prev = kernels.dense_backward(stack.layers[i].W, a_prev, delta)
        grads[i] = (dW, db)
        if i > 0:
            if mask is not None:
                d_prev = d_prev * mask.masks[i - 1]
            delta = kernels.activation_grad(
                d_prev, activations[i - 1], stack.layers[i - 1].act_code
            )
    return grads, d_prev


def sgd_step(params, grads, lr, l2=0.0):
    """In-place theta <- theta - lr * (grad + l2 * theta) on each array."""
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    for param, grad in zip(params, grads):
        kernels.sgd_update(param, grad, lr, l2)


def stack_sgd_step(stack, grads, lr, l2=0.0):
    for layer, (dW, db) in zip(stack.layers, grads):
        kernels.sgd_update(layer.W, dW, lr, l2)
        kernels.sgd_update(layer.b, db, lr, l2)


def l2_penalty(arrays):
    """Sum of squared entries over the given parameter arrays."""
    return float(sum(np.sum(np.square(a)) for a in arrays))


def make_dropout_mask(hidden_sizes, keep_prob, rng, input_size=None):
    """Independent Bernoulli(keep_prob) masks, one array per hidden layer.

    input_size adds a mask over the stack input for the configurable
    input-dropout variant.
    """
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError("keep probability must be in (0, 1]")
    masks = [(rng.random(size) < keep_prob).astype(np.float64) for size in hidden_sizes]
    input_mask = None
    if input_size is not None:
        input_mask = (rng.random(input_size) < keep_prob).astype(np.float64)
    return DropoutMask(masks=masks, keep_prob=keep_prob, input_mask=input_mask)


# --- RBM pre-training of the upper stack -------------------------------------

def rbm_cd1_step(W, b_visible, b_hidden, visible, lr, rng):
    """One CD-1 update of a Bernoulli-Bernoulli RBM, in place.

    The hidden state is sampled; the reconstruction and the second hidden
    pass use probabilities. Visible values may be any reals in [0, 1].
    """
    uniforms = rng.random(W.shape[0])
    idx = np.arange(W.shape[1], dtype=np.int64)
    kernels.rbm_cd1_cols(W, b_visible, b_hidden, idx, visible, lr, uniforms)
    return W, b_visible, b_hidden


def rbm_reconstruction(W, b_visible, b_hidden, visible):
    """Deterministic one-pass reconstruction (probabilities, no sampling)."""
    ph = kernels.sigmoid(W @ visible + b_hidden)
    return kernels.sigmoid(W.T @ ph + b_visible)


def _to_unit_interval(a, activation):
    if activation == "tanh":
        return (a + 1.0) / 2.0
    if activation == "sigmoid":
        return a
    return np.clip(a, 0.0, 1.0)


def pretrain_upper_layers(stack, codes, epochs, lr, rng):
    """Greedy layer-wise RBM initialization of the hidden layers, in place.

    codes must already lie in [0, 1]; each subsequent RBM trains on the
    previous layer's deterministic activation probabilities (tanh
    activations rescaled by (a+1)/2). The output layer keeps its random
    initialization. Zero epochs leave the stack untouched.
    """
    codes = np.asarray(codes, dtype=np.float64)
    if codes.ndim != 2 or codes.shape[0] == 0:
        raise ValueError("need a non-empty 2-D array of input codes")
    if np.any(codes < 0.0) or np.any(codes > 1.0):
        raise ValueError("codes must lie in [0, 1]")
    data = codes
    for layer in stack.layers[:-1]:
        b_visible = np.zeros(layer.W.shape[1])
        for _ in range(epochs):
            for i in rng.permutation(data.shape[0]):
                rbm_cd1_step(layer.W, b_visible, layer.b, data[i], lr, rng)
        nxt = np.empty((data.shape[0], layer.W.shape[0]))
        for i in range(data.shape[0]):
            a = kernels.dense_forward(layer.W, layer.b, data[i], layer.act_code)
            nxt[i] = _to_unit_interval(a, layer.activation)
        data = nxt
    return stack
