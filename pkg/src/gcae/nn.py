"""Differentiable building blocks with hand-derived backward passes.

Layers follow one protocol: ``forward(x, train=False, rng=None) -> (y, cache)``
and ``backward(grad_y, cache) -> (grad_x, [param_grads])``, with ``params()``
listing the trainable tensors in the same order the gradients come back.
Inputs may be a single sample or a leading-batch-axis stack; caches are
explicit so a forward/backward pair can never silently mix state.

Everything is float64.  Gradient correctness is enforced by
:func:`gradient_check`, which compares every analytic parameter gradient
against central finite differences.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InvalidRateError,
    MissingCacheError,
    ShapeMismatchError,
)

__all__ = [
    "GraphConvLayer",
    "DenseLayer",
    "FlattenLayer",
    "DropoutLayer",
    "DropoutSpec",
    "dropout_apply",
    "mse_loss",
    "l2_penalty",
    "AdamState",
    "init_adam",
    "adam_step",
    "SequentialNet",
    "gradient_check",
    "glorot_uniform",
]

_ACTIVATIONS = ("relu", "identity")


def _activate(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _activate_grad(name, z):
    # relu derivative taken as 0 at z == 0
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


def _check_activation(name):
    if name not in _ACTIVATIONS:
        raise ValueError(f"activation must be one of {_ACTIVATIONS}, got {name!r}")


def glorot_uniform(fan_in, fan_out, rng) -> np.ndarray:
    """Uniform init on +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class GraphConvLayer:
    """Graph convolution y = act(A_ren @ x @ theta).

    ``x`` has shape (N, C_in) or (B, N, C_in); the fixed symmetric operator
    ``a_tilde`` mixes vertices, ``theta`` mixes channels.  No bias.
    """

    def __init__(self, a_tilde, theta, activation="relu"):
        a_tilde = np.asarray(a_tilde, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        if a_tilde.ndim != 2 or a_tilde.shape[0] != a_tilde.shape[1]:
            raise ShapeMismatchError(f"a_tilde must be square, got {a_tilde.shape}")
        if np.abs(a_tilde - a_tilde.T).max(initial=0.0) > 1e-12:
            raise ShapeMismatchError("a_tilde must be symmetric")
        if theta.ndim != 2 or not np.all(np.isfinite(theta)):
            raise ShapeMismatchError("theta must be a finite 2-d matrix")
        _check_activation(activation)
        self.a_tilde = a_tilde
        self.theta = theta
        self.activation = activation

    def params(self):
        return [self.theta]

    def set_params(self, tensors):
        (self.theta,) = tensors

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        n = self.a_tilde.shape[0]
        if x.ndim not in (2, 3) or x.shape[-2] != n or x.shape[-1] != self.theta.shape[0]:
            raise ShapeMismatchError(
                f"input {x.shape} does not match n={n}, c_in={self.theta.shape[0]}"
            )
        ax = self.a_tilde @ x
        pre = ax @ self.theta
        return _activate(self.activation, pre), (ax, pre)

    def backward(self, grad_y, cache):
        if cache is None:
            raise MissingCacheError("graph conv backward needs the forward cache")
        ax, pre = cache
        grad_y = np.asarray(grad_y, dtype=np.float64)
        if grad_y.shape != pre.shape:
            raise ShapeMismatchError(f"grad {grad_y.shape} != forward output {pre.shape}")
        g = grad_y * _activate_grad(self.activation, pre)
        if ax.ndim == 2:
            grad_theta = ax.T @ g
        else:
            grad_theta = np.einsum("bnc,bnd->cd", ax, g)
        grad_x = self.a_tilde.T @ (g @ self.theta.T)
        return grad_x, [grad_theta]


class DenseLayer:
    """Affine layer y = act(x @ W + b) for vectors or row-stacked batches."""

    def __init__(self, weights, bias, activation="relu"):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.shape != (weights.shape[1],):
            raise ShapeMismatchError(
                f"weights {weights.shape} / bias {bias.shape} do not conform"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise ShapeMismatchError("parameters must be finite")
        _check_activation(activation)
        self.weights = weights
        self.bias = bias
        self.activation = activation

    def params(self):
        return [self.weights, self.bias]

    def set_params(self, tensors):
        self.weights, self.bias = tensors

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim not in (1, 2) or x.shape[-1] != self.weights.shape[0]:
            raise ShapeMismatchError(
                f"input {x.shape} does not match in-dim {self.weights.shape[0]}"
            )
        pre = x @ self.weights + self.bias
        return _activate(self.activation, pre), (x, pre)

    def backward(self, grad_y, cache):
        if cache is None:
            raise MissingCacheError("dense backward needs the forward cache")
        x, pre = cache
        grad_y = np.asarray(grad_y, dtype=np.float64)
        if grad_y.shape != pre.shape:
            raise ShapeMismatchError(f"grad {grad_y.shape} != forward output {pre.shape}")
        g = grad_y * _activate_grad(self.activation, pre)
        if x.ndim == 1:
            grad_w = np.outer(x, g)
            grad_b = g.copy()
        else:
            grad_w = x.T @ g
            grad_b = g.sum(axis=0)
        grad_x = g @ self.weights.T
        return grad_x, [grad_w, grad_b]


def dense_forward_backward(layer: DenseLayer, x, grad_y):
    """One-call forward plus backward; returns (y, grad_x, grad_w, grad_b)."""
    y, cache = layer.forward(x)
    grad_x, (grad_w, grad_b) = layer.backward(grad_y, cache)
    return y, grad_x, grad_w, grad_b


class FlattenLayer:
    """Concatenate per-vertex channel rows: (..., N, C) -> (..., N * C)."""

    def params(self):
        return []

    def set_params(self, tensors):
        pass

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            return x.reshape(-1), x.shape
        if x.ndim == 3:
            return x.reshape(x.shape[0], -1), x.shape
        raise ShapeMismatchError(f"flatten expects 2-d or 3-d input, got {x.shape}")

    def backward(self, grad_y, cache):
        if cache is None:
            raise MissingCacheError("flatten backward needs the forward cache")
        return np.asarray(grad_y, dtype=np.float64).reshape(cache), []


@dataclass(frozen=True)
class DropoutSpec:
    """Inverted dropout: keep with probability 1 - rate, rescale by 1/(1 - rate)."""

    rate: float
    mode: str = "train"

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise InvalidRateError(f"dropout rate must be in [0, 1), got {self.rate}")
        if self.mode not in ("train", "eval"):
            raise ValueError(f"mode must be 'train' or 'eval', got {self.mode!r}")


def dropout_apply(spec: DropoutSpec, x, rng):
    """Apply dropout; returns (y, mask).  Eval mode is exactly the identity."""
    x = np.asarray(x, dtype=np.float64)
    if spec.mode == "eval" or spec.rate == 0.0:
        return x, np.ones_like(x)
    mask = (rng.random(x.shape) >= spec.rate).astype(np.float64)
    return x * mask / (1.0 - spec.rate), mask


class DropoutLayer:
    """Dropout as a stack element; identity unless forward runs with train=True."""

    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise InvalidRateError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def params(self):
        return []

    def set_params(self, tensors):
        pass

    def forward(self, x, train=False, rng=None):
        spec = DropoutSpec(self.rate, "train" if train else "eval")
        if train and self.rate > 0.0 and rng is None:
            raise ValueError("dropout in train mode needs an rng")
        y, mask = dropout_apply(spec, x, rng)
        return y, (mask, spec)

    def backward(self, grad_y, cache):
        if cache is None:
            raise MissingCacheError("dropout backward needs the forward cache")
        mask, spec = cache
        if spec.mode == "eval" or spec.rate == 0.0:
            return np.asarray(grad_y, dtype=np.float64), []
        return np.asarray(grad_y, dtype=np.float64) * mask / (1.0 - spec.rate), []


# --- losses and penalties ---

def mse_loss(x, y):
    """Squared-error loss ||x - y||_2^2 with gradient w.r.t. ``y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"shapes {x.shape} and {y.shape} differ")
    diff = y - x
    return float(np.sum(diff * diff)), 2.0 * diff


def l2_penalty(params, lam):
    """Penalty lam * sum ||W||_2^2 over the given tensors, with gradients 2*lam*W."""
    if lam < 0.0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    penalty = lam * float(sum(np.sum(np.square(p)) for p in params))
    grads = [2.0 * lam * p for p in params]
    return penalty, grads


# --- Adam ---

@dataclass(frozen=True)
class AdamState:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: tuple = field(default=())
    second_moment: tuple = field(default=())


def init_adam(params, learning_rate=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8) -> AdamState:
    """Fresh optimizer state with zero moments matching the parameter shapes."""
    return AdamState(
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
        step_count=0,
        first_moment=tuple(np.zeros_like(p) for p in params),
        second_moment=tuple(np.zeros_like(p) for p in params),
    )


def adam_step(state: AdamState, params, grads):
    """One bias-corrected Adam update; returns (new_params, new_state)."""
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ShapeMismatchError("params, grads and moments must align")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeMismatchError(f"param {p.shape} vs grad {g.shape}")
    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_params.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        new_m.append(m)
        new_v.append(v)
    return new_params, replace(
        state, step_count=t, first_moment=tuple(new_m), second_moment=tuple(new_v)
    )


# --- composition and gradient checking ---

class SequentialNet:
    """Layer stack with a squared-error reconstruction head.

    The loss is the batch mean of per-sample ||target - output||_2^2, plus an
    optional L2 penalty on dense weight matrices (biases and graph-conv
    parameters are never penalized).
    """

    def __init__(self, layers, l2_lambda=0.0):
        self.layers = list(layers)
        self.l2_lambda = float(l2_lambda)

    def parameters(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def set_parameters(self, tensors):
        i = 0
        for layer in self.layers:
            k = len(layer.params())
            layer.set_params(tensors[i:i + k])
            i += k
        if i != len(tensors):
            raise ShapeMismatchError("parameter count mismatch")

    def forward(self, x, train=False, rng=None, collect=False):
        outputs = []
        for layer in self.layers:
            x, _ = layer.forward(x, train=train, rng=rng)
            if collect:
                outputs.append(x)
        return (x, outputs) if collect else x

    def loss(self, x, target, train=False, rng=None):
        y = self.forward(x, train=train, rng=rng)
        loss = _batch_mse(target, y)[0]
        if self.l2_lambda:
            loss += l2_penalty(self.penalized_weights(), self.l2_lambda)[0]
        return loss

    def loss_and_gradients(self, x, target, train=False, rng=None):
        caches = []
        out = x
        for layer in self.layers:
            out, cache = layer.forward(out, train=train, rng=rng)
            caches.append(cache)
        loss, grad = _batch_mse(target, out)
        param_grads = []
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            grad, layer_grads = layer.backward(grad, cache)
            param_grads = list(layer_grads) + param_grads
        if self.l2_lambda:
            penalty, pen_grads = l2_penalty(self.penalized_weights(), self.l2_lambda)
            loss += penalty
            it = iter(pen_grads)
            params = self.parameters()
            penalized = {id(w) for w in self.penalized_weights()}
            param_grads = [
                g + next(it) if id(p) in penalized else g
                for p, g in zip(params, param_grads)
            ]
        return loss, param_grads

    def penalized_weights(self):
        return [l.weights for l in self.layers if isinstance(l, DenseLayer)]


def _batch_mse(target, y):
    target = np.asarray(target, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if target.shape != y.shape:
        raise DimensionMismatchError(f"target {target.shape} vs output {y.shape}")
    diff = y - target
    batch = y.shape[0] if y.ndim == 2 else 1
    return float(np.sum(diff * diff)) / batch, 2.0 * diff / batch


def gradient_check(network, x, target, epsilon=1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error per component is |analytic - numeric| / max(1, |analytic|
    + |numeric|).  Run in eval mode only; relu pre-activations should stay
    away from 0 by more than ``epsilon`` or the finite differences straddle
    the kink.
    """
    _, analytic = network.loss_and_gradients(x, target)
    worst = 0.0
    for p, g in zip(network.parameters(), analytic):
        flat = p.reshape(-1)
        g_flat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = network.loss(x, target)
            flat[i] = orig - epsilon
            down = network.loss(x, target)
            flat[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            err = abs(g_flat[i] - numeric) / max(1.0, abs(g_flat[i]) + abs(numeric))
            if err > worst:
                worst = err
    return worst
