"""Huber cost and backpropagation through time for both cell variants."""

from typing import Dict, Tuple

import numpy as np

from src.errors import InvalidArgumentError, NumericError, ShapeError
from src.nn_core.cells import ForwardCache, MaskArg, MaskPolicy, forward
from src.nn_core.weights import GATES, Variant, WeightSet


def huber_loss(residual, delta: float) -> Tuple[float, np.ndarray]:
    """Summed elementwise Huber loss and its derivative with respect to ``residual``."""
    if not delta > 0:
        raise InvalidArgumentError(f"Huber delta must be positive, got {delta}")
    r = np.asarray(residual, dtype=np.float64)
    a = np.abs(r)
    quadratic = a <= delta
    loss = np.where(quadratic, 0.5 * r * r, delta * (a - 0.5 * delta))
    grad = np.where(quadratic, r, delta * np.sign(r))
    return float(loss.sum()), grad


def _backward_lstm(cache: ForwardCache, weights: WeightSet, dys: np.ndarray) -> Dict[str, np.ndarray]:
    grads = {name: np.zeros_like(value) for name, value in weights.items()}
    T = cache.n_steps
    h_dim = weights.hidden_dim
    dh_next = np.zeros(h_dim)
    dc_next = np.zeros(h_dim)
    dys = dys.copy()
    W = {g: weights[f"W_{g}"] for g in GATES}
    U = {g: weights[f"U_{g}"] for g in GATES}

    for t in range(T - 1, -1, -1):
        mask = cache.masks[t]
        h_t, c_t, c_prev = cache.hs[t + 1], cache.cs[t + 1], cache.cs[t]
        f, i, o, g = (cache.gates[k][t] for k in GATES)
        x_hat = mask.z_x * cache.inputs[t]
        h_hat = mask.z_h * cache.hs[t]

        dy = dys[t]
        grads["W_y"] += np.outer(dy, h_t)
        grads["b_y"] += dy
        dh = weights["W_y"].T @ dy + dh_next

        tanh_c = np.tanh(c_t)
        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
        da = {
            "f": dc * c_prev * f * (1.0 - f),
            "i": dc * g * i * (1.0 - i),
            "o": do * o * (1.0 - o),
            "C": dc * i * (1.0 - g * g),
        }
        dc_next = dc * f

        dx_hat = np.zeros_like(x_hat)
        dh_hat = np.zeros_like(h_hat)
        for k in GATES:
            grads[f"W_{k}"] += np.outer(da[k], x_hat)
            grads[f"U_{k}"] += np.outer(da[k], h_hat)
            grads[f"b_{k}"] += da[k]
            dx_hat += W[k].T @ da[k]
            dh_hat += U[k].T @ da[k]
        dh_next = mask.z_h * dh_hat
        if t >= cache.n_given:
            # this input was the previous step's output
            dys[t - 1] += mask.z_x * dx_hat
    return grads


def _backward_rnn(cache: ForwardCache, weights: WeightSet, dys: np.ndarray) -> Dict[str, np.ndarray]:
    grads = {name: np.zeros_like(value) for name, value in weights.items()}
    dh_next = np.zeros(weights.hidden_dim)
    dys = dys.copy()
    for t in range(cache.n_steps - 1, -1, -1):
        mask = cache.masks[t]
        h_t = cache.hs[t + 1]
        x_hat = mask.z_x * cache.inputs[t]
        h_hat = mask.z_h * cache.hs[t]

        dy = dys[t]
        grads["W_y"] += np.outer(dy, h_t)
        grads["b_y"] += dy
        dh = weights["W_y"].T @ dy + dh_next
        da = dh * (1.0 - h_t * h_t)
        grads["W_h"] += np.outer(da, x_hat)
        grads["U_h"] += np.outer(da, h_hat)
        grads["b_h"] += da
        dh_next = mask.z_h * (weights["U_h"].T @ da)
        if t >= cache.n_given:
            dys[t - 1] += mask.z_x * (weights["W_h"].T @ da)
    return grads


def sequence_cost(outputs: np.ndarray, targets: np.ndarray, delta: float) -> Tuple[float, np.ndarray]:
    """Huber cost of ``targets - outputs`` and its derivative w.r.t. the outputs."""
    loss, d_residual = huber_loss(targets - outputs, delta)
    return loss, -d_residual


def loss_and_gradients(
    inputs,
    targets,
    weights: WeightSet,
    mask: MaskArg = None,
    policy: MaskPolicy = MaskPolicy.FIXED_PER_SEQUENCE,
    delta: float = 1.0,
    loss_scale: float = 1.0,
) -> Tuple[float, WeightSet]:
    """Closed-loop rollout over ``len(targets)`` steps, then full BPTT of the Huber cost."""
    y = np.asarray(targets, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != weights.output_dim or y.shape[0] < 1:
        raise ShapeError(f"targets must have shape (m >= 1, {weights.output_dim}), got {y.shape}")
    outputs, cache = forward(inputs, weights, mask, policy, horizon=y.shape[0])
    loss, d_out = sequence_cost(outputs, y, delta)

    dys = np.zeros_like(cache.ys)
    dys[cache.output_steps] = loss_scale * d_out
    backward = _backward_lstm if weights.variant is Variant.LSTM else _backward_rnn
    grads = backward(cache, weights, dys)
    if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
        raise NumericError("non-finite loss or gradient during backpropagation")
    return loss_scale * loss, WeightSet(weights.variant, grads)


def compute_gradients(
    inputs,
    targets,
    weights: WeightSet,
    mask: MaskArg = None,
    policy: MaskPolicy = MaskPolicy.FIXED_PER_SEQUENCE,
    delta: float = 1.0,
    loss_scale: float = 1.0,
) -> WeightSet:
    return loss_and_gradients(inputs, targets, weights, mask, policy, delta, loss_scale)[1]
