"""Recurrent cells (simple RNN and LSTM), dropout masks and the closed-loop rollout.

A forward pass runs the recurrence over the supplied inputs. With ``horizon=m`` it
then keeps going for ``m - 1`` extra steps, feeding each prediction back in as the
next input, and returns the ``m`` outputs produced from the last real input onward.
Without a horizon it returns one output per supplied input.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from src.errors import InvalidArgumentError, ShapeError
from src.nn_core.weights import GATES, Variant, WeightSet


class MaskPolicy(str, Enum):
    FIXED_PER_SEQUENCE = "fixed"
    FRESH_PER_STEP = "fresh"
    NO_DROPOUT = "none"


@dataclass(frozen=True, eq=False)
class DropoutMask:
    z_x: np.ndarray
    z_h: np.ndarray

    def __post_init__(self):
        for name in ("z_x", "z_h"):
            value = np.array(getattr(self, name), dtype=np.float64)
            if value.ndim != 1 or value.size < 1:
                raise ShapeError(f"{name} must be a non-empty vector")
            if not np.all((value == 0.0) | (value == 1.0)):
                raise InvalidArgumentError(f"{name} entries must be exactly 0 or 1")
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.z_x.size, self.z_h.size

    @classmethod
    def ones(cls, d: int, h: int) -> "DropoutMask":
        return cls(np.ones(d), np.ones(h))


MaskArg = Union[DropoutMask, Sequence[DropoutMask], None]


def sample_dropout_mask(keep_prob: float, dims: Tuple[int, int], rng: np.random.Generator) -> DropoutMask:
    """Bernoulli(keep_prob) masks: each entry is 1 with probability ``keep_prob``."""
    if not 0.0 <= keep_prob <= 1.0:
        raise InvalidArgumentError(f"keep_prob must lie in [0, 1], got {keep_prob}")
    d, h = dims
    z_x = (rng.random(d) < keep_prob).astype(np.float64)
    z_h = (rng.random(h) < keep_prob).astype(np.float64)
    return DropoutMask(z_x, z_h)


def rollout_length(n_inputs: int, horizon: Optional[int]) -> int:
    return n_inputs if horizon is None else n_inputs + horizon - 1


def draw_masks(
    policy: MaskPolicy,
    keep_prob: float,
    dims: Tuple[int, int],
    n_steps: int,
    rng: np.random.Generator,
) -> List[DropoutMask]:
    """One mask per recurrent step, drawn according to ``policy``."""
    policy = MaskPolicy(policy)
    if policy is MaskPolicy.NO_DROPOUT:
        return [DropoutMask.ones(*dims)] * n_steps
    if policy is MaskPolicy.FIXED_PER_SEQUENCE:
        return [sample_dropout_mask(keep_prob, dims, rng)] * n_steps
    return [sample_dropout_mask(keep_prob, dims, rng) for _ in range(n_steps)]


@dataclass
class ForwardCache:
    """Per-step activations kept for backpropagation through time."""

    variant: Variant
    inputs: np.ndarray          # (T, d) inputs actually fed, feedback steps included
    n_given: int                # inputs supplied by the caller; later ones are fed back outputs
    masks: List[DropoutMask]
    hs: np.ndarray              # (T + 1, h), hs[0] = h_0
    ys: np.ndarray              # (T, o)
    output_steps: np.ndarray    # step indices whose outputs are returned
    cs: Optional[np.ndarray] = None            # (T + 1, h), LSTM only
    gates: Dict[str, np.ndarray] = field(default_factory=dict)   # (T, h) per gate, LSTM only

    @property
    def n_steps(self) -> int:
        return self.inputs.shape[0]


def _as_inputs(inputs, d: int) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, d)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] != d:
        raise ShapeError(f"inputs must have shape (L >= 1, {d}), got {np.shape(inputs)}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("inputs contain non-finite values")
    return x


def _resolve_masks(mask: MaskArg, policy: MaskPolicy, dims: Tuple[int, int], n_steps: int) -> List[DropoutMask]:
    policy = MaskPolicy(policy)
    if policy is MaskPolicy.NO_DROPOUT or mask is None:
        return [DropoutMask.ones(*dims)] * n_steps
    if isinstance(mask, DropoutMask):
        if policy is MaskPolicy.FRESH_PER_STEP and n_steps > 1:
            raise ShapeError("fresh-per-step dropout needs one mask per step")
        masks = [mask] * n_steps
    else:
        masks = list(mask)
        if len(masks) != n_steps:
            raise ShapeError(f"expected {n_steps} masks, got {len(masks)}")
        if policy is MaskPolicy.FIXED_PER_SEQUENCE and any(m is not masks[0] for m in masks):
            raise InvalidArgumentError("fixed-per-sequence dropout must reuse a single mask")
    for m in masks:
        if m.dims != dims:
            raise ShapeError(f"mask dims {m.dims} do not match network dims {dims}")
    return masks


def _check_horizon(weights: WeightSet, horizon: Optional[int]) -> None:
    if horizon is None:
        return
    if horizon < 1:
        raise InvalidArgumentError("horizon must be at least 1")
    if horizon > 1 and weights.output_dim != weights.input_dim:
        raise ShapeError("closed-loop rollout needs output_dim == input_dim")


def lstm_forward(
    inputs,
    weights: WeightSet,
    mask: MaskArg = None,
    policy: MaskPolicy = MaskPolicy.FIXED_PER_SEQUENCE,
    horizon: Optional[int] = None,
) -> Tuple[np.ndarray, ForwardCache]:
    if weights.variant is not Variant.LSTM:
        raise ShapeError("lstm_forward needs LSTM weights")
    d, h = weights.input_dim, weights.hidden_dim
    given = _as_inputs(inputs, d)
    _check_horizon(weights, horizon)
    L = given.shape[0]
    T = rollout_length(L, horizon)
    masks = _resolve_masks(mask, policy, (d, h), T)

    xs = np.zeros((T, d))
    xs[:L] = given
    hs = np.zeros((T + 1, h))
    cs = np.zeros((T + 1, h))
    ys = np.zeros((T, weights.output_dim))
    gates = {g: np.zeros((T, h)) for g in GATES}
    W = {g: weights[f"W_{g}"] for g in GATES}
    U = {g: weights[f"U_{g}"] for g in GATES}
    b = {g: weights[f"b_{g}"] for g in GATES}

    for t in range(T):
        if t >= L:
            xs[t] = ys[t - 1]
        x_hat = masks[t].z_x * xs[t]
        h_hat = masks[t].z_h * hs[t]
        pre = {g: W[g] @ x_hat + U[g] @ h_hat + b[g] for g in GATES}
        f, i, o = expit(pre["f"]), expit(pre["i"]), expit(pre["o"])
        c_tilde = np.tanh(pre["C"])
        cs[t + 1] = f * cs[t] + i * c_tilde
        hs[t + 1] = o * np.tanh(cs[t + 1])
        ys[t] = weights["W_y"] @ hs[t + 1] + weights["b_y"]
        gates["f"][t], gates["i"][t], gates["o"][t], gates["C"][t] = f, i, o, c_tilde

    out_steps = np.arange(L) if horizon is None else np.arange(L - 1, T)
    cache = ForwardCache(Variant.LSTM, xs, L, masks, hs, ys, out_steps, cs=cs, gates=gates)
    return ys[out_steps].copy(), cache


def rnn_forward(
    inputs,
    weights: WeightSet,
    mask: MaskArg = None,
    policy: MaskPolicy = MaskPolicy.FIXED_PER_SEQUENCE,
    horizon: Optional[int] = None,
) -> Tuple[np.ndarray, ForwardCache]:
    """Simple RNN: h_i = tanh(W_h x_i + U_h h_{i-1} + b_h), y_i = W_y h_i + b_y."""
    if weights.variant is not Variant.RNN:
        raise ShapeError("rnn_forward needs RNN weights")
    d, h = weights.input_dim, weights.hidden_dim
    given = _as_inputs(inputs, d)
    _check_horizon(weights, horizon)
    L = given.shape[0]
    T = rollout_length(L, horizon)
    masks = _resolve_masks(mask, policy, (d, h), T)

    xs = np.zeros((T, d))
    xs[:L] = given
    hs = np.zeros((T + 1, h))
    ys = np.zeros((T, weights.output_dim))
    for t in range(T):
        if t >= L:
            xs[t] = ys[t - 1]
        pre = weights["W_h"] @ (masks[t].z_x * xs[t]) + weights["U_h"] @ (masks[t].z_h * hs[t]) + weights["b_h"]
        hs[t + 1] = np.tanh(pre)
        ys[t] = weights["W_y"] @ hs[t + 1] + weights["b_y"]

    out_steps = np.arange(L) if horizon is None else np.arange(L - 1, T)
    cache = ForwardCache(Variant.RNN, xs, L, masks, hs, ys, out_steps)
    return ys[out_steps].copy(), cache


def forward(
    inputs,
    weights: WeightSet,
    mask: MaskArg = None,
    policy: MaskPolicy = MaskPolicy.FIXED_PER_SEQUENCE,
    horizon: Optional[int] = None,
) -> Tuple[np.ndarray, ForwardCache]:
    fn = lstm_forward if weights.variant is Variant.LSTM else rnn_forward
    return fn(inputs, weights, mask, policy, horizon)
