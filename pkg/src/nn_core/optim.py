from typing import Mapping, Tuple, Union

import numpy as np

from src.errors import InvalidArgumentError, NumericError, ShapeError
from src.nn_core.weights import AdamState, WeightSet

Grads = Union[WeightSet, Mapping[str, np.ndarray]]


def adam_step(weights: WeightSet, grads: Grads, state: AdamState, lr: float) -> Tuple[WeightSet, AdamState]:
    """One bias-corrected Adam update; returns new weights and state, inputs are untouched."""
    if not lr > 0:
        raise InvalidArgumentError(f"learning rate must be positive, got {lr}")
    if not state.m.same_shape(weights):
        raise ShapeError("optimizer state does not match the weights")

    t = state.t + 1
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    new_w, new_m, new_v = {}, {}, {}
    for name, w in weights.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != w.shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, expected {w.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
        m = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[name] + (1.0 - state.beta2) * (g * g)
        new_m[name], new_v[name] = m, v
        new_w[name] = w - lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)

    variant = weights.variant
    next_state = AdamState(
        m=WeightSet(variant, new_m),
        v=WeightSet(variant, new_v),
        t=t,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
    return WeightSet(variant, new_w), next_state
