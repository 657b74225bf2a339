# Numeric kernel: recurrent cells, BPTT, Huber cost, Adam
from .weights import AdamState, Variant, WeightSet, init_weights, zero_weights
from .cells import (
    DropoutMask,
    ForwardCache,
    MaskPolicy,
    draw_masks,
    forward,
    lstm_forward,
    rnn_forward,
    rollout_length,
    sample_dropout_mask,
)
from .backprop import compute_gradients, huber_loss, loss_and_gradients
from .optim import adam_step

__all__ = [
    'AdamState', 'Variant', 'WeightSet', 'init_weights', 'zero_weights',
    'DropoutMask', 'ForwardCache', 'MaskPolicy', 'draw_masks', 'forward',
    'lstm_forward', 'rnn_forward', 'rollout_length', 'sample_dropout_mask',
    'compute_gradients', 'huber_loss', 'loss_and_gradients', 'adam_step',
]
