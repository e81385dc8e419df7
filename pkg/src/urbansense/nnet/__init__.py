"""Minimal differentiable-layer framework backing the classifier and detector."""

from .checkpoint import load_checkpoint, load_network, save_checkpoint, save_network
from .gradcheck import finite_difference_grad, gradient_check, max_relative_error
from .layers import ShapeError
from .network import (
    LayerSpec,
    Network,
    activation,
    conv2d,
    dense,
    dropout,
    flatten,
    maxpool2d,
)
from .ops import (
    binary_cross_entropy,
    binary_cross_entropy_grad,
    clip_probs,
    cross_entropy,
    relu,
    sigmoid,
    softmax,
)
from .optim import (
    AdamState,
    MomentumState,
    adam_step,
    init_adam,
    init_momentum,
    momentum_step,
)

__all__ = [
    "AdamState",
    "LayerSpec",
    "MomentumState",
    "Network",
    "ShapeError",
    "activation",
    "adam_step",
    "binary_cross_entropy",
    "binary_cross_entropy_grad",
    "clip_probs",
    "conv2d",
    "cross_entropy",
    "dense",
    "dropout",
    "finite_difference_grad",
    "flatten",
    "gradient_check",
    "init_adam",
    "init_momentum",
    "load_checkpoint",
    "load_network",
    "max_relative_error",
    "maxpool2d",
    "momentum_step",
    "relu",
    "save_checkpoint",
    "save_network",
    "sigmoid",
    "softmax",
]
