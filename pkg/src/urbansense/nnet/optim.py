"""Gradient-descent updates: Adam (default) and classical momentum SGD."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Bias-corrected Adam accumulators for one parameter list.

    ``m`` and ``v`` are zero-initialized at step 0 and always shaped exactly
    like their parameters.
    """

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def init_adam(params, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    return AdamState(
        learning_rate=learning_rate, beta1=beta1, beta2=beta2, eps=eps, step=0,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(params, grads, state):
    """One in-place Adam update over aligned parameter/gradient lists.

    Returns ``(params, state)`` with ``state.step`` incremented.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params/grads/state length mismatch")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** t
    corr2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        m_hat = m / corr1
        v_hat = v / corr2
        p -= (state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype)
    return params, state


@dataclass
class MomentumState:
    """Velocity buffers for classical momentum SGD."""

    learning_rate: float = 0.1
    momentum: float = 0.9
    velocity: list = field(default_factory=list)


def init_momentum(params, learning_rate=0.1, momentum=0.9):
    return MomentumState(learning_rate=learning_rate, momentum=momentum,
                         velocity=[np.zeros_like(p) for p in params])


def momentum_step(params, grads, state):
    if len(params) != len(grads) or len(params) != len(state.velocity):
        raise ValueError("params/grads/state length mismatch")
    for p, g, vel in zip(params, grads, state.velocity):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        vel *= state.momentum
        vel -= state.learning_rate * g
        p += vel.astype(p.dtype)
    return params, state
