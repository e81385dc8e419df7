"""Elementwise activations and loss functions on plain numpy arrays."""

import numpy as np

# Probabilities are clipped into this open interval before any log().
PROB_EPS = 1e-12


def relu(x):
    """max(0, x), elementwise."""
    return np.maximum(0.0, x)


def relu_grad(x):
    """Derivative of relu w.r.t. its input (0 at x <= 0)."""
    return (x > 0).astype(x.dtype)


def _as_float(x):
    x = np.asarray(x)
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    return x


def sigmoid(x):
    """1 / (1 + exp(-x)), computed stably for large |x|."""
    x = _as_float(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(v, axis=-1):
    """Normalized exponentials along ``axis``.

    The maximum is subtracted before exponentiation, so the result is
    invariant under adding a constant to every input.
    """
    v = _as_float(v)
    shifted = v - np.max(v, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def clip_probs(y):
    """Clip probabilities into [PROB_EPS, 1 - PROB_EPS] ahead of log()."""
    return np.clip(y, PROB_EPS, 1.0 - PROB_EPS)


def cross_entropy(t, y):
    """Multi-class cross-entropy -sum(t * log(y)).

    Args:
        t: target vector (one-hot or probability weights).
        y: predicted probabilities, same shape as ``t``.

    Raises:
        ValueError: if some y_i <= 0 where t_i > 0 (before clipping the
            value would be undefined; exact zeros under a positive target
            are a caller bug, not a numerical accident).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape:
        raise ValueError(f"shape mismatch: targets {t.shape} vs predictions {y.shape}")
    if np.any((y <= 0.0) & (t > 0.0)):
        raise ValueError("cross_entropy: prediction <= 0 under a positive target")
    return float(-np.sum(t * np.log(clip_probs(y))))


def binary_cross_entropy(t, y):
    """Single-output binary form -[t log y + (1-t) log(1-y)], averaged.

    ``t`` and ``y`` may be scalars or arrays of matching shape; arrays are
    averaged so the value is a per-example loss.
    """
    t = np.asarray(t, dtype=float)
    y = clip_probs(np.asarray(y, dtype=float))
    return float(np.mean(-(t * np.log(y) + (1.0 - t) * np.log(1.0 - y))))


def binary_cross_entropy_grad(t, y):
    """d(binary_cross_entropy)/dy, using the same clipping as the value."""
    t = np.asarray(t, dtype=float)
    yc = clip_probs(np.asarray(y, dtype=float))
    return (yc - t) / (yc * (1.0 - yc)) / t.size
