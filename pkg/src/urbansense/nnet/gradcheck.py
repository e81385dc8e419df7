"""Finite-difference verification of analytic gradients."""

import numpy as np

from . import ops

# Relative error denominator floor: errors on near-zero gradients are judged
# against this scale instead of blowing up.
_REL_FLOOR = 1e-4


def finite_difference_grad(f, arrays, eps=1e-5):
    """Central-difference gradient of scalar ``f()`` w.r.t. ``arrays``.

    ``f`` must read the (mutated in place) arrays each call.  Returns one
    gradient array per input array.
    """
    out = []
    for a in arrays:
        g = np.zeros_like(a, dtype=np.float64)
        flat = a.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = f()
            flat[i] = orig - eps
            lo = f()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * eps)
        out.append(g)
    return out


def max_relative_error(analytic, numeric):
    """max over elements of |a - n| / max(|a|, |n|, floor)."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), _REL_FLOOR)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def _loss_pair(loss):
    if loss == "bce":
        return ops.binary_cross_entropy, ops.binary_cross_entropy_grad
    if loss == "mse":
        def value(t, y):
            return float(0.5 * np.sum((y - t) ** 2))

        def grad(t, y):
            return y - t

        return value, grad
    if loss == "sum":
        return (lambda t, y: float(np.sum(y))), (lambda t, y: np.ones_like(y))
    raise ValueError(f"unknown loss {loss!r}")


def gradient_check(net, x, t, loss="bce", eps=1e-5):
    """Compare net.backward() against central differences on every parameter.

    Dropout masks are sampled once and pinned for the duration so the
    perturbed forwards see the same (sub)network.  Intended for small nets
    (< 1e4 parameters) in float64; returns the max relative error.
    """
    if net.num_parameters() >= 10_000:
        raise ValueError("gradient_check is for networks under 1e4 parameters")
    loss_value, loss_grad = _loss_pair(loss)
    t = np.asarray(t, dtype=np.float64)

    drops = net.dropout_layers()
    try:
        for d in drops:
            d.fixed_mask = None
        # throwaway train pass samples each mask at its real shape
        net.forward(x, train=True)
        for d in drops:
            if d._cache is not None:
                d.fixed_mask = d._cache[0]

        y = net.forward(x, train=True)
        net.backward(loss_grad(t, np.asarray(y, dtype=np.float64)).astype(net.dtype))
        analytic = [g.astype(np.float64).copy() for _, g in net.gradients()]

        params = [p for _, p in net.parameters()]

        def f():
            return loss_value(t, np.asarray(net.forward(x, train=True), dtype=np.float64))

        numeric = finite_difference_grad(f, params, eps=eps)
    finally:
        for d in drops:
            d.fixed_mask = None
    return max_relative_error(analytic, numeric)
