"""Differentiable layers over numpy arrays.

All image-shaped activations are channels-last: (batch, height, width,
channels). Every layer implements ``forward(x, train)`` and ``backward(grad)``;
train-mode forwards cache whatever backward needs, inference forwards cache
nothing. Parameter gradients accumulate into ``layer.grads`` keyed like
``layer.params``.
"""

import numpy as np

from . import ops


class ShapeError(ValueError):
    """Input/output shape incompatibility, reported with layer context."""


class Layer:
    def __init__(self):
        self.params = {}
        self.grads = {}
        self._cache = None

    def out_shape(self, in_shape):
        """Per-example output shape for a per-example ``in_shape``."""
        raise NotImplementedError

    def forward(self, x, train=False):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def clear_cache(self):
        self._cache = None


class Conv2d(Layer):
    """2-D convolution, stride 1, 'same' (zero) or 'valid' padding."""

    def __init__(self, filters, kernel_size, in_channels, padding="same",
                 rng=None, dtype=np.float64):
        super().__init__()
        if filters < 1 or kernel_size < 1:
            raise ValueError("filters and kernel_size must be >= 1")
        if padding not in ("same", "valid"):
            raise ValueError(f"unknown padding {padding!r}")
        self.filters = filters
        self.kernel_size = kernel_size
        self.in_channels = in_channels
        self.padding = padding
        k = kernel_size
        fan_in = k * k * in_channels
        limit = np.sqrt(6.0 / fan_in)
        rng = rng if rng is not None else np.random.default_rng()
        self.params["w"] = rng.uniform(-limit, limit, (k, k, in_channels, filters)).astype(dtype)
        self.params["b"] = np.zeros(filters, dtype=dtype)

    def out_shape(self, in_shape):
        if len(in_shape) != 3 or in_shape[2] != self.in_channels:
            raise ShapeError(f"conv2d expects (H, W, {self.in_channels}), got {in_shape}")
        h, w, _ = in_shape
        k = self.kernel_size
        if self.padding == "same":
            return (h, w, self.filters)
        if h < k or w < k:
            raise ShapeError(f"valid conv kernel {k} does not fit input {in_shape}")
        return (h - k + 1, w - k + 1, self.filters)

    def _pad(self, x):
        if self.padding == "valid":
            return x
        k = self.kernel_size
        lo, hi = (k - 1) // 2, k - 1 - (k - 1) // 2
        return np.pad(x, ((0, 0), (lo, hi), (lo, hi), (0, 0)))

    def forward(self, x, train=False):
        k = self.kernel_size
        xp = self._pad(x)
        n, hp, wp, c = xp.shape
        ho, wo = hp - k + 1, wp - k + 1
        windows = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(1, 2))
        cols = windows.transpose(0, 1, 2, 4, 5, 3).reshape(n * ho * wo, k * k * c)
        w_mat = self.params["w"].reshape(k * k * c, self.filters)
        out = cols @ w_mat + self.params["b"]
        if train:
            self._cache = (cols, x.shape, xp.shape)
        return out.reshape(n, ho, wo, self.filters).astype(x.dtype, copy=False)

    def backward(self, grad):
        cols, x_shape, xp_shape = self._cache
        k = self.kernel_size
        n, hp, wp, c = xp_shape
        ho, wo = hp - k + 1, wp - k + 1
        g = grad.reshape(n * ho * wo, self.filters)
        w_mat = self.params["w"].reshape(k * k * c, self.filters)
        self.grads["w"] = (cols.T @ g).reshape(self.params["w"].shape)
        self.grads["b"] = g.sum(axis=0)
        dcols = (g @ w_mat.T).reshape(n, ho, wo, k, k, c)
        dxp = np.zeros(xp_shape, dtype=grad.dtype)
        for i in range(k):
            for j in range(k):
                dxp[:, i:i + ho, j:j + wo, :] += dcols[:, :, :, i, j, :]
        if self.padding == "valid":
            return dxp
        lo = (k - 1) // 2
        return dxp[:, lo:lo + x_shape[1], lo:lo + x_shape[2], :]


class MaxPool2d(Layer):
    """Non-overlapping max pooling; trailing rows/cols beyond a full window
    are dropped.  Ties within a window route the gradient to the first
    maximum in row-major window order.
    """

    def __init__(self, pool_size):
        super().__init__()
        if pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        self.pool_size = pool_size

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise ShapeError(f"maxpool2d expects (H, W, C), got {in_shape}")
        h, w, c = in_shape
        p = self.pool_size
        if h < p or w < p:
            raise ShapeError(f"pool window {p} does not fit input {in_shape}")
        return (h // p, w // p, c)

    def forward(self, x, train=False):
        p = self.pool_size
        n, h, w, c = x.shape
        ho, wo = h // p, w // p
        cropped = x[:, :ho * p, :wo * p, :]
        windows = cropped.reshape(n, ho, p, wo, p, c).transpose(0, 1, 3, 5, 2, 4)
        flat = windows.reshape(n, ho, wo, c, p * p)
        idx = np.argmax(flat, axis=-1)
        out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        if train:
            self._cache = (idx, x.shape)
        return out

    def backward(self, grad):
        idx, x_shape = self._cache
        p = self.pool_size
        n, h, w, c = x_shape
        ho, wo = h // p, w // p
        dflat = np.zeros((n, ho, wo, c, p * p), dtype=grad.dtype)
        np.put_along_axis(dflat, idx[..., None], grad[..., None], axis=-1)
        dwin = dflat.reshape(n, ho, wo, c, p, p).transpose(0, 1, 4, 2, 5, 3)
        dx = np.zeros(x_shape, dtype=grad.dtype)
        dx[:, :ho * p, :wo * p, :] = dwin.reshape(n, ho * p, wo * p, c)
        return dx


class Flatten(Layer):
    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, train=False):
        if train:
            self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._cache)


class Dense(Layer):
    """Fully-connected layer: y = x @ w + b."""

    def __init__(self, units, in_features, rng=None, dtype=np.float64):
        super().__init__()
        if units < 1:
            raise ValueError("units must be >= 1")
        self.units = units
        self.in_features = in_features
        limit = np.sqrt(6.0 / in_features)
        rng = rng if rng is not None else np.random.default_rng()
        self.params["w"] = rng.uniform(-limit, limit, (in_features, units)).astype(dtype)
        self.params["b"] = np.zeros(units, dtype=dtype)

    def out_shape(self, in_shape):
        if len(in_shape) != 1 or in_shape[0] != self.in_features:
            raise ShapeError(f"dense expects ({self.in_features},), got {in_shape}")
        return (self.units,)

    def forward(self, x, train=False):
        if train:
            self._cache = x
        return x @ self.params["w"] + self.params["b"]

    def backward(self, grad):
        x = self._cache
        self.grads["w"] = x.T @ grad
        self.grads["b"] = grad.sum(axis=0)
        return grad @ self.params["w"].T


class Dropout(Layer):
    """Inverted dropout: active units are scaled by 1/keep at train time,
    inference is the identity.  Setting ``fixed_mask`` pins the mask (used
    by the finite-difference gradient checker so repeated forwards see the
    same network).
    """

    def __init__(self, rate, rng=None):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"drop rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng if rng is not None else np.random.default_rng()
        self.fixed_mask = None

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, train=False):
        if not train or self.rate == 0.0:
            return x
        if self.fixed_mask is not None:
            mask = self.fixed_mask
        else:
            mask = self.rng.random(x.shape) >= self.rate
        keep = 1.0 - self.rate
        if train:
            self._cache = (mask, keep)
        return x * mask / keep

    def backward(self, grad):
        if self._cache is None:  # rate 0 or inference: identity
            return grad
        mask, keep = self._cache
        return grad * mask / keep


class Activation(Layer):
    """Elementwise nonlinearity: 'relu' or 'sigmoid'."""

    NAMES = ("relu", "sigmoid")

    def __init__(self, name):
        super().__init__()
        if name not in self.NAMES:
            raise ValueError(f"unknown activation {name!r}")
        self.name = name

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, train=False):
        if self.name == "relu":
            out = ops.relu(x)
            if train:
                self._cache = x
        else:
            out = ops.sigmoid(x).astype(x.dtype, copy=False)
            if train:
                self._cache = out
        return out

    def backward(self, grad):
        if self.name == "relu":
            return grad * ops.relu_grad(self._cache)
        y = self._cache
        return grad * y * (1.0 - y)
