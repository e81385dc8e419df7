"""Layer-spec driven feed-forward networks.

A network is declared as an ordered list of :class:`LayerSpec` plus a fixed
per-example input shape. Materializing the network draws all weights from a
single seed, so two networks built from the same (specs, input_shape, seed,
dtype) are bit-identical.
"""

from dataclasses import dataclass, field

import numpy as np

from .layers import (
    Activation,
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    MaxPool2d,
    ShapeError,
)

KINDS = ("conv2d", "maxpool2d", "flatten", "dense", "dropout", "activation")


@dataclass(frozen=True)
class LayerSpec:
    """Declarative layer description: a kind plus kind-specific options."""

    kind: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        opts = dict(self.options)
        if self.kind == "conv2d":
            if opts.get("filters", 0) < 1 or opts.get("kernel_size", 0) < 1:
                raise ValueError(f"bad conv2d options {opts}")
            opts.setdefault("padding", "same")
        elif self.kind == "maxpool2d":
            if opts.get("pool_size", 0) < 1:
                raise ValueError(f"bad maxpool2d options {opts}")
        elif self.kind == "dense":
            if opts.get("units", 0) < 1:
                raise ValueError(f"bad dense options {opts}")
        elif self.kind == "dropout":
            if not 0.0 <= opts.get("rate", -1.0) < 1.0:
                raise ValueError(f"bad dropout options {opts}")
        elif self.kind == "activation":
            if opts.get("name") not in Activation.NAMES:
                raise ValueError(f"bad activation options {opts}")
        object.__setattr__(self, "options", opts)


def conv2d(filters, kernel_size=3, padding="same"):
    return LayerSpec("conv2d", {"filters": filters, "kernel_size": kernel_size,
                                "padding": padding})


def maxpool2d(pool_size=2):
    return LayerSpec("maxpool2d", {"pool_size": pool_size})


def flatten():
    return LayerSpec("flatten")


def dense(units):
    return LayerSpec("dense", {"units": units})


def dropout(rate):
    return LayerSpec("dropout", {"rate": rate})


def activation(name):
    return LayerSpec("activation", {"name": name})


class Network:
    """Sequential network materialized from layer specs.

    Forward in train mode caches per-layer activations for a subsequent
    :meth:`backward`; inference forwards are cache-free and leave the
    network untouched (safe for concurrent readers).
    """

    def __init__(self, specs, input_shape, seed=0, dtype=np.float32):
        self.specs = list(specs)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)
        self.layers = []
        self._ready_for_backward = False

        seed_seq = np.random.SeedSequence(self.seed)
        children = seed_seq.spawn(len(self.specs))
        shape = self.input_shape
        for i, spec in enumerate(self.specs):
            rng = np.random.Generator(np.random.PCG64(children[i]))
            try:
                layer = self._materialize(spec, shape, rng)
                shape = layer.out_shape(shape)
            except (ShapeError, ValueError) as exc:
                raise ShapeError(f"layer {i} ({spec.kind}): {exc}") from exc
            self.layers.append(layer)
        self.output_shape = shape

    def _materialize(self, spec, in_shape, rng):
        o = spec.options
        if spec.kind == "conv2d":
            if len(in_shape) != 3:
                raise ShapeError(f"conv2d needs (H, W, C) input, got {in_shape}")
            return Conv2d(o["filters"], o["kernel_size"], in_shape[2],
                          padding=o["padding"], rng=rng, dtype=self.dtype)
        if spec.kind == "maxpool2d":
            return MaxPool2d(o["pool_size"])
        if spec.kind == "flatten":
            return Flatten()
        if spec.kind == "dense":
            if len(in_shape) != 1:
                raise ShapeError(f"dense needs flat input, got {in_shape}")
            return Dense(o["units"], in_shape[0], rng=rng, dtype=self.dtype)
        if spec.kind == "dropout":
            return Dropout(o["rate"], rng=rng)
        return Activation(o["name"])

    def forward(self, x, train=False):
        """Run the network; ``x`` is one example or a batch of them."""
        x = np.asarray(x, dtype=self.dtype)
        single = x.shape == self.input_shape
        if single:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise ShapeError(
                f"input shape {x.shape[1:]} does not match network input "
                f"{self.input_shape}")
        for i, (spec, layer) in enumerate(zip(self.specs, self.layers)):
            layer.clear_cache()
            try:
                x = layer.forward(x, train=train)
            except (ShapeError, ValueError) as exc:
                raise ShapeError(f"layer {i} ({spec.kind}): {exc}") from exc
        self._ready_for_backward = train
        return x[0] if single else x

    def backward(self, loss_grad):
        """Back-propagate d(loss)/d(output); fills every layer's ``grads``.

        Returns the gradients in :meth:`parameters` order.
        """
        if not self._ready_for_backward:
            raise RuntimeError("backward() requires a prior forward(train=True)")
        g = np.asarray(loss_grad, dtype=self.dtype)
        if g.shape == self.output_shape:
            g = g[None]
        for layer in reversed(self.layers):
            g = layer.backward(g)
        self._ready_for_backward = False
        return self.gradients()

    def parameters(self):
        """Flat list of (name, array) in deterministic layer order."""
        out = []
        for i, layer in enumerate(self.layers):
            for key, val in layer.params.items():
                out.append((f"layer{i}.{key}", val))
        return out

    def gradients(self):
        out = []
        for i, layer in enumerate(self.layers):
            for key in layer.params:
                out.append((f"layer{i}.{key}", layer.grads[key]))
        return out

    def set_parameters(self, named):
        """Overwrite parameters from a {name: array} mapping (exact shapes)."""
        current = dict(self.parameters())
        for name, arr in named.items():
            if name not in current:
                raise KeyError(f"unknown parameter {name!r}")
            if current[name].shape != arr.shape:
                raise ShapeError(f"{name}: shape {arr.shape} != {current[name].shape}")
            current[name][...] = arr.astype(self.dtype)

    def dropout_layers(self):
        return [l for l in self.layers if isinstance(l, Dropout)]

    def num_parameters(self):
        return sum(int(v.size) for _, v in self.parameters())
