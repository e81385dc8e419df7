"""Versioned checkpoint container.

A checkpoint is a single ``.npz`` holding a JSON metadata blob plus named
parameter arrays. Arrays round-trip bit-exactly, so save -> load -> forward
reproduces outputs to the bit.
"""

import json

import numpy as np

from .network import LayerSpec, Network

FORMAT_VERSION = 1
_META_KEY = "__meta__"
_PARAM_PREFIX = "param:"


def save_checkpoint(path, meta, arrays):
    """Write ``meta`` (JSON-serializable dict) and named float arrays."""
    meta = dict(meta)
    meta["format_version"] = FORMAT_VERSION
    payload = {_META_KEY: np.asarray(json.dumps(meta))}
    for name, arr in arrays.items():
        payload[_PARAM_PREFIX + name] = arr
    np.savez(path, **payload)


def load_checkpoint(path):
    """Read back (meta, {name: array}); rejects unknown format versions."""
    with np.load(path, allow_pickle=False) as data:
        if _META_KEY not in data:
            raise ValueError(f"{path}: not a checkpoint file (missing metadata)")
        meta = json.loads(str(data[_META_KEY]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"{path}: unsupported checkpoint format {meta.get('format_version')!r}")
        arrays = {k[len(_PARAM_PREFIX):]: data[k] for k in data.files
                  if k.startswith(_PARAM_PREFIX)}
    return meta, arrays


def network_meta(net, history=None):
    """Metadata block describing a Network's architecture and provenance."""
    return {
        "kind": "network",
        "layer_specs": [{"kind": s.kind, "options": s.options} for s in net.specs],
        "input_shape": list(net.input_shape),
        "seed": net.seed,
        "dtype": net.dtype.name,
        "history": history,
    }


def save_network(path, net, history=None, extra_meta=None):
    meta = network_meta(net, history=history)
    if extra_meta:
        meta.update(extra_meta)
    save_checkpoint(path, meta, dict(net.parameters()))


def load_network(path):
    """Rebuild a Network from a checkpoint; returns (net, meta)."""
    meta, arrays = load_checkpoint(path)
    specs = [LayerSpec(s["kind"], s["options"]) for s in meta["layer_specs"]]
    net = Network(specs, meta["input_shape"], seed=meta["seed"],
                  dtype=np.dtype(meta["dtype"]))
    net.set_parameters(arrays)
    return net, meta
