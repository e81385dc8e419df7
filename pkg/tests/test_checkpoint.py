import numpy as np
import numpy.testing as npt
import pytest

from urbansense import nnet
from urbansense.nnet import Network, activation, conv2d, dense, flatten, maxpool2d
from urbansense.nnet.checkpoint import load_checkpoint, save_checkpoint


def small_net(seed=21):
    specs = [conv2d(3, 3), activation("relu"), maxpool2d(2), flatten(),
             dense(4), activation("sigmoid")]
    return Network(specs, (6, 6, 3), seed=seed, dtype=np.float32)


def test_round_trip_bit_exact_forward(tmp_path):
    net = small_net()
    path = tmp_path / "model.npz"
    nnet.save_network(path, net, history={"train_losses": [1.0, 0.5]})
    loaded, meta = nnet.load_network(path)
    x = np.random.default_rng(0).random((2, 6, 6, 3), dtype=np.float32)
    npt.assert_array_equal(net.forward(x), loaded.forward(x))
    assert meta["history"]["train_losses"] == [1.0, 0.5]
    assert meta["seed"] == 21 and meta["dtype"] == "float32"


def test_round_trip_preserves_param_bits(tmp_path):
    net = small_net()
    path = tmp_path / "model.npz"
    nnet.save_network(path, net)
    loaded, _ = nnet.load_network(path)
    for (name_a, a), (name_b, b) in zip(net.parameters(), loaded.parameters()):
        assert name_a == name_b
        assert a.dtype == b.dtype
        npt.assert_array_equal(a, b)


def test_rejects_future_format_version(tmp_path):
    path = tmp_path / "bad.npz"
    save_checkpoint(path, {"kind": "network"}, {"w": np.zeros(2)})
    # rewrite the metadata with an unknown version
    import json
    with np.load(path) as data:
        meta = json.loads(str(data["__meta__"]))
        arrays = {k: data[k] for k in data.files if k != "__meta__"}
    meta["format_version"] = 999
    np.savez(path, __meta__=np.asarray(json.dumps(meta)), **arrays)
    with pytest.raises(ValueError, match="format"):
        load_checkpoint(path)


def test_rejects_non_checkpoint_npz(tmp_path):
    path = tmp_path / "random.npz"
    np.savez(path, a=np.zeros(3))
    with pytest.raises(ValueError, match="metadata"):
        load_checkpoint(path)


def test_extra_meta_round_trips(tmp_path):
    path = tmp_path / "model.npz"
    nnet.save_network(path, small_net(), extra_meta={"kind": "classifier",
                                                     "threshold": 0.5})
    meta, _ = load_checkpoint(path)
    assert meta["kind"] == "classifier"
    assert meta["threshold"] == 0.5
