import numpy as np
import pytest

from urbansense import nnet
from urbansense.nnet import Network, activation, conv2d, dense, dropout, flatten, maxpool2d


def test_linear_net_linear_loss_is_exact():
    net = Network([flatten(), dense(3)], (5,), seed=0, dtype=np.float64)
    x = np.random.default_rng(1).random(5)
    err = nnet.gradient_check(net, x, np.zeros(3), loss="sum")
    assert err < 1e-9  # exact up to rounding


def classifier_shaped_net(seed=0):
    # the classifier layer chain shrunk to a 16x16 input, < 1e4 parameters
    specs = [
        conv2d(4, 3), activation("relu"),
        conv2d(4, 3), activation("relu"),
        maxpool2d(2),
        conv2d(4, 3), activation("relu"),
        maxpool2d(2),
        conv2d(8, 3), activation("relu"),
        maxpool2d(2),
        flatten(),
        dense(16), activation("relu"), dropout(0.0),
        dense(8), activation("relu"), dropout(0.0),
        dense(1), activation("sigmoid"),
    ]
    return Network(specs, (16, 16, 3), seed=seed, dtype=np.float64)


def test_classifier_shaped_net_at_16px():
    net = classifier_shaped_net(seed=3)
    assert net.num_parameters() < 10_000
    x = np.random.default_rng(4).random((16, 16, 3))
    err = nnet.gradient_check(net, x, np.array([1.0]), loss="bce")
    assert err < 1e-4


def test_dropout_with_pinned_mask_passes():
    specs = [flatten(), dense(12), activation("relu"), dropout(0.5),
             dense(1), activation("sigmoid")]
    net = Network(specs, (6,), seed=9, dtype=np.float64)
    x = np.random.default_rng(10).random(6)
    err = nnet.gradient_check(net, x, np.array([0.0]), loss="bce")
    assert err < 1e-4
    # masks are unpinned again afterwards
    assert all(d.fixed_mask is None for d in net.dropout_layers())


def test_rejects_oversized_networks():
    net = Network([flatten(), dense(200)], (100,), seed=0, dtype=np.float64)
    with pytest.raises(ValueError):
        nnet.gradient_check(net, np.zeros(100), np.zeros(200), loss="mse")


def test_finite_difference_grad_quadratic():
    w = np.array([1.0, -2.0, 0.5])

    def f():
        return float(np.sum(w ** 2))

    (g,) = nnet.finite_difference_grad(f, [w])
    np.testing.assert_allclose(g, 2 * w, atol=1e-9)
