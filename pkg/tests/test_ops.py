import numpy as np
import numpy.testing as npt
import pytest

from urbansense.nnet import ops


class TestRelu:
    def test_sign_split(self):
        npt.assert_array_equal(ops.relu(np.array([-2.0, 0.0, 3.0])), [0.0, 0.0, 3.0])
        npt.assert_array_equal(ops.relu(np.array([0.5, -0.5])), [0.5, 0.0])

    def test_zeros_fixed_point(self):
        z = np.zeros((4, 3))
        npt.assert_array_equal(ops.relu(z), z)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=1000) * 10
        once = ops.relu(x)
        npt.assert_array_equal(ops.relu(once), once)

    def test_grad_dead_region(self):
        npt.assert_array_equal(ops.relu_grad(np.array([-3.0, -1e-9])), [0.0, 0.0])
        npt.assert_array_equal(ops.relu_grad(np.array([1e-9, 4.0])), [1.0, 1.0])


class TestSigmoid:
    def test_zero_is_half(self):
        assert ops.sigmoid(np.array(0.0)) == 0.5

    def test_saturation(self):
        assert abs(ops.sigmoid(np.array(50.0)) - 1.0) < 1e-9

    def test_symmetry_identity(self):
        x = np.array(1.7)
        npt.assert_allclose(ops.sigmoid(x) + ops.sigmoid(-x), 1.0, atol=1e-15)

    def test_open_range_and_monotone(self):
        x = np.linspace(-30, 30, 2001)
        s = ops.sigmoid(x)
        assert np.all(s > 0) and np.all(s < 1)
        assert np.all(np.diff(s) >= 0)


class TestSoftmax:
    def test_uniform(self):
        npt.assert_allclose(ops.softmax(np.array([0.0, 0.0])), [0.5, 0.5])

    def test_shift_invariance(self):
        for c in (-100.0, 0.0, 3.5, 1e6):
            npt.assert_allclose(ops.softmax(np.array([c, c, c])),
                                [1 / 3, 1 / 3, 1 / 3], atol=1e-15)
        rng = np.random.default_rng(1)
        v = rng.normal(size=17)
        npt.assert_allclose(ops.softmax(v), ops.softmax(v + 123.456), atol=1e-12)

    def test_against_high_precision_values(self):
        # e^1/(e^1+e^2) and e^2/(e^1+e^2), evaluated at 40 decimal digits
        npt.assert_allclose(ops.softmax(np.array([1.0, 2.0])),
                            [0.2689414213699951, 0.7310585786300049], atol=1e-15)

    def test_normalization_and_argmax(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            v = rng.normal(size=rng.integers(1, 20)) * 30
            s = ops.softmax(v)
            assert abs(s.sum() - 1.0) <= 1e-12
            assert np.all(s >= 0)
            assert np.argmax(s) == np.argmax(v)


class TestCrossEntropy:
    def test_perfect_prediction_near_zero(self):
        t = np.array([0.0, 1.0, 0.0])
        y = np.array([0.1, 1.0 - 2e-9, 1e-12])
        assert 0.0 <= ops.cross_entropy(t, y) < 1e-8

    def test_uniform_binary(self):
        assert ops.cross_entropy(np.array([1.0, 0.0]),
                                 np.array([0.5, 0.5])) == pytest.approx(
            0.6931471805599453, abs=1e-15)

    def test_binary_form(self):
        # -log(0.25) = log 4
        assert ops.binary_cross_entropy(1.0, 0.25) == pytest.approx(
            1.3862943611198906, abs=1e-15)

    def test_nonnegative_and_zero_iff_certain(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            k = int(rng.integers(2, 6))
            t = np.zeros(k)
            t[rng.integers(k)] = 1.0
            y = ops.softmax(rng.normal(size=k))
            assert ops.cross_entropy(t, y) >= 0.0
        certain = np.array([0.0, 1.0])
        assert ops.cross_entropy(certain, np.array([1e-13, 1.0])) == pytest.approx(
            0.0, abs=1e-10)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            ops.cross_entropy(np.array([0.0, 1.0]), np.array([1.0, 0.0]))

    def test_grad_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        t = (rng.random(8) < 0.5).astype(float)
        y = rng.uniform(0.05, 0.95, 8)
        g = ops.binary_cross_entropy_grad(t, y)
        h = 1e-7
        for i in range(8):
            yp, ym = y.copy(), y.copy()
            yp[i] += h
            ym[i] -= h
            num = (ops.binary_cross_entropy(t, yp) - ops.binary_cross_entropy(t, ym)) / (2 * h)
            assert g[i] == pytest.approx(num, rel=1e-5)
