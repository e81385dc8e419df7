import numpy as np
import numpy.testing as npt
import pytest

from urbansense.detector import DefaultBoxSpec, generate_default_boxes, linear_scales


def test_single_cell_ratio_one():
    spec = DefaultBoxSpec(grid_sizes=(1,), scales=(0.5, 0.7), aspect_ratios=(1.0,))
    out = generate_default_boxes(spec)
    # the ratio-1 box at the level scale, plus the extra geometric-mean box
    npt.assert_allclose(out[0], [0.5, 0.5, 0.5, 0.5], atol=1e-15)
    npt.assert_allclose(out[1], [0.5, 0.5, np.sqrt(0.35), np.sqrt(0.35)], atol=1e-15)
    assert len(out) == 2


def test_count_by_enumeration():
    spec = DefaultBoxSpec(grid_sizes=(2,), scales=(0.4, 0.8),
                          aspect_ratios=(1.0, 2.0, 0.5))
    out = generate_default_boxes(spec)
    assert out.shape == (2 * 2 * 4, 4)
    assert spec.total_boxes == 16


def test_aspect_ratio_two_shape():
    spec = DefaultBoxSpec(grid_sizes=(1,), scales=(0.4, 0.8), aspect_ratios=(2.0,))
    out = generate_default_boxes(spec)
    w, h = out[0, 2], out[0, 3]
    assert w / h == pytest.approx(2.0, rel=1e-12)


def test_centers_and_ordering():
    spec = DefaultBoxSpec(grid_sizes=(2,), scales=(0.3, 0.6), aspect_ratios=(1.0,))
    out = generate_default_boxes(spec)
    # row-major cells, ratio innermost: cell (0,0), (0,1), (1,0), (1,1)
    centers = out[::2, :2]
    npt.assert_allclose(centers, [[0.25, 0.25], [0.75, 0.25],
                                  [0.25, 0.75], [0.75, 0.75]])


def test_level_major_ordering():
    spec = DefaultBoxSpec(grid_sizes=(2, 1), scales=(0.3, 0.6, 0.9),
                          aspect_ratios=(1.0,))
    out = generate_default_boxes(spec)
    assert len(out) == 2 * 2 * 2 + 1 * 1 * 2
    # level 0 boxes first, all at its scale
    npt.assert_allclose(out[0, 2:], [0.3, 0.3])
    npt.assert_allclose(out[-2, 2:], [0.6, 0.6])


def test_invalid_scales_rejected():
    with pytest.raises(ValueError):
        DefaultBoxSpec(grid_sizes=(2,), scales=(0.8, 0.4))  # decreasing
    with pytest.raises(ValueError):
        DefaultBoxSpec(grid_sizes=(2,), scales=(0.4,))  # missing extra
    with pytest.raises(ValueError):
        DefaultBoxSpec(grid_sizes=(2,), scales=(0.0, 0.5))  # not in (0, 1]


def test_linear_scales_progression():
    s = linear_scales(2, 0.2, 0.9)
    assert len(s) == 3
    npt.assert_allclose(s[:2], [0.2, 0.9])
    assert s[2] == 1.0  # capped extrapolation
    s5 = linear_scales(5, 0.2, 0.9)
    npt.assert_allclose(np.diff(s5[:5]), 0.175)
