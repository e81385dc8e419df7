"""Raster helpers: decoding, unit-range conversion, bilinear resampling.

Resampling is done in-house (plain numpy gathers) so the geometry used by
preprocessing and augmentation is exactly the documented one: half-pixel
centers, bilinear weights, edge-clamped sampling.
"""

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageReadError(ValueError):
    """Raised when a file cannot be decoded into an RGB raster."""


def load_rgb(path):
    """Decode an image file into an (H, W, 3) uint8 array.

    Raises:
        ImageReadError: unreadable or empty file.
    """
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"))
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageReadError(f"cannot decode image {path}: {exc}") from exc
    if arr.size == 0:
        raise ImageReadError(f"empty image {path}")
    return arr


def save_rgb(arr, path, **save_kwargs):
    """Write an (H, W, 3) array (uint8 or unit-range float) to disk."""
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        arr = (np.clip(arr, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    Image.fromarray(arr).save(path, **save_kwargs)


def to_unit_float(img):
    """Map a raster to float values in [0, 1] (uint8 divides by 255)."""
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img.astype(np.float64) / 255.0
    return np.clip(img.astype(np.float64), 0.0, 1.0)


def hflip(img):
    """Exact horizontal mirror: pixel [r, c] <-> [r, W-1-c]."""
    return np.asarray(img)[:, ::-1].copy()


def _sample_bilinear(img, ys, xs):
    """Sample ``img`` at float coordinate grids, edge-clamped."""
    h, w = img.shape[:2]
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    wy = np.clip(ys, 0.0, h - 1.0) - y0
    wx = np.clip(xs, 0.0, w - 1.0) - x0
    if img.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]
    img = img.astype(np.float64, copy=False)
    top = img[y0, x0] * (1.0 - wx) + img[y0, x1] * wx
    bot = img[y1, x0] * (1.0 - wx) + img[y1, x1] * wx
    return top * (1.0 - wy) + bot * wy


def resize_bilinear(img, out_h, out_w):
    """Bilinear resize with half-pixel center alignment.

    Returns float64; pass the result through :func:`to_unit_float` (or scale
    yourself) if the input was uint8.
    """
    img = np.asarray(img)
    h, w = img.shape[:2]
    if h == out_h and w == out_w:
        return img.astype(np.float64, copy=True)
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return _sample_bilinear(img, grid_y, grid_x)


def prepare_square(img, side):
    """Resize a raster to (side, side) and scale intensities into [0, 1]."""
    arr = to_unit_float(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) raster, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("empty image")
    if arr.shape[:2] != (side, side):
        arr = np.clip(resize_bilinear(arr, side, side), 0.0, 1.0)
    return arr


def warp_affine(img, matrix):
    """Warp by an inverse-map affine: output[r, c] samples input at
    ``matrix @ (c, r, 1)`` (x, y order).  Borders replicate the edge pixel.

    Args:
        img: (H, W[, C]) array.
        matrix: 2x3 array, rows (a, b, tx) and (c, d, ty).
    """
    img = np.asarray(img)
    h, w = img.shape[:2]
    m = np.asarray(matrix, dtype=np.float64)
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    src_x = m[0, 0] * cols + m[0, 1] * rows + m[0, 2]
    src_y = m[1, 0] * cols + m[1, 1] * rows + m[1, 2]
    return _sample_bilinear(img, src_y, src_x)
