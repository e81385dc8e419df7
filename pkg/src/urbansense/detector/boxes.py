"""Box geometry: corner/center conversion, Jaccard overlap, offset coding.

Boxes are rows of length-4 float arrays. Corner form is (xmin, ymin, xmax,
ymax); center form is (cx, cy, w, h). Coordinates are normalized to [0, 1]
in the detector pipeline, but every function here is scale-free.
"""

import numpy as np


def corner_to_center(boxes):
    """(xmin, ymin, xmax, ymax) -> (cx, cy, w, h)."""
    boxes = np.asarray(boxes, dtype=np.float64)
    wh = boxes[..., 2:] - boxes[..., :2]
    return np.concatenate([boxes[..., :2] + wh / 2.0, wh], axis=-1)


def center_to_corner(boxes):
    """(cx, cy, w, h) -> (xmin, ymin, xmax, ymax)."""
    boxes = np.asarray(boxes, dtype=np.float64)
    half = boxes[..., 2:] / 2.0
    return np.concatenate([boxes[..., :2] - half, boxes[..., :2] + half], axis=-1)


def area(boxes):
    boxes = np.asarray(boxes, dtype=np.float64)
    return ((boxes[..., 2] - boxes[..., 0]).clip(min=0.0)
            * (boxes[..., 3] - boxes[..., 1]).clip(min=0.0))


def intersect(a, b):
    """Pairwise intersection areas, shape (len(a), len(b)); corner form."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    lt = np.maximum(a[:, None, :2], b[None, :, :2])
    rb = np.minimum(a[:, None, 2:], b[None, :, 2:])
    wh = (rb - lt).clip(min=0.0)
    return wh[..., 0] * wh[..., 1]


def jaccard(a, b):
    """Pairwise intersection-over-union for corner boxes.

    Returns shape (len(a), len(b)); pairs with an empty union score 0.
    """
    a2 = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b2 = np.atleast_2d(np.asarray(b, dtype=np.float64))
    inter = intersect(a2, b2)
    union = area(a2)[:, None] + area(b2)[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    if np.asarray(a).ndim == 1 and np.asarray(b).ndim == 1:
        return float(out[0, 0])
    return out


def clip_to_unit(boxes):
    """Clip corner boxes into the unit square."""
    return np.clip(np.asarray(boxes, dtype=np.float64), 0.0, 1.0)


def encode_offsets(gt, default):
    """Regression target of ground-truth box(es) against default box(es).

    Both arguments are center-form and must have positive width and height.
    Target is ((g_cx - d_cx)/d_w, (g_cy - d_cy)/d_h, log(g_w/d_w),
    log(g_h/d_h)).
    """
    gt = np.asarray(gt, dtype=np.float64)
    default = np.asarray(default, dtype=np.float64)
    if np.any(gt[..., 2:] <= 0):
        raise ValueError("degenerate (zero-area) ground-truth box")
    if np.any(default[..., 2:] <= 0):
        raise ValueError("degenerate default box")
    txy = (gt[..., :2] - default[..., :2]) / default[..., 2:]
    twh = np.log(gt[..., 2:] / default[..., 2:])
    return np.concatenate([txy, twh], axis=-1)


def decode_offsets(offsets, default):
    """Exact inverse of :func:`encode_offsets`; returns center form."""
    offsets = np.asarray(offsets, dtype=np.float64)
    default = np.asarray(default, dtype=np.float64)
    xy = offsets[..., :2] * default[..., 2:] + default[..., :2]
    wh = np.exp(offsets[..., 2:]) * default[..., 2:]
    return np.concatenate([xy, wh], axis=-1)
