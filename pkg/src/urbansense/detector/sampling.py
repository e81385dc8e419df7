"""Random patch sampling for detector training augmentation.

Each draw picks a constraint from a menu: keep the whole image, require a
minimum Jaccard overlap with at least one object, or crop unconstrained.
"""

import numpy as np

from .boxes import jaccard

WHOLE_IMAGE = "whole"
RANDOM_PATCH = "random"
MIN_JACCARD_CHOICES = (0.1, 0.3, 0.5, 0.7, 0.9)

# the per-step sampling menu: whole image, each overlap floor, free crop
CONSTRAINT_MENU = (WHOLE_IMAGE,) + MIN_JACCARD_CHOICES + (RANDOM_PATCH,)


def sample_patch(image, gt_boxes, gt_classes, constraint, rng, trials=50,
                 min_side_frac=0.3):
    """Crop a random sub-rectangle honoring ``constraint``; remap the boxes.

    Args:
        image: (H, W, 3) array.
        gt_boxes: (G, 4) absolute-pixel corner boxes.
        gt_classes: (G,) class indices, carried through.
        constraint: WHOLE_IMAGE, RANDOM_PATCH, or a float minimum Jaccard
            overlap that the patch must reach against at least one box.
        rng: numpy Generator.
        trials: attempts before falling back to the whole image.

    Ground-truth boxes are translated into patch coordinates, dropped when
    their center falls outside the patch, and clipped to the patch bounds.

    Returns:
        (patch, boxes, classes) -- never fails; the fallback is the input.
    """
    image = np.asarray(image)
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    gt_classes = np.asarray(gt_classes)
    h, w = image.shape[:2]
    if constraint == WHOLE_IMAGE or len(gt_boxes) == 0:
        return image, gt_boxes.copy(), gt_classes.copy()
    if constraint != RANDOM_PATCH:
        min_overlap = float(constraint)
        if not any(np.isclose(min_overlap, c) for c in MIN_JACCARD_CHOICES):
            raise ValueError(f"unsupported min-jaccard constraint {constraint!r}")

    for _ in range(trials):
        pw = int(rng.uniform(min_side_frac, 1.0) * w)
        ph = int(rng.uniform(min_side_frac, 1.0) * h)
        if pw < 1 or ph < 1:
            continue
        left = int(rng.integers(0, w - pw + 1))
        top = int(rng.integers(0, h - ph + 1))
        patch_box = np.array([left, top, left + pw, top + ph], dtype=np.float64)

        if constraint != RANDOM_PATCH:
            overlaps = jaccard(patch_box[None], gt_boxes)[0]
            if overlaps.max() < min_overlap:
                continue

        centers = (gt_boxes[:, :2] + gt_boxes[:, 2:]) / 2.0
        inside = ((centers[:, 0] >= left) & (centers[:, 0] < left + pw)
                  & (centers[:, 1] >= top) & (centers[:, 1] < top + ph))
        if constraint != RANDOM_PATCH and not inside.any():
            continue

        shifted = gt_boxes[inside] - np.array([left, top, left, top], dtype=np.float64)
        shifted[:, 0::2] = shifted[:, 0::2].clip(0, pw)
        shifted[:, 1::2] = shifted[:, 1::2].clip(0, ph)
        patch = image[top:top + ph, left:left + pw]
        return patch, shifted, gt_classes[inside].copy()

    return image, gt_boxes.copy(), gt_classes.copy()
