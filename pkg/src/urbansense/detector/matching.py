"""Assignment of default boxes to ground-truth boxes for loss computation."""

from dataclasses import dataclass

import numpy as np

from .boxes import center_to_corner, jaccard


@dataclass
class MatchAssignment:
    """Per-default-box match state.

    ``matched_gt[i]`` is the ground-truth index matched to default box i, or
    -1 for a negative. ``matched_class[i]`` is that ground truth's class
    index (0, background, for negatives). Positives and negatives partition
    the default boxes.
    """

    matched_gt: np.ndarray
    matched_class: np.ndarray

    @property
    def pos(self):
        return self.matched_gt >= 0

    @property
    def neg(self):
        return self.matched_gt < 0

    @property
    def num_pos(self):
        return int(np.count_nonzero(self.pos))


def match(gt_boxes, gt_classes, defaults, threshold=0.5):
    """Match defaults to ground truths per the two matching rules.

    (a) every ground truth is force-matched to its best-overlap default box
    (greedy over ground truths in order, skipping defaults already forced,
    so each ground truth keeps at least one positive); (b) every remaining
    default whose best overlap exceeds ``threshold`` matches that best
    ground truth. Ties break to the lowest index.

    Args:
        gt_boxes: (G, 4) corner-form boxes; G may be 0.
        gt_classes: (G,) integer class indices (>= 1).
        defaults: (D, 4) center-form default boxes.
        threshold: overlap strictly above this matches in phase (b).

    Returns:
        MatchAssignment with N = number of positives (0 when G = 0).
    """
    defaults = np.asarray(defaults, dtype=np.float64)
    d = len(defaults)
    matched_gt = np.full(d, -1, dtype=np.int64)
    matched_class = np.zeros(d, dtype=np.int64)
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    if len(gt_boxes) == 0:
        return MatchAssignment(matched_gt, matched_class)
    gt_classes = np.asarray(gt_classes, dtype=np.int64)

    overlaps = jaccard(gt_boxes, center_to_corner(defaults))  # (G, D)

    forced = np.zeros(d, dtype=bool)
    for j in range(len(gt_boxes)):
        order = np.argsort(-overlaps[j], kind="stable")  # ties -> lowest index
        for i in order:
            if not forced[i]:
                forced[i] = True
                matched_gt[i] = j
                matched_class[i] = gt_classes[j]
                break

    best_gt = np.argmax(overlaps, axis=0)  # ties -> lowest index
    best_overlap = overlaps[best_gt, np.arange(d)]
    take = (~forced) & (best_overlap > threshold)
    matched_gt[take] = best_gt[take]
    matched_class[take] = gt_classes[best_gt[take]]
    return MatchAssignment(matched_gt, matched_class)
