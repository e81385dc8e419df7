"""Detection records and greedy non-maximum suppression."""

from dataclasses import dataclass

import numpy as np

from .boxes import jaccard


@dataclass(frozen=True)
class Detection:
    """One detected object: class name, post-softmax score, corner box
    (normalized coordinates, clipped to [0, 1])."""

    class_name: str
    score: float
    box: tuple

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        x0, y0, x1, y1 = self.box
        if x0 > x1 or y0 > y1:
            raise ValueError(f"inverted box {self.box}")


def nms(dets, iou_threshold=0.45, top_k=200):
    """Greedy per-class suppression.

    Sort by score descending (ties keep input order), repeatedly keep the
    best remaining detection and drop everything overlapping it by more
    than ``iou_threshold``; stop after ``top_k`` survivors. Call this with
    detections of a single class.
    """
    if not dets:
        return []
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    boxes = np.asarray([dets[i].box for i in order], dtype=np.float64)
    overlaps = jaccard(boxes, boxes)
    alive = np.ones(len(order), dtype=bool)
    kept = []
    for i in range(len(order)):
        if not alive[i]:
            continue
        kept.append(dets[order[i]])
        if len(kept) >= top_k:
            break
        alive &= ~(overlaps[i] > iou_threshold)
        alive[i] = False
    return kept
