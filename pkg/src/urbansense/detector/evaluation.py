"""Detection quality measures: recall of ground truths and VOC-style AP."""

import numpy as np

from .boxes import jaccard
from .model import detect


def recovered_ground_truths(dets, gt_boxes, gt_classes, class_names, iou=0.5):
    """Boolean per ground truth: is there a same-class detection with
    overlap >= iou?  Each detection can cover several ground truths here;
    this is the loose "did we find it at all" measure."""
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    found = np.zeros(len(gt_boxes), dtype=bool)
    for det in dets:
        class_idx = class_names.index(det.class_name) + 1
        for j in range(len(gt_boxes)):
            if gt_classes[j] == class_idx and not found[j]:
                if jaccard(np.asarray(det.box), gt_boxes[j]) >= iou:
                    found[j] = True
    return found


def average_precision(scores, is_tp, num_gt):
    """All-point interpolated AP from ranked detection outcomes."""
    if num_gt == 0:
        return float("nan")
    if len(scores) == 0:
        return 0.0
    order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
    tp = np.asarray(is_tp, dtype=np.float64)[order]
    fp = 1.0 - tp
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(fp)
    recall = cum_tp / num_gt
    precision = cum_tp / np.maximum(cum_tp + cum_fp, 1e-12)
    # precision envelope, integrated over recall
    mrec = np.concatenate([[0.0], recall, [recall[-1]]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    idx = np.flatnonzero(mrec[1:] != mrec[:-1]) + 1
    return float(np.sum((mrec[idx] - mrec[idx - 1]) * mpre[idx]))


def _greedy_tp_flags(dets, gt_boxes, iou):
    """Greedy score-ordered matching; each ground truth claims one TP."""
    claimed = np.zeros(len(gt_boxes), dtype=bool)
    flags = []
    for det in sorted(dets, key=lambda d: -d.score):
        best, best_ov = -1, iou
        for j in range(len(gt_boxes)):
            if claimed[j]:
                continue
            ov = jaccard(np.asarray(det.box), gt_boxes[j])
            if ov >= best_ov:
                best, best_ov = j, ov
        if best >= 0:
            claimed[best] = True
            flags.append(True)
        else:
            flags.append(False)
    return [d.score for d in sorted(dets, key=lambda d: -d.score)], flags


def per_image_map(dets, gt_boxes, gt_classes, class_names, iou=0.5):
    """Mean AP over the classes present in one image's ground truth."""
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    gt_classes = np.asarray(gt_classes)
    aps = []
    for k, name in enumerate(class_names, start=1):
        mask = gt_classes == k
        if not mask.any():
            continue
        class_dets = [d for d in dets if d.class_name == name]
        scores, flags = _greedy_tp_flags(class_dets, gt_boxes[mask], iou)
        aps.append(average_precision(scores, flags, int(mask.sum())))
    return float(np.mean(aps)) if aps else float("nan")


def evaluate_on_dataset(net, ds, score_threshold=None, iou=0.5):
    """Run the detector over a DetectionDataset in normalized coordinates.

    Returns a dict with per-image mAP values, their mean, and total ground
    truth recall at the given overlap.
    """
    per_image = []
    found_total, gt_total = 0, 0
    class_names = net.config.class_names
    for i in range(len(ds)):
        img = ds.load_image(i)
        h, w = img.shape[:2]
        scale = np.array([w, h, w, h], dtype=np.float64)
        gt_norm = ds.boxes(i) / scale
        dets = detect(net, img, score_threshold=score_threshold)
        per_image.append(per_image_map(dets, gt_norm, ds.labels(i), class_names, iou))
        found = recovered_ground_truths(dets, gt_norm, ds.labels(i), list(class_names), iou)
        found_total += int(found.sum())
        gt_total += len(found)
    clean = [m for m in per_image if not np.isnan(m)]
    return {
        "per_image_map": per_image,
        "mean_map": float(np.mean(clean)) if clean else float("nan"),
        "recall": found_total / gt_total if gt_total else float("nan"),
        "ground_truths": gt_total,
        "recovered": found_total,
    }
