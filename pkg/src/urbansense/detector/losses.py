"""Multibox training loss: softmax confidence + smooth-L1 localization.

The total loss is (L_conf + alpha * L_loc) / N over one image, where N is
the number of positive (matched) default boxes; with no matches the loss is
defined as exactly 0. Negatives entering L_conf are chosen by hard-negative
mining at a fixed ratio to positives.
"""

import numpy as np

from .boxes import corner_to_center, encode_offsets
from .matching import match


def smooth_l1(d):
    """0.5 d^2 for |d| < 1, else |d| - 0.5 (C1-continuous), elementwise."""
    d = np.asarray(d, dtype=np.float64)
    a = np.abs(d)
    out = np.where(a < 1.0, 0.5 * d * d, a - 0.5)
    return float(out) if out.ndim == 0 else out


def smooth_l1_grad(d):
    """Derivative of smooth_l1: d clipped to [-1, 1]."""
    return np.clip(np.asarray(d, dtype=np.float64), -1.0, 1.0)


def _log_softmax(logits):
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def per_box_background_loss(conf_logits):
    """-log softmax(c)_0 per default box: the cost of calling it background."""
    return -_log_softmax(conf_logits)[:, 0]


def hard_negative_mine(background_losses, assignment, ratio=3.0):
    """Indices of the hardest negatives, at most ratio * N of them.

    Hardness is the background confidence loss; ties break to the lower
    box index. With no positives the set is empty.
    """
    if ratio <= 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    neg_idx = np.flatnonzero(assignment.neg)
    budget = min(int(ratio * assignment.num_pos), len(neg_idx))
    if budget == 0:
        return np.empty(0, dtype=np.int64)
    losses = np.asarray(background_losses, dtype=np.float64)[neg_idx]
    order = np.argsort(-losses, kind="stable")  # stable: ties keep index order
    return neg_idx[order[:budget]]


def confidence_loss(conf_logits, assignment, neg_set):
    """Softmax confidence loss over positives plus the given negatives.

    -sum_{i in Pos} log softmax(c_i)_{p_i} - sum_{i in neg_set} log
    softmax(c_i)_0, where p_i is box i's matched class and class 0 is
    background.
    """
    conf_logits = np.asarray(conf_logits, dtype=np.float64)
    if conf_logits.ndim != 2 or len(conf_logits) != len(assignment.matched_gt):
        raise ValueError(
            f"conf_logits shape {conf_logits.shape} does not cover "
            f"{len(assignment.matched_gt)} default boxes")
    logp = _log_softmax(conf_logits)
    pos_idx = np.flatnonzero(assignment.pos)
    total = -float(np.sum(logp[pos_idx, assignment.matched_class[pos_idx]]))
    neg_set = np.asarray(neg_set, dtype=np.int64)
    total -= float(np.sum(logp[neg_set, 0]))
    return total


def localization_loss(loc_preds, gt_boxes, assignment, defaults):
    """Smooth-L1 distance between predicted offsets and encoded targets,
    summed over positive boxes and the four box parameters."""
    pos_idx = np.flatnonzero(assignment.pos)
    if len(pos_idx) == 0:
        return 0.0
    loc_preds = np.asarray(loc_preds, dtype=np.float64)
    gt_centers = corner_to_center(np.asarray(gt_boxes, dtype=np.float64))
    targets = encode_offsets(gt_centers[assignment.matched_gt[pos_idx]],
                             np.asarray(defaults)[pos_idx])
    return float(np.sum(smooth_l1(loc_preds[pos_idx] - targets)))


def multibox_loss(conf_logits, loc_preds, gt_boxes, gt_classes, defaults,
                  alpha=1.0, match_threshold=0.5, neg_ratio=3.0):
    """Scalar training loss for one image; see the module docstring."""
    loss, _, _ = multibox_loss_with_grads(
        conf_logits, loc_preds, gt_boxes, gt_classes, defaults,
        alpha=alpha, match_threshold=match_threshold, neg_ratio=neg_ratio)
    return loss


def multibox_loss_with_grads(conf_logits, loc_preds, gt_boxes, gt_classes,
                             defaults, alpha=1.0, match_threshold=0.5,
                             neg_ratio=3.0):
    """Loss plus analytic gradients w.r.t. conf_logits and loc_preds.

    Returns (loss, dloss/dconf_logits, dloss/dloc_preds); the gradient
    arrays match their inputs' shapes and are zero everywhere when there
    are no positives.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    conf_logits = np.asarray(conf_logits, dtype=np.float64)
    loc_preds = np.asarray(loc_preds, dtype=np.float64)
    defaults = np.asarray(defaults, dtype=np.float64)

    assignment = match(gt_boxes, gt_classes, defaults, threshold=match_threshold)
    n = assignment.num_pos
    dconf = np.zeros_like(conf_logits)
    dloc = np.zeros_like(loc_preds)
    if n == 0:
        return 0.0, dconf, dloc

    neg_set = hard_negative_mine(per_box_background_loss(conf_logits),
                                 assignment, ratio=neg_ratio)
    l_conf = confidence_loss(conf_logits, assignment, neg_set)
    l_loc = localization_loss(loc_preds, gt_boxes, assignment, defaults)
    loss = (l_conf + alpha * l_loc) / n

    # d(-log softmax_p)/dlogits = softmax - onehot(p)
    probs = np.exp(_log_softmax(conf_logits))
    pos_idx = np.flatnonzero(assignment.pos)
    dconf[pos_idx] = probs[pos_idx]
    dconf[pos_idx, assignment.matched_class[pos_idx]] -= 1.0
    dconf[neg_set] = probs[neg_set]
    dconf[neg_set, 0] -= 1.0
    dconf /= n

    gt_centers = corner_to_center(np.asarray(gt_boxes, dtype=np.float64))
    targets = encode_offsets(gt_centers[assignment.matched_gt[pos_idx]],
                             defaults[pos_idx])
    dloc[pos_idx] = smooth_l1_grad(loc_preds[pos_idx] - targets) * (alpha / n)
    return loss, dconf, dloc
