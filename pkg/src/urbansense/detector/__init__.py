"""Single-shot multibox detection: geometry, matching, loss, model, NMS."""

from .anchors import DefaultBoxSpec, generate_default_boxes, linear_scales
from .boxes import (
    center_to_corner,
    clip_to_unit,
    corner_to_center,
    decode_offsets,
    encode_offsets,
    jaccard,
)
from .detections import Detection, nms
from .evaluation import evaluate_on_dataset, per_image_map, recovered_ground_truths
from .losses import (
    confidence_loss,
    hard_negative_mine,
    localization_loss,
    multibox_loss,
    multibox_loss_with_grads,
    per_box_background_loss,
    smooth_l1,
    smooth_l1_grad,
)
from .matching import MatchAssignment, match
from .model import DetectorConfig, DetectorNet, build_detector, detect, train_detector
from .sampling import (
    CONSTRAINT_MENU,
    MIN_JACCARD_CHOICES,
    RANDOM_PATCH,
    WHOLE_IMAGE,
    sample_patch,
)

__all__ = [
    "CONSTRAINT_MENU",
    "DefaultBoxSpec",
    "Detection",
    "DetectorConfig",
    "DetectorNet",
    "MIN_JACCARD_CHOICES",
    "MatchAssignment",
    "RANDOM_PATCH",
    "WHOLE_IMAGE",
    "build_detector",
    "center_to_corner",
    "clip_to_unit",
    "confidence_loss",
    "corner_to_center",
    "decode_offsets",
    "detect",
    "encode_offsets",
    "evaluate_on_dataset",
    "generate_default_boxes",
    "hard_negative_mine",
    "jaccard",
    "linear_scales",
    "localization_loss",
    "match",
    "multibox_loss",
    "multibox_loss_with_grads",
    "nms",
    "per_box_background_loss",
    "per_image_map",
    "recovered_ground_truths",
    "sample_patch",
    "smooth_l1",
    "smooth_l1_grad",
    "train_detector",
]
