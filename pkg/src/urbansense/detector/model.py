"""Single-shot multibox detector on a small convolutional backbone.

The backbone is a stack of conv/relu/pool stages; the last ``feature_levels``
stage outputs each feed a pair of 3x3 convolutional heads predicting, per
default box, class logits and box offsets. One forward pass yields every
detection candidate; training minimizes the multibox loss.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import nnet
from ..image import hflip, prepare_square
from ..nnet.layers import Activation, Conv2d, MaxPool2d
from .anchors import DefaultBoxSpec, generate_default_boxes, linear_scales
from .boxes import center_to_corner, clip_to_unit, decode_offsets
from .detections import Detection, nms
from .losses import multibox_loss_with_grads
from .sampling import CONSTRAINT_MENU, sample_patch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorConfig:
    """Architecture, default-box layout, and training knobs.

    ``optimizer`` is "adam" (default, learning_rate 1e-3) or "sgd-momentum"
    (the published large-scale recipe: learning rate 0.1, momentum 0.9 --
    far too hot for a small backbone, kept as an opt-in preset).
    """

    input_side: int = 300
    class_names: tuple = ("person", "car", "bus", "motorbike")
    stage_filters: tuple = (16, 32, 48, 64)
    feature_levels: int = 2
    kernel_size: int = 3
    aspect_ratios: tuple = (1.0, 2.0, 0.5)
    s_min: float = 0.2
    s_max: float = 0.9
    match_threshold: float = 0.5
    neg_ratio: float = 3.0
    alpha: float = 1.0
    nms_iou: float = 0.45
    top_k: int = 200
    score_threshold: float = 0.5
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 8
    train_steps: int = 600
    # learning rate multiplies by lr_decay_factor after this fraction of steps
    lr_decay_fraction: float = 1.0
    lr_decay_factor: float = 0.1
    augment: bool = True
    dtype: str = "float32"

    def __post_init__(self):
        if self.input_side < 2 ** len(self.stage_filters):
            raise ValueError("input_side too small for the pooling chain")
        if not 1 <= self.feature_levels <= len(self.stage_filters):
            raise ValueError("feature_levels must address trailing stages")
        if not self.class_names:
            raise ValueError("need at least one object class")
        if self.optimizer not in ("adam", "sgd-momentum"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        for v in (self.match_threshold, self.nms_iou, self.score_threshold):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"thresholds must be in [0, 1], got {v}")

    @property
    def num_classes(self):
        """Object classes plus background (index 0)."""
        return len(self.class_names) + 1

    @property
    def grid_sizes(self):
        side = self.input_side
        sides = []
        for _ in self.stage_filters:
            side //= 2
            sides.append(side)
        return tuple(sides[-self.feature_levels:])

    def default_box_spec(self):
        return DefaultBoxSpec(
            grid_sizes=self.grid_sizes,
            scales=linear_scales(self.feature_levels, self.s_min, self.s_max),
            aspect_ratios=self.aspect_ratios)

    @classmethod
    def desk(cls, **overrides):
        base = dict(input_side=64, stage_filters=(12, 16, 24, 32),
                    feature_levels=3, batch_size=8, train_steps=600,
                    aspect_ratios=(1.0, 2.0, 0.5, 3.0, 1.0 / 3.0),
                    s_min=0.1, s_max=0.4)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def overfit(cls, **overrides):
        """Desk-scale preset tuned to memorize a tiny dataset."""
        base = dict(augment=False, train_steps=1500, lr_decay_fraction=0.7)
        base.update(overrides)
        return cls.desk(**base)


class DetectorNet:
    """Backbone stages plus per-level loc/conf heads, hand-wired backward."""

    def __init__(self, config, seed=0):
        self.config = config
        self.seed = int(seed)
        dtype = np.dtype(config.dtype)
        self.dtype = dtype
        spec = config.default_box_spec()
        self.box_spec = spec
        self.defaults = generate_default_boxes(spec)

        k = config.kernel_size
        a = spec.boxes_per_cell
        seeds = iter(np.random.SeedSequence(self.seed).spawn(
            len(config.stage_filters) + 2 * config.feature_levels))
        self.stages = []
        in_ch = 3
        for filters in config.stage_filters:
            rng = np.random.Generator(np.random.PCG64(next(seeds)))
            self.stages.append([
                Conv2d(filters, k, in_ch, padding="same", rng=rng, dtype=dtype),
                Activation("relu"),
                MaxPool2d(2),
            ])
            in_ch = filters
        self._head_stage_offset = len(config.stage_filters) - config.feature_levels
        self._train_shapes = None
        self.loc_heads, self.conf_heads = [], []
        for level in range(config.feature_levels):
            ch = config.stage_filters[self._head_stage_offset + level]
            rng = np.random.Generator(np.random.PCG64(next(seeds)))
            self.loc_heads.append(Conv2d(a * 4, k, ch, padding="same",
                                         rng=rng, dtype=dtype))
            rng = np.random.Generator(np.random.PCG64(next(seeds)))
            self.conf_heads.append(Conv2d(a * config.num_classes, k, ch,
                                          padding="same", rng=rng, dtype=dtype))

    # -- forward / backward -------------------------------------------------

    def forward(self, x, train=False):
        """(B, S, S, 3) -> (conf (B, D, K+1), loc (B, D, 4)).

        Default-box ordering matches anchors.generate_default_boxes:
        level-major, row-major over cells, ratio innermost.
        """
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 4 or x.shape[1:] != (self.config.input_side,) * 2 + (3,):
            raise nnet.ShapeError(
                f"detector input must be (B, {self.config.input_side}, "
                f"{self.config.input_side}, 3), got {x.shape}")
        feats = []
        for stage in self.stages:
            for layer in stage:
                layer.clear_cache()
                x = layer.forward(x, train=train)
            feats.append(x)
        feats = feats[self._head_stage_offset:]

        conf_parts, loc_parts = [], []
        b = x.shape[0]
        kplus = self.config.num_classes
        for level, feat in enumerate(feats):
            self.loc_heads[level].clear_cache()
            self.conf_heads[level].clear_cache()
            loc = self.loc_heads[level].forward(feat, train=train)
            conf = self.conf_heads[level].forward(feat, train=train)
            f = feat.shape[1]
            loc_parts.append(loc.reshape(b, f * f * self.box_spec.boxes_per_cell, 4))
            conf_parts.append(conf.reshape(b, f * f * self.box_spec.boxes_per_cell, kplus))
        self._train_shapes = [f.shape for f in feats] if train else None
        return np.concatenate(conf_parts, axis=1), np.concatenate(loc_parts, axis=1)

    def backward(self, dconf, dloc):
        """Back-propagate loss gradients through heads and backbone."""
        if self._train_shapes is None:
            raise RuntimeError("backward() requires a prior forward(train=True)")
        a = self.box_spec.boxes_per_cell
        kplus = self.config.num_classes
        b = dconf.shape[0]
        level_grads = []
        start = 0
        for shape in self._train_shapes:
            f = shape[1]
            count = f * f * a
            dl = dloc[:, start:start + count].reshape(b, f, f, a * 4)
            dc = dconf[:, start:start + count].reshape(b, f, f, a * kplus)
            level_grads.append((dl.astype(self.dtype), dc.astype(self.dtype)))
            start += count

        g = None
        for s in range(len(self.stages) - 1, -1, -1):
            level = s - self._head_stage_offset
            if level >= 0:
                dl, dc = level_grads[level]
                head_grad = (self.loc_heads[level].backward(dl)
                             + self.conf_heads[level].backward(dc))
                g = head_grad if g is None else g + head_grad
            for layer in reversed(self.stages[s]):
                g = layer.backward(g)
        self._train_shapes = None
        return g

    # -- parameter plumbing ---------------------------------------------------

    def parameters(self):
        out = []
        for s, stage in enumerate(self.stages):
            for key, val in stage[0].params.items():
                out.append((f"stage{s}.{key}", val))
        for l, head in enumerate(self.loc_heads):
            for key, val in head.params.items():
                out.append((f"loc{l}.{key}", val))
        for l, head in enumerate(self.conf_heads):
            for key, val in head.params.items():
                out.append((f"conf{l}.{key}", val))
        return out

    def gradients(self):
        out = []
        for s, stage in enumerate(self.stages):
            for key in stage[0].params:
                out.append((f"stage{s}.{key}", stage[0].grads[key]))
        for l, head in enumerate(self.loc_heads):
            for key in head.params:
                out.append((f"loc{l}.{key}", head.grads[key]))
        for l, head in enumerate(self.conf_heads):
            for key in head.params:
                out.append((f"conf{l}.{key}", head.grads[key]))
        return out

    def set_parameters(self, named):
        current = dict(self.parameters())
        for name, arr in named.items():
            if name not in current:
                raise KeyError(f"unknown parameter {name!r}")
            current[name][...] = arr.astype(self.dtype)

    def num_parameters(self):
        return sum(int(v.size) for _, v in self.parameters())

    # -- persistence ----------------------------------------------------------

    def save(self, path, history=None):
        cfg = self.config
        meta = {
            "kind": "detector",
            "seed": self.seed,
            "config": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in cfg.__dict__.items()},
            "class_names": list(cfg.class_names),
            "default_box_spec": {
                "grid_sizes": list(self.box_spec.grid_sizes),
                "scales": list(self.box_spec.scales),
                "aspect_ratios": list(self.box_spec.aspect_ratios),
            },
            "thresholds": {"match": cfg.match_threshold, "nms_iou": cfg.nms_iou,
                           "score": cfg.score_threshold},
            "history": history,
        }
        nnet.save_checkpoint(path, meta, dict(self.parameters()))

    @classmethod
    def load(cls, path):
        meta, arrays = nnet.load_checkpoint(path)
        if meta.get("kind") != "detector":
            raise ValueError(f"{path} is not a detector checkpoint")
        raw = meta["config"]
        cfg = DetectorConfig(**{k: (tuple(v) if isinstance(v, list) else v)
                                for k, v in raw.items()})
        net = cls(cfg, seed=meta["seed"])
        net.set_parameters(arrays)
        return net


def build_detector(cfg, seed=0):
    return DetectorNet(cfg, seed=seed)


def _normalized_gts(boxes, shape):
    h, w = shape[:2]
    scale = np.array([w, h, w, h], dtype=np.float64)
    return clip_to_unit(np.asarray(boxes, dtype=np.float64).reshape(-1, 4) / scale)


def train_detector(net, data, seed=0):
    """Minimize the multibox loss over ``data``; returns per-step losses.

    Batches are drawn with replacement; with ``config.augment`` each image
    first passes through the patch-sampling menu and a coin-flip mirror.
    Deterministic given (net, data, seed).
    """
    cfg = net.config
    if len(data) == 0:
        raise ValueError("training dataset is empty")
    rng = np.random.default_rng(seed)
    params = [p for _, p in net.parameters()]
    if cfg.optimizer == "adam":
        state = nnet.init_adam(params, learning_rate=cfg.learning_rate)
        step_fn = nnet.adam_step
    else:
        state = nnet.init_momentum(params, learning_rate=cfg.learning_rate,
                                   momentum=cfg.momentum)
        step_fn = nnet.momentum_step

    losses = []
    decay_step = int(cfg.lr_decay_fraction * cfg.train_steps)
    for step in range(cfg.train_steps):
        if step == decay_step and cfg.lr_decay_fraction < 1.0:
            state.learning_rate *= cfg.lr_decay_factor
        idx = rng.integers(0, len(data), cfg.batch_size)
        xs = np.empty((cfg.batch_size, cfg.input_side, cfg.input_side, 3))
        gts = []
        for row, i in enumerate(idx):
            img = data.load_image(i)
            boxes = data.boxes(i)
            labels = data.labels(i)
            if cfg.augment:
                constraint = CONSTRAINT_MENU[rng.integers(len(CONSTRAINT_MENU))]
                img, boxes, labels = sample_patch(img, boxes, labels, constraint, rng)
                if rng.random() < 0.5:
                    img = hflip(img)
                    w = img.shape[1]
                    boxes = boxes.copy()
                    boxes[:, [0, 2]] = w - boxes[:, [2, 0]]
            xs[row] = prepare_square(img, cfg.input_side)
            gts.append((_normalized_gts(boxes, img.shape), labels))

        conf, loc = net.forward(xs, train=True)
        conf64 = np.asarray(conf, dtype=np.float64)
        loc64 = np.asarray(loc, dtype=np.float64)
        dconf = np.zeros_like(conf64)
        dloc = np.zeros_like(loc64)
        batch_loss = 0.0
        for b, (boxes_n, labels) in enumerate(gts):
            loss_b, dc, dl = multibox_loss_with_grads(
                conf64[b], loc64[b], boxes_n, labels, net.defaults,
                alpha=cfg.alpha, match_threshold=cfg.match_threshold,
                neg_ratio=cfg.neg_ratio)
            batch_loss += loss_b / cfg.batch_size
            dconf[b] = dc / cfg.batch_size
            dloc[b] = dl / cfg.batch_size
        net.backward(dconf, dloc)
        grads = [g for _, g in net.gradients()]
        step_fn(params, grads, state)
        losses.append(batch_loss)
        if (step + 1) % 100 == 0:
            log.info("detector step %d: loss %.4f", step + 1, batch_loss)
    return losses


def detect(net, image, score_threshold=None):
    """Run the detector on one decoded image.

    Forward pass, per-box softmax and offset decoding, per-class score
    filter (strictly above the threshold) and NMS, then one merged list
    sorted by descending score.
    """
    cfg = net.config
    threshold = cfg.score_threshold if score_threshold is None else float(score_threshold)
    x = prepare_square(image, cfg.input_side)
    conf, loc = net.forward(x[None], train=False)
    probs = nnet.softmax(np.asarray(conf[0], dtype=np.float64), axis=-1)
    boxes = clip_to_unit(center_to_corner(decode_offsets(
        np.asarray(loc[0], dtype=np.float64), net.defaults)))

    merged = []
    for k, name in enumerate(cfg.class_names, start=1):
        scores = probs[:, k]
        keep = np.flatnonzero(scores > threshold)
        dets = [Detection(class_name=name, score=float(scores[i]),
                          box=tuple(boxes[i]))
                for i in keep]
        merged.extend(nms(dets, iou_threshold=cfg.nms_iou, top_k=cfg.top_k))
    merged.sort(key=lambda d: -d.score)
    return merged
