"""Binary planned/unplanned urban-scene classifier.

The network reads a square RGB raster and emits one sigmoid probability,
read as "probability the scene is unplanned". Images scored at or above the
decision threshold are labeled unplanned.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import nnet
from .datasets import DatasetError, LABEL_TO_INDEX, augment_classification
from .image import prepare_square

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlumsNetConfig:
    """Architecture and training regime.

    The defaults are the full-scale recipe (200px input, 32/32/32/128
    filters, 256/64 dense, batch 32, 3 epochs of 9000 train / 2000
    validation steps); :meth:`desk` shrinks everything to laptop-test scale.
    """

    input_side: int = 200
    conv_filters: tuple = (32, 32, 32, 128)
    kernel_size: int = 3
    pool_size: int = 2
    dense_widths: tuple = (256, 64)
    dropout_rates: tuple = (0.5, 0.5)
    batch_size: int = 32
    epochs: int = 3
    steps_per_epoch: int = 9000
    validation_steps: int = 2000
    learning_rate: float = 1e-3
    threshold: float = 0.5
    dtype: str = "float32"

    def __post_init__(self):
        if self.input_side < 8:
            raise ValueError(f"input_side must be >= 8, got {self.input_side}")
        if len(self.conv_filters) != 4:
            raise ValueError("conv_filters must list four conv layers")
        for group in (self.conv_filters, self.dense_widths,
                      (self.kernel_size, self.pool_size, self.batch_size,
                       self.epochs, self.steps_per_epoch)):
            if any(int(v) < 1 for v in group):
                raise ValueError(f"all size/count settings must be >= 1: {group}")
        if len(self.dropout_rates) != len(self.dense_widths):
            raise ValueError("need one dropout rate per hidden dense layer")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")

    @classmethod
    def desk(cls, **overrides):
        """Small config for fast CPU runs (tests, demos, synthetic data)."""
        base = dict(input_side=32, conv_filters=(8, 8, 8, 16),
                    dense_widths=(32, 16), dropout_rates=(0.1, 0.0),
                    batch_size=16, epochs=3, steps_per_epoch=200,
                    validation_steps=50)
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class PlanningStatus:
    """Classifier verdict for one image."""

    probability_unplanned: float
    label: str
    threshold: float

    @classmethod
    def from_probability(cls, p, threshold):
        label = "unplanned" if p >= threshold else "planned"
        return cls(probability_unplanned=float(p), label=label,
                   threshold=float(threshold))


@dataclass
class TrainingHistory:
    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    val_accuracies: list = field(default_factory=list)

    def write_metrics(self, path):
        """Plain-text metrics log: one "step loss" record per line."""
        with open(path, "w", encoding="utf-8") as fh:
            for step, loss in enumerate(self.train_losses):
                fh.write(f"{step} {loss:.9f}\n")

    def as_dict(self):
        return {"train_losses": self.train_losses,
                "val_losses": self.val_losses,
                "val_accuracies": self.val_accuracies}


def build_slumsnet(cfg, seed=0):
    """Materialize the classifier network for ``cfg``.

    Chain: conv - conv - pool - conv - pool - conv - pool - flatten -
    dense - dropout - dense - dropout - dense(1, sigmoid), every conv and
    hidden dense relu-activated.
    """
    f1, f2, f3, f4 = cfg.conv_filters
    k, p = cfg.kernel_size, cfg.pool_size
    specs = [
        nnet.conv2d(f1, k), nnet.activation("relu"),
        nnet.conv2d(f2, k), nnet.activation("relu"),
        nnet.maxpool2d(p),
        nnet.conv2d(f3, k), nnet.activation("relu"),
        nnet.maxpool2d(p),
        nnet.conv2d(f4, k), nnet.activation("relu"),
        nnet.maxpool2d(p),
        nnet.flatten(),
    ]
    for width, rate in zip(cfg.dense_widths, cfg.dropout_rates):
        specs += [nnet.dense(width), nnet.activation("relu"), nnet.dropout(rate)]
    specs += [nnet.dense(1), nnet.activation("sigmoid")]
    return nnet.Network(specs, (cfg.input_side, cfg.input_side, 3), seed=seed,
                        dtype=np.dtype(cfg.dtype))


def preprocess(image, side):
    """Bilinear-resize a decoded RGB raster to (side, side, 3) in [0, 1]."""
    return prepare_square(image, side)


@dataclass
class TrainedClassifier:
    """Immutable trained model; safe for concurrent predict calls."""

    net: "nnet.Network"
    config: SlumsNetConfig
    history: TrainingHistory | None = None

    def predict(self, image):
        x = preprocess(image, self.config.input_side)
        p = float(self.net.forward(x, train=False)[0])
        return PlanningStatus.from_probability(p, self.config.threshold)

    def save(self, path):
        extra = {
            "kind": "classifier",
            "input_side": self.config.input_side,
            "threshold": self.config.threshold,
            "config": _config_dict(self.config),
        }
        history = self.history.as_dict() if self.history else None
        nnet.save_network(path, self.net, history=history, extra_meta=extra)

    @classmethod
    def load(cls, path):
        net, meta = nnet.load_network(path)
        if meta.get("kind") != "classifier":
            raise ValueError(f"{path} is not a classifier checkpoint")
        cfg = SlumsNetConfig(**{k: _detuple(v) for k, v in meta["config"].items()})
        history = None
        if meta.get("history"):
            history = TrainingHistory(**meta["history"])
        return cls(net=net, config=cfg, history=history)


def _config_dict(cfg):
    return {k: (list(v) if isinstance(v, tuple) else v)
            for k, v in cfg.__dict__.items()}


def _detuple(v):
    return tuple(v) if isinstance(v, list) else v


def predict_planning(model, image):
    """PlanningStatus for one decoded image under ``model``'s threshold."""
    return model.predict(image)


def _batch(ds, indices, cfg, rng=None):
    xs = np.empty((len(indices), cfg.input_side, cfg.input_side, 3))
    ys = np.empty((len(indices), 1))
    for row, i in enumerate(indices):
        img = ds.load_image(i)
        if rng is not None:
            img = augment_classification(img, ds.augment, rng)
        xs[row] = preprocess(img, cfg.input_side)
        ys[row] = LABEL_TO_INDEX[ds.label(i)]
    return xs, ys


def evaluate(net, ds, cfg, max_batches=None):
    """(mean BCE loss, accuracy) over ``ds`` without augmentation."""
    n = len(ds)
    losses, correct, seen = [], 0, 0
    batches = range(0, n, cfg.batch_size)
    if max_batches is not None:
        batches = list(batches)[:max_batches]
    for start in batches:
        idx = range(start, min(start + cfg.batch_size, n))
        xs, ys = _batch(ds, idx, cfg)
        probs = np.asarray(net.forward(xs, train=False), dtype=np.float64)
        losses.append(nnet.binary_cross_entropy(ys, probs))
        correct += int(np.sum((probs >= cfg.threshold).astype(int) == ys.astype(int)))
        seen += len(list(idx))
    loss = float(np.mean(losses)) if losses else float("nan")
    acc = correct / seen if seen else float("nan")
    return loss, acc


def train(net, data, cfg, seed=0, val_data=None):
    """Adam-train the classifier on augmented batches.

    Per step, a batch is drawn (with replacement) from ``data``, each image
    run through the dataset's augmentation, and one Adam update applied to
    the binary cross-entropy. Deterministic given (net, data, cfg, seed).

    Returns:
        (TrainedClassifier, TrainingHistory)

    Raises:
        DatasetError: empty or single-class dataset.
    """
    if len(data) == 0:
        raise DatasetError("training dataset is empty")
    if len(data.labels_present()) < 2:
        raise DatasetError(
            f"training dataset has a single class: {data.labels_present()}")

    rng = np.random.default_rng(seed)
    params = [p for _, p in net.parameters()]
    state = nnet.init_adam(params, learning_rate=cfg.learning_rate)
    history = TrainingHistory()

    for epoch in range(cfg.epochs):
        for _ in range(cfg.steps_per_epoch):
            idx = rng.integers(0, len(data), cfg.batch_size)
            xs, ys = _batch(data, idx, cfg, rng=rng)
            probs = net.forward(xs, train=True)
            probs64 = np.asarray(probs, dtype=np.float64)
            loss = nnet.binary_cross_entropy(ys, probs64)
            net.backward(nnet.binary_cross_entropy_grad(ys, probs64))
            grads = [g for _, g in net.gradients()]
            nnet.adam_step(params, grads, state)
            history.train_losses.append(loss)
        if val_data is not None and len(val_data):
            val_loss, val_acc = evaluate(net, val_data, cfg,
                                         max_batches=cfg.validation_steps)
            history.val_losses.append(val_loss)
            history.val_accuracies.append(val_acc)
            log.info("epoch %d: val loss %.4f, val accuracy %.4f",
                     epoch, val_loss, val_acc)

    return TrainedClassifier(net=net, config=cfg, history=history), history
