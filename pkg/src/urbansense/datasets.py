"""Dataset loading, splitting, augmentation, and synthetic generation.

Directory conventions:

* classification: ``root/planned/*`` and ``root/unplanned/*`` image files,
  label taken from the folder name.
* detection: ``root/JPEGImages/*`` plus ``root/Annotations/<stem>.xml`` in
  the usual VOC shape (``object/name`` and ``object/bndbox/{xmin,ymin,
  xmax,ymax}``).

Boxes are absolute-pixel, half-open ranges ``[xmin, xmax) x [ymin, ymax)``,
i.e. exactly the numpy slice that paints the object.
"""

import logging
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import ImageReadError, hflip, load_rgb, save_rgb, to_unit_float, warp_affine

log = logging.getLogger(__name__)

PLANNED, UNPLANNED = "planned", "unplanned"
LABEL_TO_INDEX = {PLANNED: 0, UNPLANNED: 1}

DETECTION_CLASSES = ("person", "car", "bus", "motorbike")

_IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff"}


class DatasetError(ValueError):
    """Unusable dataset: missing folders, no decodable images, bad labels."""


class AnnotationError(ValueError):
    """Malformed or inconsistent detection annotation."""


@dataclass
class AugmentParams:
    """Label-preserving augmentation knobs.

    ``rescale`` multiplies intensities (1/255 maps uint8 to [0, 1]); shear
    and zoom are sampled per call; the horizontal flip fires with
    probability 0.5 when enabled.
    """

    rescale: float = 1.0 / 255.0
    shear_degrees: float = 12.0
    zoom_range: tuple = (0.8, 1.2)
    horizontal_flip: bool = True

    @classmethod
    def none(cls):
        return cls(rescale=1.0, shear_degrees=0.0, zoom_range=(1.0, 1.0),
                   horizontal_flip=False)


@dataclass
class ClassificationDataset:
    """Examples are (source, label); a source is a path or an in-memory
    uint8 array (synthetic data)."""

    items: list
    augment: AugmentParams = field(default_factory=AugmentParams)
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.items)

    def label(self, i):
        return self.items[i][1]

    def label_index(self, i):
        return LABEL_TO_INDEX[self.items[i][1]]

    def load_image(self, i):
        """Decoded uint8 (H, W, 3) raster for example ``i`` (memoized)."""
        if i not in self._cache:
            source = self.items[i][0]
            self._cache[i] = source if isinstance(source, np.ndarray) else load_rgb(source)
        return self._cache[i]

    def labels_present(self):
        return sorted({label for _, label in self.items})


@dataclass
class DetectionDataset:
    """Examples are (source, boxes (G, 4) float, class indices (G,) int).

    Class indices are 1-based; index 0 is reserved for background and never
    appears as a ground-truth label.
    """

    items: list
    class_names: tuple = DETECTION_CLASSES
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.items)

    @property
    def class_to_index(self):
        out = {"background": 0}
        out.update({name: i + 1 for i, name in enumerate(self.class_names)})
        return out

    def load_image(self, i):
        if i not in self._cache:
            source = self.items[i][0]
            self._cache[i] = source if isinstance(source, np.ndarray) else load_rgb(source)
        return self._cache[i]

    def boxes(self, i):
        return self.items[i][1]

    def labels(self, i):
        return self.items[i][2]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def _list_images(folder):
    return sorted(p for p in folder.iterdir()
                  if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES)


def load_labeled_folders(root, augment=None):
    """Build a ClassificationDataset from ``root/planned`` + ``root/unplanned``.

    Every decodable image becomes one example labeled by its folder, in
    deterministic lexicographic order. Files that fail to decode are logged
    and skipped.

    Raises:
        DatasetError: missing class folder, or zero decodable images.
    """
    root = Path(root)
    items = []
    for label in (PLANNED, UNPLANNED):
        folder = root / label
        if not folder.is_dir():
            raise DatasetError(f"missing folder {folder}")
        for path in _list_images(folder):
            try:
                load_rgb(path)
            except ImageReadError as exc:
                log.warning("skipping undecodable image: %s", exc)
                continue
            items.append((str(path), label))
    if not items:
        raise DatasetError(f"no decodable images under {root}")
    ds = ClassificationDataset(items)
    if augment is not None:
        ds.augment = augment
    return ds


def split(ds, spec=SplitSpec()):
    """Seeded shuffle then partition; train gets ceil(fraction * n)."""
    n = len(ds.items)
    if n == 0:
        raise DatasetError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    n_train = math.ceil(spec.train_fraction * n)
    train_items = [ds.items[i] for i in order[:n_train]]
    test_items = [ds.items[i] for i in order[n_train:]]
    make = type(ds)
    if isinstance(ds, ClassificationDataset):
        return (make(train_items, augment=ds.augment),
                make(test_items, augment=ds.augment))
    return (make(train_items, class_names=ds.class_names),
            make(test_items, class_names=ds.class_names))


def augment_classification(image, params, rng):
    """Randomized, label-preserving transform of one image.

    Applies, in order: intensity rescale, shear within +/- shear_degrees,
    zoom within zoom_range, horizontal flip with probability 0.5. Output
    dimensions equal input dimensions; shear/zoom borders replicate edge
    pixels. Returns float64.
    """
    img = np.asarray(image).astype(np.float64) * params.rescale
    h, w = img.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0

    angle = rng.uniform(-params.shear_degrees, params.shear_degrees)
    zoom = rng.uniform(params.zoom_range[0], params.zoom_range[1])
    do_flip = params.horizontal_flip and rng.random() < 0.5

    if angle != 0.0 or zoom != 1.0:
        shear = math.tan(math.radians(angle))
        inv_zoom = 1.0 / zoom
        # inverse map about the image center: unzoom then unshear
        a, b = inv_zoom, inv_zoom * shear
        d = inv_zoom
        m = np.array([
            [a, b, cx - a * cx - b * cy],
            [0.0, d, cy - d * cy],
        ])
        img = warp_affine(img, m)
    if do_flip:
        img = hflip(img)
    return img


def _require(elem, tag, path):
    child = elem.find(tag)
    if child is None or child.text is None:
        raise AnnotationError(f"{path}: missing field {tag!r}")
    return child.text.strip()


def load_detection_annotations(root, class_names=DETECTION_CLASSES):
    """Parse a VOC-style tree into a DetectionDataset.

    Boxes are clipped to image bounds (with a warning); degenerate boxes
    (zero area after clipping) are dropped with a warning; unknown class
    names are a hard error.

    Raises:
        DatasetError: missing folders or no annotations.
        AnnotationError: malformed file (message names file and field) or
            unknown class name.
    """
    root = Path(root)
    ann_dir, img_dir = root / "Annotations", root / "JPEGImages"
    if not ann_dir.is_dir() or not img_dir.is_dir():
        raise DatasetError(f"{root} lacks Annotations/ and JPEGImages/ folders")
    name_to_index = {name: i + 1 for i, name in enumerate(class_names)}
    images_by_stem = {}
    for p in _list_images(img_dir):
        images_by_stem.setdefault(p.stem, p)

    items = []
    for ann_path in sorted(ann_dir.glob("*.xml")):
        try:
            xml_root = ET.parse(ann_path).getroot()
        except ET.ParseError as exc:
            raise AnnotationError(f"{ann_path}: unparseable XML ({exc})") from exc
        img_path = images_by_stem.get(ann_path.stem)
        if img_path is None:
            raise AnnotationError(
                f"{ann_path}: no image named {ann_path.stem!r} in {img_dir}")

        size = xml_root.find("size")
        if size is not None:
            width = int(_require(size, "width", ann_path))
            height = int(_require(size, "height", ann_path))
        else:
            height, width = load_rgb(img_path).shape[:2]

        boxes, labels = [], []
        for obj in xml_root.findall("object"):
            name = _require(obj, "name", ann_path)
            if name not in name_to_index:
                raise AnnotationError(f"{ann_path}: unknown class {name!r}")
            bnd = obj.find("bndbox")
            if bnd is None:
                raise AnnotationError(f"{ann_path}: missing field 'bndbox'")
            coords = [float(_require(bnd, tag, ann_path))
                      for tag in ("xmin", "ymin", "xmax", "ymax")]
            xmin, ymin, xmax, ymax = coords
            if xmin > xmax or ymin > ymax:
                raise AnnotationError(
                    f"{ann_path}: inverted bndbox ({xmin},{ymin},{xmax},{ymax})")
            clipped = [max(0.0, min(xmin, width)), max(0.0, min(ymin, height)),
                       max(0.0, min(xmax, width)), max(0.0, min(ymax, height))]
            if clipped != coords:
                log.warning("%s: box %s clipped to image bounds", ann_path, coords)
            if clipped[2] - clipped[0] <= 0 or clipped[3] - clipped[1] <= 0:
                log.warning("%s: dropping degenerate box %s", ann_path, coords)
                continue
            boxes.append(clipped)
            labels.append(name_to_index[name])
        items.append((str(img_path),
                      np.asarray(boxes, dtype=np.float64).reshape(-1, 4),
                      np.asarray(labels, dtype=np.int64)))
    if not items:
        raise DatasetError(f"no annotations under {ann_dir}")
    return DetectionDataset(items, class_names=tuple(class_names))


# ---------------------------------------------------------------------------
# Synthetic data.  The "planned" class is a regular street grid of aligned,
# similarly-colored blocks; "unplanned" is a jittered pile of overlapping
# rectangles with wide hue variance.  Detection scenes paint one solid color
# per class so recorded boxes are pixel-exact.
# ---------------------------------------------------------------------------

def _planned_scene(side, rng):
    img = np.empty((side, side, 3), dtype=np.uint8)
    img[...] = rng.integers(170, 190, 3, dtype=np.uint8)  # uniform pavement
    block = max(4, side // 8)
    street = max(2, block // 3)
    pitch = block + street
    base = np.array([120, 120, 128]) + rng.integers(-8, 9, 3)
    for top in range(street, side - block + 1, pitch):
        for left in range(street, side - block + 1, pitch):
            color = np.clip(base + rng.integers(-6, 7, 3), 0, 255).astype(np.uint8)
            img[top:top + block, left:left + block] = color
    return img


def _unplanned_scene(side, rng):
    img = np.empty((side, side, 3), dtype=np.uint8)
    img[...] = rng.integers(60, 200, 3, dtype=np.uint8)
    n_rects = int(rng.integers(14, 26))
    for _ in range(n_rects):
        rh = int(rng.integers(side // 10, side // 2))
        rw = int(rng.integers(side // 10, side // 2))
        top = int(rng.integers(0, side - rh))
        left = int(rng.integers(0, side - rw))
        color = rng.integers(0, 256, 3, dtype=np.uint8)  # high hue variance
        img[top:top + rh, left:left + rw] = color
    return img


def generate_synthetic_classification(n, side, seed, augment=None):
    """Deterministic grid-vs-clutter stand-in corpus, n/2 images per class."""
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and >= 2")
    if side < 16:
        raise ValueError("side must be >= 16")
    rng = np.random.default_rng(seed)
    items = []
    for _ in range(n // 2):
        items.append((_planned_scene(side, rng), PLANNED))
        items.append((_unplanned_scene(side, rng), UNPLANNED))
    ds = ClassificationDataset(items)
    if augment is not None:
        ds.augment = augment
    return ds


_CLASS_COLORS = {
    "person": (200, 30, 30),
    "car": (30, 60, 200),
    "bus": (220, 200, 30),
    "motorbike": (30, 180, 60),
}

# (height range, width range) as fractions of the image side
_CLASS_SHAPES = {
    "person": ((0.25, 0.45), (0.08, 0.16)),
    "car": ((0.12, 0.22), (0.25, 0.40)),
    "bus": ((0.22, 0.35), (0.35, 0.55)),
    "motorbike": ((0.10, 0.18), (0.10, 0.20)),
}


def _separated(candidate, placed, margin):
    cx0, cy0, cx1, cy1 = candidate
    for x0, y0, x1, y1 in placed:
        if (cx0 < x1 + margin and x0 < cx1 + margin
                and cy0 < y1 + margin and y0 < cy1 + margin):
            return False
    return True


def generate_synthetic_detection(n, side, seed, max_objects=4):
    """Scenes of 1..max_objects solid class-colored rectangles with exact
    ground-truth boxes.  Shapes never overlap (rejection-sampled placement),
    so every recorded box is fully visible."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    name_to_index = {name: i + 1 for i, name in enumerate(DETECTION_CLASSES)}
    margin = max(2, side // 32)
    items = []
    for _ in range(n):
        img = np.empty((side, side, 3), dtype=np.uint8)
        img[...] = rng.integers(215, 236, 3, dtype=np.uint8)
        # faint texture so the background is not a constant field
        img = np.clip(
            img.astype(np.int16) + rng.integers(-6, 7, img.shape, dtype=np.int16),
            0, 255).astype(np.uint8)
        boxes, labels = [], []
        for _ in range(int(rng.integers(1, max_objects + 1))):
            name = DETECTION_CLASSES[int(rng.integers(len(DETECTION_CLASSES)))]
            (hlo, hhi), (wlo, whi) = _CLASS_SHAPES[name]
            for _ in range(30):
                rh = int(rng.integers(max(3, int(hlo * side)), max(4, int(hhi * side))))
                rw = int(rng.integers(max(3, int(wlo * side)), max(4, int(whi * side))))
                top = int(rng.integers(0, side - rh))
                left = int(rng.integers(0, side - rw))
                box = (left, top, left + rw, top + rh)
                if _separated(box, boxes, margin):
                    img[top:top + rh, left:left + rw] = _CLASS_COLORS[name]
                    boxes.append(box)
                    labels.append(name_to_index[name])
                    break
        items.append((img,
                      np.asarray(boxes, dtype=np.float64).reshape(-1, 4),
                      np.asarray(labels, dtype=np.int64)))
    return DetectionDataset(items)


def persist_classification(ds, root):
    """Write a ClassificationDataset to the planned/unplanned folder layout."""
    root = Path(root)
    counters = {PLANNED: 0, UNPLANNED: 0}
    for source, label in ds.items:
        folder = root / label
        folder.mkdir(parents=True, exist_ok=True)
        img = source if isinstance(source, np.ndarray) else load_rgb(source)
        save_rgb(img, folder / f"{label}_{counters[label]:04d}.png")
        counters[label] += 1
    return root


def persist_detection(ds, root):
    """Write a DetectionDataset to the VOC-style Annotations/JPEGImages layout."""
    root = Path(root)
    ann_dir, img_dir = root / "Annotations", root / "JPEGImages"
    ann_dir.mkdir(parents=True, exist_ok=True)
    img_dir.mkdir(parents=True, exist_ok=True)
    index_to_name = {i + 1: name for i, name in enumerate(ds.class_names)}
    for i in range(len(ds)):
        img = ds.load_image(i)
        stem = f"scene_{i:04d}"
        save_rgb(img, img_dir / f"{stem}.png")
        root_el = ET.Element("annotation")
        size_el = ET.SubElement(root_el, "size")
        ET.SubElement(size_el, "width").text = str(img.shape[1])
        ET.SubElement(size_el, "height").text = str(img.shape[0])
        for box, label in zip(ds.boxes(i), ds.labels(i)):
            obj = ET.SubElement(root_el, "object")
            ET.SubElement(obj, "name").text = index_to_name[int(label)]
            bnd = ET.SubElement(obj, "bndbox")
            for tag, val in zip(("xmin", "ymin", "xmax", "ymax"), box):
                ET.SubElement(bnd, tag).text = f"{val:g}"
        ET.ElementTree(root_el).write(ann_dir / f"{stem}.xml")
    return root
