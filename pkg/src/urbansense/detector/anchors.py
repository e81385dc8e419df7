"""Default (prior) box generation over multi-scale feature-map grids."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DefaultBoxSpec:
    """Grid layout of the default boxes.

    ``scales`` has one entry per grid plus a final extra entry: level k uses
    scale s_k for its aspect-ratio boxes plus one ratio-1 box at
    sqrt(s_k * s_{k+1}).  Every cell therefore emits
    ``len(aspect_ratios) + 1`` boxes.
    """

    grid_sizes: tuple
    scales: tuple
    aspect_ratios: tuple = (1.0, 2.0, 0.5)

    def __post_init__(self):
        if len(self.scales) != len(self.grid_sizes) + 1:
            raise ValueError("need len(grid_sizes) + 1 scales (one extra for the "
                             "geometric-mean box of the last level)")
        s = np.asarray(self.scales, dtype=float)
        if np.any(s <= 0) or np.any(s > 1) or np.any(np.diff(s) <= 0):
            raise ValueError(f"scales must be strictly increasing in (0, 1]: {self.scales}")
        if any(f < 1 for f in self.grid_sizes):
            raise ValueError(f"grid sizes must be >= 1: {self.grid_sizes}")
        if any(r <= 0 for r in self.aspect_ratios):
            raise ValueError(f"aspect ratios must be positive: {self.aspect_ratios}")

    @property
    def boxes_per_cell(self):
        return len(self.aspect_ratios) + 1

    @property
    def total_boxes(self):
        return sum(f * f * self.boxes_per_cell for f in self.grid_sizes)


def linear_scales(num_levels, s_min=0.2, s_max=0.9):
    """Evenly spaced scales from s_min to s_max, plus one extrapolated extra."""
    if num_levels == 1:
        step = (s_max - s_min)
        return (s_min, min(1.0, s_min + step))
    step = (s_max - s_min) / (num_levels - 1)
    scales = [s_min + step * k for k in range(num_levels)]
    return tuple(scales + [min(1.0, s_max + step)])


def generate_default_boxes(spec):
    """All default boxes in center form, shape (D, 4).

    Ordering is level-major, then row-major over cells, with the aspect
    ratios (extra ratio-1 box last) innermost; cell (i, j) of an f-sized
    grid is centered at ((j + 0.5)/f, (i + 0.5)/f).
    """
    rows = []
    for level, f in enumerate(spec.grid_sizes):
        s = spec.scales[level]
        s_extra = float(np.sqrt(s * spec.scales[level + 1]))
        shapes = [(s * np.sqrt(r), s / np.sqrt(r)) for r in spec.aspect_ratios]
        shapes.append((s_extra, s_extra))
        for i in range(f):
            cy = (i + 0.5) / f
            for j in range(f):
                cx = (j + 0.5) / f
                for w, h in shapes:
                    rows.append((cx, cy, w, h))
    return np.asarray(rows, dtype=np.float64)
