"""Label masks and mask-based feature filtering.

Masks are per-pixel 8-bit class ids produced by an external segmentation
stage and consumed here as plain arrays; lookup rounds pixel coordinates
half-up, and out-of-bounds features are dropped rather than reported as
errors.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import TrackedPoints
from .validation import as_float_array


def _round_half_up(x):
    return np.floor(x + 0.5).astype(np.intp)


@dataclass(frozen=True)
class LabelMask:
    labels: np.ndarray
    road_label: int = 1
    dynamic_labels: frozenset = frozenset({2})

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.uint8)
        if labels.ndim != 2:
            raise ValueError(f"labels must be 2-d (H, W), got shape {labels.shape}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dynamic_labels", frozenset(self.dynamic_labels))

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    def labels_at(self, pixels):
        """(values, in_bounds) for each (u, v) pixel; values 0 out of bounds."""
        pixels = np.atleast_2d(as_float_array(pixels, "pixels"))
        cols = _round_half_up(pixels[:, 0])
        rows = _round_half_up(pixels[:, 1])
        inb = (cols >= 0) & (cols < self.width) & (rows >= 0) & (rows < self.height)
        vals = np.zeros(len(pixels), dtype=np.uint8)
        vals[inb] = self.labels[rows[inb], cols[inb]]
        return vals, inb


def dynamic_free_mask(pixels, mask: LabelMask):
    """Boolean keep-mask: in bounds and not on any dynamic label."""
    vals, inb = mask.labels_at(pixels)
    keep = inb.copy()
    for label in mask.dynamic_labels:
        keep &= vals != label
    return keep


def filter_dynamic(pixels, mask: LabelMask):
    """Drop features that land on dynamic-object labels (or off the mask)."""
    pixels = np.atleast_2d(as_float_array(pixels, "pixels"))
    return pixels[dynamic_free_mask(pixels, mask)]


def road_keep_mask(pixels, mask: LabelMask):
    """Boolean keep-mask: in bounds and exactly on the road label."""
    vals, inb = mask.labels_at(pixels)
    return inb & (vals == mask.road_label)


def filter_road(points: TrackedPoints, mask: LabelMask) -> TrackedPoints:
    """Keep tracked points whose earlier-frame pixel lies on the road label."""
    if len(points) == 0:
        return points
    return points[road_keep_mask(points.pixels, mask)]
