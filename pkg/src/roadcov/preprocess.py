"""Background subtraction and frame cleaning.

The stages, applied in order: per-pixel mean background over the whole
sequence; absolute per-channel subtraction averaged into one gray plane;
running median; a low-value floor that zeroes residual noise; and finally
an edge-amplified global threshold that produces the binary frames used by
segmentation. The threshold is shared across the sequence so frames without
vehicles do not get their noise amplified into phantom objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .edges import canny_edges
from .frames import FrameSequence

__all__ = ["BackgroundModel", "CleanParams", "mean_background", "subtract_gray",
           "median_filter", "floor_shift", "clean_frame", "binarize_sequence"]


@dataclass(frozen=True)
class BackgroundModel:
    mean_image: np.ndarray  # (H, W, 3) per-channel means
    n_frames: int

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("background needs at least one frame")
        if self.mean_image.min() < 0 or self.mean_image.max() > 255:
            raise ValueError("background intensities outside [0, 255]")


@dataclass(frozen=True)
class CleanParams:
    floor: float = 10.0
    median_window: int = 5
    edge_gain: float = 10.0
    canny_high: float = 0.2
    binary_threshold_override: float | None = None

    def __post_init__(self):
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ValueError(f"median window {self.median_window} must be odd")
        if self.floor < 0:
            raise ValueError("floor must be >= 0")
        if self.edge_gain < 0:
            raise ValueError("edge gain must be >= 0")
        if not 0.0 < self.canny_high < 1.0:
            raise ValueError(f"canny high {self.canny_high} outside (0, 1)")


def mean_background(seq: FrameSequence) -> BackgroundModel:
    """Arithmetic mean of every frame, per pixel per channel."""
    stack = np.stack(seq.frames)
    return BackgroundModel(stack.mean(axis=0), len(seq))


def subtract_gray(frame: np.ndarray, bg: BackgroundModel) -> np.ndarray:
    """Channel-averaged absolute difference against the background."""
    arr = np.asarray(frame, dtype=np.float64)
    if arr.shape != bg.mean_image.shape:
        raise ValueError(
            f"frame shape {arr.shape} does not match background {bg.mean_image.shape}")
    return np.abs(arr - bg.mean_image).mean(axis=2)


def median_filter(img: np.ndarray, window: int) -> np.ndarray:
    """window x window running median; borders replicate the nearest pixel."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"median window {window} must be odd")
    return ndimage.median_filter(np.asarray(img, dtype=np.float64),
                                 size=window, mode="nearest")


def floor_shift(img: np.ndarray, floor: float) -> np.ndarray:
    """Shift intensities down by ``floor``, clamping anything below it to zero."""
    if floor < 0:
        raise ValueError("floor must be >= 0")
    arr = np.asarray(img, dtype=np.float64)
    return np.where(arr < floor, 0.0, arr - floor)


def clean_frame(gray: np.ndarray, params: CleanParams) -> np.ndarray:
    """Median filter then floor shift, the per-frame cleaning pipeline."""
    return floor_shift(median_filter(gray, params.median_window), params.floor)


def binarize_sequence(cleaned: list[np.ndarray], params: CleanParams) -> list[np.ndarray]:
    """Threshold edge-boosted frames at the sequence-global mean intensity.

    Each frame gets ``edge_gain`` times its edge map added before the mean
    is accumulated over every pixel of every frame; the override, when set,
    replaces that global mean. Output frames are uint8 masks in {0, 1}.
    """
    if not cleaned:
        raise ValueError("empty frame list")
    boosted = [np.asarray(img, dtype=np.float64)
               + params.edge_gain * canny_edges(img, params.canny_high)
               for img in cleaned]
    if params.binary_threshold_override is not None:
        mu = float(params.binary_threshold_override)
    else:
        mu = sum(float(b.sum()) for b in boosted) / sum(b.size for b in boosted)
    return [(b >= mu).astype(np.uint8) for b in boosted]
