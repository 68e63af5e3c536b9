"""Rotate-and-crop calibration from a user-clicked road baseline.

Two clicks along the direction of travel give the rotation that makes
vehicles move axis-aligned; a crop rectangle picked in the rotated frame
discards everything but the road. The camera is fixed, so one calibration
serves a whole sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Calibration", "angle_from_baseline", "rotated_bounds",
           "rotate_image", "rotate_and_crop"]


@dataclass(frozen=True)
class Calibration:
    angle_degrees: float
    crop: tuple[int, int, int, int]  # (left, top, width, height), rotated-frame pixels

    def __post_init__(self):
        if not -90.0 < self.angle_degrees < 90.0:
            raise ValueError(f"angle {self.angle_degrees} outside (-90, 90)")
        left, top, width, height = self.crop
        if left < 0 or top < 0 or width < 1 or height < 1:
            raise ValueError(f"bad crop rectangle {self.crop}")


def angle_from_baseline(p1: tuple[float, float], p2: tuple[float, float]) -> float:
    """Signed angle in degrees that rotates the segment p1->p2 onto the horizontal.

    Points are (x, y) pixel positions with y growing downward. A vertical
    baseline is refused: it means the clicks landed on the wrong feature,
    not that the road needs a quarter turn.
    """
    dx = float(p2[0]) - float(p1[0])
    dy = float(p2[1]) - float(p1[1])
    if dx == 0.0 and dy == 0.0:
        raise ValueError("baseline points coincide")
    if dx == 0.0:
        raise ValueError("baseline is vertical; click along the travel direction")
    return -math.degrees(math.atan(dy / dx)) + 0.0  # +0.0 canonicalizes -0.0


def _cos_sin(angle_degrees: float) -> tuple[float, float]:
    t = math.radians(angle_degrees)
    c, s = math.cos(t), math.sin(t)
    # Snap axis-aligned angles so quarter turns hit the pixel lattice exactly.
    for exact in (-1.0, 0.0, 1.0):
        if abs(c - exact) < 1e-12:
            c = exact
        if abs(s - exact) < 1e-12:
            s = exact
    return c, s


def rotated_bounds(width: int, height: int, angle_degrees: float) -> tuple[int, int]:
    """Canvas size (W, H) that exactly holds the rotated frame.

    Axis-aligned angles keep or swap the source dimensions so quarter turns
    stay on the pixel lattice. Other angles pad the bounding box to match
    the source parity, which keeps the center offset integral and makes a
    rotation followed by its inverse land back on the original lattice.
    """
    c, s = _cos_sin(angle_degrees)
    if s == 0.0:
        return width, height
    if c == 0.0:
        return height, width
    out_w = int(math.ceil(width * abs(c) + height * abs(s) - 1e-9))
    out_h = int(math.ceil(width * abs(s) + height * abs(c) - 1e-9))
    if (out_w - width) % 2:
        out_w += 1
    if (out_h - height) % 2:
        out_h += 1
    return out_w, out_h


def _catmull_rom_weights(frac: np.ndarray):
    # Taps at offsets -1, 0, +1, +2 around the sample; a = -0.5.
    f = frac
    f2 = f * f
    f3 = f2 * f
    return (-0.5 * f3 + f2 - 0.5 * f,
            1.5 * f3 - 2.5 * f2 + 1.0,
            -1.5 * f3 + 2.0 * f2 + 0.5 * f,
            0.5 * f3 - 0.5 * f2)


def _sample_bicubic(arr: np.ndarray, xi: np.ndarray, yi: np.ndarray) -> np.ndarray:
    h, w = arr.shape[:2]
    gray = arr.ndim == 2
    planes = arr[:, :, None] if gray else arr
    x0 = np.floor(xi)
    y0 = np.floor(yi)
    wx = _catmull_rom_weights(xi - x0)
    wy = _catmull_rom_weights(yi - y0)
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    out = np.zeros(xi.shape + (planes.shape[2],))
    for b in range(4):
        ys = y0 + (b - 1)
        y_ok = (ys >= 0) & (ys < h)
        ys = np.clip(ys, 0, h - 1)
        for a in range(4):
            xs = x0 + (a - 1)
            weight = wy[b] * wx[a] * ((xs >= 0) & (xs < w) & y_ok)
            xs = np.clip(xs, 0, w - 1)
            out += weight[:, :, None] * planes[ys, xs]
    return out[:, :, 0] if gray else out


def rotate_image(img: np.ndarray, angle_degrees: float) -> np.ndarray:
    """Rotate about the image center onto a canvas holding the whole frame.

    Catmull-Rom bicubic resampling; samples outside the source count as
    zero. Angle 0 is the bit-exact identity, and exact quarter turns land
    on the pixel lattice (no interpolation loss).
    """
    arr = np.asarray(img, dtype=np.float64)
    if angle_degrees == 0.0:
        return arr.copy()
    h, w = arr.shape[:2]
    c, s = _cos_sin(angle_degrees)
    out_w, out_h = rotated_bounds(w, h, angle_degrees)
    xo = np.arange(out_w) - (out_w - 1) / 2.0
    yo = (np.arange(out_h) - (out_h - 1) / 2.0)[:, None]
    xi = c * xo + s * yo + (w - 1) / 2.0
    yi = -s * xo + c * yo + (h - 1) / 2.0
    return _sample_bicubic(arr, np.broadcast_to(xi, (out_h, out_w)),
                           np.broadcast_to(yi, (out_h, out_w)))


def rotate_and_crop(img: np.ndarray, cal: Calibration) -> np.ndarray:
    """Apply the calibration: rotate, then cut the crop window."""
    arr = np.asarray(img, dtype=np.float64)
    h, w = arr.shape[:2]
    out_w, out_h = rotated_bounds(w, h, cal.angle_degrees)
    left, top, cw, ch = cal.crop
    if left + cw > out_w or top + ch > out_h:
        raise ValueError(f"crop {cal.crop} exceeds rotated bounds {out_w}x{out_h}")
    rotated = rotate_image(arr, cal.angle_degrees)
    return rotated[top:top + ch, left:left + cw].copy()
