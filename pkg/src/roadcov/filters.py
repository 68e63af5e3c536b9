"""Small-kernel filters shared by the cleaning and feature stages."""

from __future__ import annotations

import math

import numpy as np

SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])

# Responds positively when intensity grows toward the top of the frame,
# the quarter-turn companion of SOBEL_X.
SOBEL_Y = np.array([[1.0, 2.0, 1.0],
                    [0.0, 0.0, 0.0],
                    [-1.0, -2.0, -1.0]])

LAPLACIAN_8 = np.array([[-1.0, -1.0, -1.0],
                        [-1.0, 8.0, -1.0],
                        [-1.0, -1.0, -1.0]])


def correlate3x3(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Cross-correlate a 2-D image with a 3x3 kernel, replicate borders."""
    arr = np.asarray(img, dtype=np.float64)
    h, w = arr.shape
    padded = np.pad(arr, 1, mode="edge")
    out = np.zeros_like(arr)
    for dy in range(3):
        for dx in range(3):
            k = kernel[dy, dx]
            if k != 0.0:
                out += k * padded[dy:dy + h, dx:dx + w]
    return out


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with replicate borders."""
    kernel = gaussian_kernel1d(sigma)
    r = len(kernel) // 2
    arr = np.asarray(img, dtype=np.float64)
    padded = np.pad(arr, ((r, r), (0, 0)), mode="edge")
    arr = np.lib.stride_tricks.sliding_window_view(padded, len(kernel), axis=0) @ kernel
    padded = np.pad(arr, ((0, 0), (r, r)), mode="edge")
    return np.lib.stride_tricks.sliding_window_view(padded, len(kernel), axis=1) @ kernel
