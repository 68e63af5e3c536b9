"""Region covariance descriptors and the log-eigenvalue SPD distance.

A region is summarized by the covariance matrix of a per-pixel feature
vector computed over its bounding box. Two descriptors are compared by the
generalized eigenvalues of the matrix pair: the distance is the root sum
of squared log-eigenvalues, a true metric on symmetric positive-definite
matrices that tolerates the lighting and scale drift between frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import solve_triangular

from .edges import canny_edges
from .filters import LAPLACIAN_8, SOBEL_X, SOBEL_Y, correlate3x3

__all__ = ["FeatureSet", "FeatureTensor", "CovarianceDescriptor",
           "feature_tensor", "covariance", "covariance_matrix",
           "generalized_eigenvalues", "spd_distance", "DEFAULT_EPS",
           "EDGE_CHANNEL_HIGH"]

DEFAULT_EPS = 1e-8
EDGE_CHANNEL_HIGH = 0.2


class FeatureSet(str, Enum):
    """Selectable per-pixel feature vectors."""

    XY_GRAD_LAP = "XY_GRAD_LAP"    # x, y, d/dx, d/dy, laplacian
    R2_GRAD_LAP = "R2_GRAD_LAP"    # squared center distance, d/dx, d/dy, laplacian
    XY_LAP_EDGE = "XY_LAP_EDGE"    # x, y, laplacian, edge indicator
    CODE_DEFAULT = "CODE_DEFAULT"  # x, y, intensity, laplacian, edge indicator

    @property
    def channels(self) -> tuple[str, ...]:
        return _CHANNELS[self]

    @property
    def dimension(self) -> int:
        return len(_CHANNELS[self])


_CHANNELS = {
    FeatureSet.XY_GRAD_LAP: ("x", "y", "grad_x", "grad_y", "laplacian"),
    FeatureSet.R2_GRAD_LAP: ("r2", "grad_x", "grad_y", "laplacian"),
    FeatureSet.XY_LAP_EDGE: ("x", "y", "laplacian", "edge"),
    FeatureSet.CODE_DEFAULT: ("x", "y", "intensity", "laplacian", "edge"),
}


@dataclass(frozen=True)
class FeatureTensor:
    """Per-pixel feature vectors as (H, W, d) planes."""

    planes: np.ndarray
    feature_set: FeatureSet

    def __post_init__(self):
        if self.planes.ndim != 3 or self.planes.shape[2] != self.feature_set.dimension:
            raise ValueError(
                f"planes shape {self.planes.shape} does not match "
                f"{self.feature_set.value} (d={self.feature_set.dimension})")
        if not np.all(np.isfinite(self.planes)):
            raise ValueError("feature planes contain non-finite values")

    @property
    def width(self) -> int:
        return self.planes.shape[1]

    @property
    def height(self) -> int:
        return self.planes.shape[0]


def feature_tensor(region_gray: np.ndarray, fs: FeatureSet) -> FeatureTensor:
    """Feature planes for one region's grayscale crop.

    Pixel coordinates are 1-based within the region; derivatives use the
    3x3 Sobel pair and the 8-neighbor Laplacian with replicate borders; the
    edge channel is the Canny map at the fixed 0.2 threshold.
    """
    arr = np.asarray(region_gray, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D gray region, got shape {arr.shape}")
    h, w = arr.shape
    if h < 3 or w < 3:
        raise ValueError(f"region {w}x{h} too small for 3x3 derivative support")
    x = np.tile(np.arange(1.0, w + 1.0), (h, 1))
    y = np.tile(np.arange(1.0, h + 1.0)[:, None], (1, w))
    planes = []
    for name in fs.channels:
        if name == "x":
            planes.append(x)
        elif name == "y":
            planes.append(y)
        elif name == "r2":
            x0, y0 = (w + 1) / 2.0, (h + 1) / 2.0
            planes.append((x - x0) ** 2 + (y - y0) ** 2)
        elif name == "intensity":
            planes.append(arr)
        elif name == "grad_x":
            planes.append(correlate3x3(arr, SOBEL_X))
        elif name == "grad_y":
            planes.append(correlate3x3(arr, SOBEL_Y))
        elif name == "laplacian":
            planes.append(correlate3x3(arr, LAPLACIAN_8))
        elif name == "edge":
            planes.append(canny_edges(arr, EDGE_CHANNEL_HIGH).astype(np.float64))
    return FeatureTensor(np.stack(planes, axis=-1), fs)


@dataclass(frozen=True)
class CovarianceDescriptor:
    """d x d covariance of a region's feature vectors."""

    matrix: np.ndarray
    feature_set: FeatureSet
    n_pixels: int
    normalization: str = "population"

    def __post_init__(self):
        d = self.feature_set.dimension
        if self.matrix.shape != (d, d):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match d={d}")
        if np.abs(self.matrix - self.matrix.T).max() > 1e-12:
            raise ValueError("matrix is not symmetric")
        if self.normalization not in ("population", "sample"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.n_pixels < 2:
            raise ValueError("descriptor needs at least 2 pixels")


def covariance_matrix(samples: np.ndarray, sample: bool = False) -> np.ndarray:
    """Covariance of (N, d) feature samples; population 1/N by default."""
    x = np.asarray(samples, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    centered = x - x.mean(axis=0)
    mat = centered.T @ centered / (n - 1 if sample else n)
    return (mat + mat.T) / 2.0


def covariance(ft: FeatureTensor, sample: bool = False) -> CovarianceDescriptor:
    """Covariance descriptor of a feature tensor over all bbox pixels."""
    h, w, d = ft.planes.shape
    mat = covariance_matrix(ft.planes.reshape(h * w, d), sample=sample)
    return CovarianceDescriptor(mat, ft.feature_set, h * w,
                                "sample" if sample else "population")


def _try_cholesky_eigenvalues(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    try:
        chol = np.linalg.cholesky(b)
    except np.linalg.LinAlgError:
        return None
    m = solve_triangular(chol, a, lower=True)
    m = solve_triangular(chol, m.T, lower=True).T
    lam = np.linalg.eigvalsh((m + m.T) / 2.0)
    if not np.all(np.isfinite(lam)) or lam[0] <= 0.0:
        return None
    return lam


def generalized_eigenvalues(c1: np.ndarray, c2: np.ndarray,
                            eps: float = DEFAULT_EPS) -> np.ndarray:
    """All lambda with det(c1 - lambda*c2) = 0 for a symmetric pair, ascending.

    Solved by Cholesky reduction to a symmetric standard problem. When the
    raw pair is not safely positive definite (flat image regions produce
    singular covariances), both matrices are retried with a trace-scaled
    ridge eps*(trace/d + 1)*I, which keeps every eigenvalue strictly
    positive; a pair that is indefinite even then is an error.
    """
    a = np.asarray(c1, dtype=np.float64)
    b = np.asarray(c2, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"expected square matrices of equal size, got {a.shape} and {b.shape}")
    scale = max(np.abs(a).max(), np.abs(b).max(), 1.0)
    if (np.abs(a - a.T).max() > 1e-8 * scale or np.abs(b - b.T).max() > 1e-8 * scale):
        raise ValueError("matrices must be symmetric")

    lam = _try_cholesky_eigenvalues(a, b)
    if lam is None:
        d = a.shape[0]
        eye = np.eye(d)
        a2 = a + eps * (np.trace(a) / d + 1.0) * eye
        b2 = b + eps * (np.trace(b) / d + 1.0) * eye
        lam = _try_cholesky_eigenvalues(a2, b2)
        if lam is None:
            raise ValueError("indefinite input: no positive generalized eigenvalues")
    return lam


def _matrix_of(value) -> np.ndarray:
    return value.matrix if isinstance(value, CovarianceDescriptor) else np.asarray(value)


def spd_distance(a, b, eps: float = DEFAULT_EPS) -> float:
    """Root sum of squared log generalized eigenvalues between two descriptors.

    Accepts :class:`CovarianceDescriptor` pairs (feature set and
    normalization must match) or raw symmetric matrices.
    """
    if isinstance(a, CovarianceDescriptor) and isinstance(b, CovarianceDescriptor):
        if a.feature_set != b.feature_set:
            raise ValueError(
                f"feature sets differ: {a.feature_set.value} vs {b.feature_set.value}")
        if a.normalization != b.normalization:
            raise ValueError(
                f"normalizations differ: {a.normalization} vs {b.normalization}")
    lam = generalized_eigenvalues(_matrix_of(a), _matrix_of(b), eps)
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))
