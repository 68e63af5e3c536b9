"""Candidate-region extraction from binary frames.

Connected components above a size floor, followed by a rule pass over the
regions: sparse oversized regions are split in two (they usually hold two
misaligned vehicles), dense undersized fragments trigger a global
re-clustering of the frame's set pixels into one fewer group (the fragment
is probably a piece of a nearby vehicle), and small leftovers are deleted.
The re-grouping rule restarts the pass, so an iteration cap guarantees
termination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .labeling import label_components

__all__ = ["Region", "SegmentationParams", "region_from_mask",
           "connected_components", "kmeans_pixels", "refine_regions",
           "segment_frame"]


@dataclass(frozen=True)
class SegmentationParams:
    min_component_px: int = 60
    split_fill_max: float = 0.45
    split_area_min: float = 1400.0
    regroup_fill_min: float = 0.80
    regroup_area_max: float = 340.0
    delete_area_max: float = 200.0
    connectivity: int = 8
    max_refine_iterations: int = 8

    def __post_init__(self):
        for name in ("min_component_px", "split_area_min", "regroup_area_max",
                     "delete_area_max", "max_refine_iterations"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")


@dataclass(frozen=True)
class Region:
    """A labeled pixel mask with its tight bounding box within one frame."""

    frame_index: int
    bbox: tuple[int, int, int, int]  # (left, top, width, height)
    mask: np.ndarray                 # uint8, bbox-sized
    pixel_count: int
    fill_fraction: float

    def __post_init__(self):
        left, top, width, height = self.bbox
        if self.mask.shape != (height, width):
            raise ValueError(f"mask shape {self.mask.shape} does not match bbox {self.bbox}")
        count = int(np.count_nonzero(self.mask))
        if count == 0:
            raise ValueError("region mask has no set pixels")
        if count != self.pixel_count:
            raise ValueError(f"pixel_count {self.pixel_count} != mask count {count}")
        if not (self.mask[0].any() and self.mask[-1].any()
                and self.mask[:, 0].any() and self.mask[:, -1].any()):
            raise ValueError("bbox is not tight around the mask")
        expected = count / (width * height)
        if abs(self.fill_fraction - expected) > 1e-12:
            raise ValueError(f"fill_fraction {self.fill_fraction} != {expected}")

    @property
    def width(self) -> int:
        return self.bbox[2]

    @property
    def height(self) -> int:
        return self.bbox[3]

    @property
    def area(self) -> int:
        return self.bbox[2] * self.bbox[3]


def region_from_mask(full_mask: np.ndarray, frame_index: int = 0) -> Region:
    """Region with a tight bounding box from a frame-sized mask."""
    mask = np.asarray(full_mask) != 0
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if not len(rows):
        raise ValueError("mask has no set pixels")
    top, bottom = int(rows[0]), int(rows[-1])
    left, right = int(cols[0]), int(cols[-1])
    sub = mask[top:bottom + 1, left:right + 1].astype(np.uint8)
    count = int(sub.sum())
    w, h = right - left + 1, bottom - top + 1
    return Region(frame_index, (left, top, w, h), sub, count, count / (w * h))


def connected_components(img: np.ndarray, connectivity: int = 8,
                         min_pixels: int = 60, frame_index: int = 0) -> list[Region]:
    """Regions for each connected set of 1-pixels with at least ``min_pixels``.

    Regions come back in raster order of each component's first pixel.
    """
    labels, count = label_components(img, connectivity)
    if count == 0:
        return []
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    boxes = ndimage.find_objects(labels)
    regions = []
    for lab in range(1, count + 1):
        if sizes[lab] < min_pixels:
            continue
        sl = boxes[lab - 1]
        sub = (labels[sl] == lab).astype(np.uint8)
        h, w = sub.shape
        regions.append(Region(frame_index, (sl[1].start, sl[0].start, w, h),
                              sub, int(sizes[lab]), float(sizes[lab]) / (w * h)))
    return regions


def _farthest_point_seeds(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty((k, 2))
    centers[0] = pts[rng.integers(len(pts))]
    nearest = np.abs(pts - centers[0]).sum(axis=1)
    for j in range(1, k):
        centers[j] = pts[nearest.argmax()]  # ties resolve to raster order
        nearest = np.minimum(nearest, np.abs(pts - centers[j]).sum(axis=1))
    return centers


def kmeans_pixels(mask: np.ndarray, k: int, seed, frame_index: int = 0) -> list[Region]:
    """Cluster set-pixel coordinates into k groups under city-block distance.

    Lloyd iterations with component-wise median updates (the correct center
    for the L1 objective); farthest-point seeding from the seeded RNG makes
    the outcome reproducible. Returns one region per nonempty cluster.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    coords = np.argwhere(np.asarray(mask) != 0)  # (n, 2) as (row, col), raster order
    n = len(coords)
    if n < k:
        raise ValueError(f"k={k} exceeds {n} set pixels")
    pts = coords.astype(np.float64)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    centers = _farthest_point_seeds(pts, k, rng)
    assign = None
    for _ in range(100):
        dist = np.abs(pts[:, None, :] - centers[None, :, :]).sum(axis=2)
        new_assign = dist.argmin(axis=1)  # ties go to the lowest center index
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = pts[assign == j]
            if len(members):
                centers[j] = np.median(members, axis=0)

    regions = []
    shape = np.asarray(mask).shape
    for j in range(k):
        sel = coords[assign == j]
        if not len(sel):
            continue
        sub_mask = np.zeros(shape, dtype=np.uint8)
        sub_mask[sel[:, 0], sel[:, 1]] = 1
        regions.append(region_from_mask(sub_mask, frame_index))
    return regions


def _paste(region: Region, shape: tuple[int, int], into: np.ndarray | None = None) -> np.ndarray:
    out = np.zeros(shape, dtype=np.uint8) if into is None else into
    left, top, w, h = region.bbox
    out[top:top + h, left:left + w] |= region.mask
    return out


def _child_seed(seed, call_index: int):
    if isinstance(seed, tuple):
        return (*seed, call_index)
    return (int(seed), call_index)


def refine_regions(regions: list[Region], frame_binary: np.ndarray,
                   params: SegmentationParams, seed,
                   frame_index: int = 0) -> tuple[list[Region], bool]:
    """Apply the split / regroup / delete rules until no region matches.

    Returns ``(regions, hit_cap)``; ``hit_cap`` is True when the regroup
    rule restarted the pass more than ``max_refine_iterations`` times and
    the current state was returned as-is.
    """
    shape = np.asarray(frame_binary).shape
    current = list(regions)
    restarts = 0
    calls = 0
    idx = 0
    while idx < len(current):
        region = current[idx]
        area = region.area
        if (region.fill_fraction <= params.split_fill_max
                and area >= params.split_area_min):
            halves = kmeans_pixels(_paste(region, shape), 2,
                                   _child_seed(seed, calls), frame_index)
            calls += 1
            if len(halves) < 2:  # cluster collapse; leave the region unsplit
                idx += 1
                continue
            current[idx] = halves[0]
            current.extend(halves[1:])
            continue
        if (region.fill_fraction >= params.regroup_fill_min
                and area <= params.regroup_area_max and len(current) > 1):
            restarts += 1
            if restarts > params.max_refine_iterations:
                return current, True
            union = np.zeros(shape, dtype=np.uint8)
            for r in current:
                _paste(r, shape, union)
            current = kmeans_pixels(union, len(current) - 1,
                                    _child_seed(seed, calls), frame_index)
            calls += 1
            idx = 0
            continue
        if area <= params.delete_area_max:
            del current[idx]
            continue
        idx += 1
    return current, False


def segment_frame(binary: np.ndarray, params: SegmentationParams, seed,
                  frame_index: int = 0) -> tuple[list[Region], bool]:
    """Connected components plus the refinement pass for one binary frame."""
    regions = connected_components(binary, params.connectivity,
                                   params.min_component_px, frame_index)
    return refine_regions(regions, binary, params, seed, frame_index)
