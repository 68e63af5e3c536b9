"""Connected-component labeling for binary masks.

Run-based two-pass labeling: row runs of set pixels are linked across
adjacent rows with union-find, then components are renumbered by the raster
order of their first pixel so labels are deterministic.
"""

from __future__ import annotations

import numpy as np

__all__ = ["label_components"]


def label_components(mask: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label maximal connected sets of nonzero pixels.

    Returns ``(labels, count)`` where ``labels`` is int32, 0 is background,
    and components are numbered 1..count in raster order of first pixel.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    binary = np.asarray(mask) != 0
    if binary.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {binary.shape}")
    h, w = binary.shape
    labels = np.zeros((h, w), dtype=np.int32)

    parent: list[int] = []

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        if ra < rb:
            parent[rb] = ra
        else:
            parent[ra] = rb

    # Diagonal adjacency widens each run's overlap window by one pixel.
    pad = 1 if connectivity == 8 else 0
    all_runs: list[tuple[int, int, int, int]] = []  # (row, start, end, run_id)
    prev_runs: list[tuple[int, int, int]] = []
    for r in range(h):
        row = binary[r]
        if not row.any():
            prev_runs = []
            continue
        edges = np.flatnonzero(np.diff(np.concatenate(([0], row.view(np.int8), [0]))))
        runs = []
        for s, e in zip(edges[::2], edges[1::2]):
            rid = len(parent)
            parent.append(rid)
            runs.append((int(s), int(e), rid))
            all_runs.append((r, int(s), int(e), rid))
        j = 0
        for s, e, rid in runs:
            lo, hi = s - pad, e + pad
            while j < len(prev_runs) and prev_runs[j][1] <= lo:
                j += 1
            k = j
            while k < len(prev_runs) and prev_runs[k][0] < hi:
                union(rid, prev_runs[k][2])
                k += 1
        prev_runs = runs

    # Union-by-min keeps each root at the component's smallest run id, and
    # run ids are created in raster order, so ordering roots by id numbers
    # components by first pixel.
    root_to_label: dict[int, int] = {}
    for r, s, e, rid in all_runs:
        root = find(rid)
        label = root_to_label.get(root)
        if label is None:
            label = len(root_to_label) + 1
            root_to_label[root] = label
        labels[r, s:e] = label
    return labels, len(root_to_label)
