"""Frame-sequence loading: manifests, ordering, and shape validation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import ImageFormatError, decode_netpbm

__all__ = ["FrameLoadError", "FrameSequence", "load_sequence", "read_manifest",
           "MANIFEST_NAME"]

MANIFEST_NAME = "manifest.txt"
_SUFFIXES = (".ppm", ".pgm")


class FrameLoadError(ValueError):
    """Loading a frame sequence failed; the message names the offending file."""


@dataclass(frozen=True)
class FrameSequence:
    """Ordered color frames of identical dimensions.

    Frames are (H, W, 3) float64 arrays; ``source_ids`` carries one file
    identifier per frame in manifest order.
    """

    frames: tuple[np.ndarray, ...]
    source_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.frames:
            raise FrameLoadError("no frames found")
        if len(self.frames) != len(self.source_ids):
            raise FrameLoadError("frames and source_ids differ in length")
        h, w = self.frames[0].shape[:2]
        for frame, name in zip(self.frames, self.source_ids):
            if frame.ndim != 3 or frame.shape[2] != 3:
                raise FrameLoadError(
                    f"{name}: expected a color frame, got shape {frame.shape}")
            if frame.shape[:2] != (h, w):
                raise FrameLoadError(
                    f"{name}: dimension mismatch {frame.shape[1]}x{frame.shape[0]}, "
                    f"expected {w}x{h}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].shape[1]

    @property
    def height(self) -> int:
        return self.frames[0].shape[0]


def read_manifest(path: Path) -> list[str]:
    """Relative image paths from a manifest, one per line, '#' comments allowed."""
    entries = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            entries.append(line)
    return entries


def load_sequence(manifest_or_directory: str | Path) -> FrameSequence:
    """Load a frame sequence from a manifest file or a directory.

    A directory uses its ``manifest.txt`` when present, otherwise the
    lexicographic listing of ``*.ppm``/``*.pgm`` files. Gray frames are
    promoted to three identical channels.
    """
    path = Path(manifest_or_directory)
    if path.is_dir():
        manifest = path / MANIFEST_NAME
        if manifest.is_file():
            base, names = path, read_manifest(manifest)
        else:
            base = path
            names = sorted(p.name for p in path.iterdir()
                           if p.is_file() and p.suffix.lower() in _SUFFIXES)
    elif path.is_file():
        base, names = path.parent, read_manifest(path)
    else:
        raise FrameLoadError(f"{path}: no such file or directory")

    if not names:
        raise FrameLoadError(f"{path}: no frames found")

    frames = []
    for name in names:
        file_path = base / name
        try:
            img = decode_netpbm(file_path.read_bytes())
        except FileNotFoundError:
            raise FrameLoadError(f"{name}: file not found") from None
        except ImageFormatError as exc:
            raise FrameLoadError(f"{name}: {exc}") from exc
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)
        img.setflags(write=False)
        frames.append(img)
    return FrameSequence(tuple(frames), tuple(names))
