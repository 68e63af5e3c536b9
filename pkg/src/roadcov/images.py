"""Image arrays and a self-contained binary netpbm (PGM/PPM) codec.

Color images are float64 arrays of shape (H, W, 3), grayscale images are
(H, W), and binary masks are (H, W) with values in {0, 1}. Intensities are
widened to double precision on decode so that downstream arithmetic (means,
medians, thresholds) is exact real arithmetic.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ImageFormatError", "decode_netpbm", "encode_netpbm", "to_uint8"]

_WHITESPACE = b" \t\n\r\x0b\x0c"


class ImageFormatError(ValueError):
    """A netpbm stream that cannot be decoded or encoded."""


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Skip whitespace and '#' comments, then read one header token."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise ImageFormatError("truncated header")
    start = pos
    while pos < n and data[pos] not in _WHITESPACE:
        pos += 1
    return data[start:pos], pos


def decode_netpbm(data: bytes) -> np.ndarray:
    """Decode binary PGM (P5) or PPM (P6) bytes to a float64 array.

    Returns shape (H, W) for PGM and (H, W, 3) for PPM. Only 8-bit rasters
    (maxval <= 255) are supported.
    """
    if len(data) < 2 or bytes(data[:2]) not in (b"P5", b"P6"):
        raise ImageFormatError("not a binary PGM/PPM stream")
    magic = bytes(data[:2])
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise ImageFormatError(f"bad {name} field {token!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"bad dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise ImageFormatError(f"unsupported maxval {maxval} (8-bit only)")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise ImageFormatError("missing whitespace after maxval")
    pos += 1
    channels = 3 if magic == b"P6" else 1
    expected = width * height * channels
    raster = data[pos:pos + expected]
    if len(raster) != expected:
        raise ImageFormatError(
            f"raster truncated: expected {expected} bytes, got {len(raster)}")
    img = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    if channels == 3:
        return img.reshape(height, width, 3)
    return img.reshape(height, width)


def encode_netpbm(img: np.ndarray) -> bytes:
    """Encode an integral-valued image in [0, 255] as binary PGM/PPM.

    Gray (H, W) arrays become P5, color (H, W, 3) become P6. The encoding
    round-trips bit-exactly through :func:`decode_netpbm`.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    elif arr.ndim == 2:
        magic = b"P5"
    else:
        raise ImageFormatError(f"cannot encode array of shape {arr.shape}")
    if arr.size == 0:
        raise ImageFormatError("cannot encode an empty image")
    if not np.array_equal(np.rint(arr), arr):
        raise ImageFormatError(
            "image has non-integral intensities; quantize with to_uint8 first")
    if arr.min() < 0 or arr.max() > 255:
        raise ImageFormatError("intensities outside [0, 255]")
    height, width = arr.shape[:2]
    header = b"%s\n%d %d\n255\n" % (magic, width, height)
    return header + arr.astype(np.uint8).tobytes()


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Round and clip to the integral [0, 255] range (still float64)."""
    return np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0.0, 255.0)
