"""File formats: linear 16-bit PNG and the ``PWCC`` float-map container.

``PWCC`` layout (all little-endian)::

    b"PWCC" | u32 width | u32 height | u32 channels | f32 * (H * W * C)

Samples are row-major and channel-interleaved.
"""

import os
import struct

import numpy as np
import png

from .errors import (
    BadMagicError,
    ChannelCountError,
    MalformedPNGError,
    TruncatedFileError,
    UnsupportedBitDepthError,
)
from .imagecore import check_channels

FLOAT_MAP_MAGIC = b"PWCC"
_HEADER = struct.Struct("<4sIII")


def quantize16(img):
    """Integer codes stored for linear values: ``round(clamp(v, 0, 1) * 65535)``."""
    v = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 65535.0 + 0.5).astype(np.uint16)


def write_image(path, img):
    """Write a linear RGB image as a 16-bit PNG (no gamma)."""
    img = check_channels(img, 3)
    h, w, _ = img.shape
    codes = quantize16(img).reshape(h, w * 3)
    with open(path, "wb") as fh:
        png.Writer(width=w, height=h, greyscale=False, bitdepth=16).write(fh, codes)


def read_image(path):
    """Read a 16-bit RGB PNG into float64 linear values ``code / 65535``."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such image: {path}")
    try:
        w, h, rows, info = png.Reader(filename=path).read()
        if info["bitdepth"] != 16:
            raise UnsupportedBitDepthError(f"{path}: expected 16-bit samples, found {info['bitdepth']}-bit")
        if info["greyscale"] or info.get("alpha") or info.get("palette"):
            raise MalformedPNGError(f"{path}: expected plain RGB colour type")
        data = np.vstack([np.asarray(r, dtype=np.uint16) for r in rows])
    except (png.FormatError, png.ChunkError, png.ProtocolError) as exc:
        raise MalformedPNGError(f"{path}: {exc}") from exc
    return data.reshape(h, w, 3).astype(np.float64) / 65535.0


def srgb_encode(img):
    """Standard sRGB transfer curve applied to linear values in [0, 1]."""
    v = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.where(v <= 0.0031308, 12.92 * v, 1.055 * np.power(v, 1 / 2.4) - 0.055)


def write_preview(path, img):
    """Write an 8-bit sRGB PNG for viewing. Never read back."""
    img = check_channels(img, 3)
    h, w, _ = img.shape
    codes = np.floor(srgb_encode(img) * 255.0 + 0.5).astype(np.uint8).reshape(h, w * 3)
    with open(path, "wb") as fh:
        png.Writer(width=w, height=h, greyscale=False, bitdepth=8).write(fh, codes)


def encode_float_map(data):
    data = np.asarray(data)
    if data.ndim == 2:
        data = data[..., None]
    if data.ndim != 3 or data.shape[2] not in (1, 2, 3):
        raise ChannelCountError(f"float maps hold 1-3 channels, got shape {data.shape}")
    h, w, c = data.shape
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    return _HEADER.pack(FLOAT_MAP_MAGIC, w, h, c) + payload


def decode_float_map(blob):
    """Parse a ``PWCC`` byte string into a float32 ``(H, W, C)`` array."""
    if len(blob) < _HEADER.size:
        raise TruncatedFileError(f"header needs {_HEADER.size} bytes, got {len(blob)}")
    magic, w, h, c = _HEADER.unpack_from(blob)
    if magic != FLOAT_MAP_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {FLOAT_MAP_MAGIC!r}")
    if c not in (1, 2, 3):
        raise ChannelCountError(f"channel count {c} outside {{1, 2, 3}}")
    n = w * h * c
    if len(blob) - _HEADER.size < 4 * n:
        raise TruncatedFileError(f"payload needs {4 * n} bytes, got {len(blob) - _HEADER.size}")
    data = np.frombuffer(blob, dtype="<f4", count=n, offset=_HEADER.size)
    return data.astype(np.float32).reshape(h, w, c)


def write_float_map(path, data):
    with open(path, "wb") as fh:
        fh.write(encode_float_map(data))


def read_float_map(path):
    with open(path, "rb") as fh:
        return decode_float_map(fh.read())
