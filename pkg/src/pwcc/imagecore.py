"""Image arrays, log-chrominance transforms and von Kries white balancing.

Images are plain ``numpy`` arrays in row-major ``(H, W, C)`` layout:

* linear image: ``(H, W, 3)`` non-negative linear RGB,
* chroma image: ``(H, W, 2)`` log-chrominance ``(u, v)``,
* illumination map: ``(H, W, 3)`` strictly positive per-pixel diagonal gains,
* alpha map: ``(H, W)`` mixing weights.
"""

import numpy as np

from .errors import InvalidArgumentError, InvalidInputError, ShapeError

DEFAULT_EPSILON = 1e-6


def _first_bad_pixel(mask):
    idx = np.argwhere(mask)[0]
    return tuple(int(i) for i in idx[:2])


def check_finite(arr, what="image"):
    """Raise InvalidInputError naming the first pixel holding a NaN or inf."""
    arr = np.asarray(arr)
    bad = ~np.isfinite(arr)
    if bad.any():
        y, x = _first_bad_pixel(bad.reshape(arr.shape[0], arr.shape[1], -1).any(axis=-1))
        raise InvalidInputError(f"non-finite value in {what} at pixel (y={y}, x={x})")
    return arr


def check_channels(arr, channels, what="image"):
    arr = np.asarray(arr)
    if arr.ndim != 3 or arr.shape[2] != channels:
        raise ShapeError(f"{what} must have shape (H, W, {channels}), got {arr.shape}")
    return arr


def check_same_shape(a, b, what="inputs"):
    if a.shape[:2] != b.shape[:2]:
        raise ShapeError(f"{what} differ in size: {a.shape[:2]} vs {b.shape[:2]}")


def check_linear_image(img):
    img = check_channels(img, 3)
    check_finite(img)
    if (img < 0).any():
        y, x = _first_bad_pixel((img < 0).any(axis=-1))
        raise InvalidInputError(f"negative intensity at pixel (y={y}, x={x})")
    return img


def to_log_chroma(img, epsilon=DEFAULT_EPSILON):
    """Map a linear RGB image (or gain map) to log-chrominance ``(u, v)``.

    ``u = ln((R + eps) / (G + eps))`` and ``v = ln((B + eps) / (G + eps))``.
    """
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    img = check_linear_image(np.asarray(img, dtype=np.float64))
    g = img[..., 1] + epsilon
    u = np.log((img[..., 0] + epsilon) / g)
    v = np.log((img[..., 2] + epsilon) / g)
    return np.stack([u, v], axis=-1)


def from_log_chroma(chroma):
    """Rebuild a G-anchored gain map ``(exp(u), 1, exp(v))``."""
    chroma = check_finite(check_channels(chroma, 2, "chroma image"), "chroma image")
    out = np.empty(chroma.shape[:2] + (3,), dtype=np.float64)
    out[..., 0] = np.exp(chroma[..., 0])
    out[..., 1] = 1.0
    out[..., 2] = np.exp(chroma[..., 1])
    return out


def g_normalize(rgb):
    """Divide every RGB triplet by its G component."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return rgb / rgb[..., 1:2]


def apply_white_balance(img, gains):
    """Element-wise von Kries product of an image and a per-pixel gain map.

    No clamping happens here; values above 1 survive until encoding.
    """
    img = check_channels(img, 3)
    gains = check_channels(gains, 3, "illumination map")
    check_same_shape(img, gains, "image and illumination map")
    return img * gains


def resize_bilinear(img, new_w, new_h):
    """Bilinear resampling with half-pixel-centred sample positions.

    Works on any ``(H, W, C)`` or ``(H, W)`` array. Same-size requests return
    an unmodified copy.
    """
    if new_w < 1 or new_h < 1:
        raise InvalidArgumentError(f"target size must be at least 1x1, got {new_w}x{new_h}")
    img = np.asarray(img)
    h, w = img.shape[:2]
    if (h, w) == (new_h, new_w):
        return img.copy()

    def axis_weights(n_in, n_out):
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        pos = np.clip(pos, 0.0, n_in - 1)
        lo = np.floor(pos).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        return lo, hi, pos - lo

    y0, y1, fy = axis_weights(h, new_h)
    x0, x1, fx = axis_weights(w, new_w)
    src = img.astype(np.float64)
    extra = (1,) * (img.ndim - 2)
    fy = fy.reshape((-1, 1) + extra)
    fx = fx.reshape((1, -1) + extra)
    rows = src[y0] * (1 - fy) + src[y1] * fy
    return rows[:, x0] * (1 - fx) + rows[:, x1] * fx
