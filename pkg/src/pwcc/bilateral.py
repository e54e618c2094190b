"""Edge-preserving bilateral post-filter for illumination maps and images."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .imagecore import check_channels, check_finite, g_normalize


@dataclass(frozen=True)
class BilateralConfig:
    """Spatial std (pixels), range std (intensity units) and window diameter.

    ``mode='joint'`` derives one range weight per pixel pair from the Euclidean
    RGB distance; ``mode='channel'`` weights every channel separately.
    """

    sigma_s: float = 75.0
    sigma_r: float = 75.0 / 255.0
    diameter: int = 9
    mode: str = "joint"

    def validate(self):
        if not (self.sigma_s > 0 and self.sigma_r > 0):
            raise InvalidArgumentError(f"filter sigmas must be positive, got {self.sigma_s}, {self.sigma_r}")
        if self.diameter < 1 or self.diameter % 2 == 0:
            raise InvalidArgumentError(f"diameter must be odd and >= 1, got {self.diameter}")
        if self.mode not in ("joint", "channel"):
            raise InvalidArgumentError(f"mode must be 'joint' or 'channel', got {self.mode!r}")
        return self


# sigma_r = 75 on 8-bit data, rescaled to unit range
PAPER_DEFAULT = BilateralConfig()


def window_offsets(diameter):
    """Offsets ``(dy, dx)`` inside the disc of the given diameter."""
    r = diameter // 2
    return [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1) if dy * dy + dx * dx <= r * r]


def bilateral_filter(img, cfg=PAPER_DEFAULT):
    """Normalised bilateral average over a disc window; borders use the clipped window."""
    cfg.validate()
    img = check_finite(check_channels(np.asarray(img, dtype=np.float64), 3))
    h, w, _ = img.shape
    r = cfg.diameter // 2
    pad = np.pad(img, ((r, r), (r, r), (0, 0)))
    valid = np.pad(np.ones((h, w)), r)
    inv_s = -0.5 / cfg.sigma_s ** 2
    inv_r = -0.5 / cfg.sigma_r ** 2
    joint = cfg.mode == "joint"
    num = np.zeros_like(img)
    den = np.zeros_like(img) if not joint else np.zeros((h, w, 1))
    for dy, dx in window_offsets(cfg.diameter):
        q = pad[r + dy:r + dy + h, r + dx:r + dx + w]
        m = valid[r + dy:r + dy + h, r + dx:r + dx + w, None]
        diff2 = (q - img) ** 2
        if joint:
            diff2 = diff2.sum(axis=-1, keepdims=True)
        wgt = np.exp(inv_s * (dy * dy + dx * dx) + inv_r * diff2) * m
        num += wgt * q
        den += wgt
    return num / den


def apply_postfilter(gain_map, cfg=PAPER_DEFAULT):
    """Filter a G-anchored illumination map and re-anchor G to exactly 1."""
    return g_normalize(bilateral_filter(gain_map, cfg))
