"""Single-illuminant Gray World and White Patch estimators.

Both return a constant G-anchored *correction* gain map: multiplying the input
by it neutralises the estimated illuminant. The illumination itself is the
reciprocal.
"""

import numpy as np

from .errors import EstimationError
from .imagecore import check_linear_image

_MIN_STAT = 1e-8


def _gains_from_illuminant(est, h, w, name):
    if np.any(est <= _MIN_STAT):
        raise EstimationError(f"{name}: channel statistic too small to estimate an illuminant: {est}")
    gains = est[1] / est
    gains[1] = 1.0
    return np.broadcast_to(gains, (h, w, 3)).copy()


def gray_world(img):
    """Gains ``(mean_G / mean_R, 1, mean_G / mean_B)`` from per-channel means."""
    img = check_linear_image(np.asarray(img, dtype=np.float64))
    h, w, _ = img.shape
    return _gains_from_illuminant(img.reshape(-1, 3).mean(axis=0), h, w, "gray world")


def white_patch(img):
    """Gains ``(max_G / max_R, 1, max_G / max_B)`` from per-channel maxima."""
    img = check_linear_image(np.asarray(img, dtype=np.float64))
    h, w, _ = img.shape
    return _gains_from_illuminant(img.reshape(-1, 3).max(axis=0), h, w, "white patch")
