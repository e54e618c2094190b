"""Training objective on log-chrominance maps: L2 data term plus anisotropic TV.

All functions accept a single map ``(H, W, C)`` or a batch ``(N, H, W, C)`` and
return ``(value, grad)`` with ``grad`` shaped like the prediction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ShapeError


@dataclass(frozen=True)
class LossReport:
    l2: float
    tv: float
    total: float
    lambda_tv: float


def _check_map(pred):
    if pred.ndim < 3 or pred.shape[-3] < 1 or pred.shape[-2] < 1:
        raise ShapeError(f"expected (..., H, W, C) map, got shape {pred.shape}")


def l2_loss(pred, target):
    """Mean squared error over every entry and its gradient."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction {pred.shape} and target {target.shape} differ")
    diff = pred - target
    n = diff.size
    return float(np.sum(diff * diff) / n), diff * (2.0 / n)


def tv_loss(pred):
    """Anisotropic total variation with forward differences, per pixel.

    Sums ``|p(i,j) - p(i+1,j)| + |p(i,j) - p(i,j+1)|`` over channels and all
    in-bounds neighbour pairs, divided by the number of pixels (times the batch
    size). The subgradient of ``|.|`` at zero is taken as 0.
    """
    pred = np.asarray(pred)
    _check_map(pred)
    h, w = pred.shape[-3], pred.shape[-2]
    n_pix = pred.size // pred.shape[-1]
    dy = pred[..., 1:, :, :] - pred[..., :-1, :, :]
    dx = pred[..., :, 1:, :] - pred[..., :, :-1, :]
    value = (np.sum(np.abs(dy)) + np.sum(np.abs(dx))) / n_pix

    grad = np.zeros_like(pred)
    if h > 1:
        sy = np.sign(dy)
        grad[..., 1:, :, :] += sy
        grad[..., :-1, :, :] -= sy
    if w > 1:
        sx = np.sign(dx)
        grad[..., :, 1:, :] += sx
        grad[..., :, :-1, :] -= sx
    grad /= n_pix
    return float(value), grad


def combined_loss(pred, target, lambda_tv):
    """``L2 + lambda_tv * TV`` as a LossReport plus the summed gradient."""
    if lambda_tv < 0:
        raise InvalidArgumentError(f"lambda_tv must be non-negative, got {lambda_tv}")
    l2, g_l2 = l2_loss(pred, target)
    tv, g_tv = tv_loss(pred)
    report = LossReport(l2=l2, tv=tv, total=l2 + lambda_tv * tv, lambda_tv=float(lambda_tv))
    return report, g_l2 + lambda_tv * g_tv
