"""Recovery angular error and dataset-level error statistics."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidArgumentError, InvalidInputError
from .imagecore import check_channels, check_same_shape, g_normalize, resize_bilinear


def angular_error_map(gt, pred):
    """Per-pixel angle in degrees between ground-truth and estimated gain vectors.

    The cosine is ``dot / sqrt(|gt|^2 |pred|^2)`` with a single square root,
    which makes it exactly 1 when ``pred`` equals ``gt`` or a power-of-two
    multiple of it; it is then clamped to [-1, 1] so ``arccos`` never sees a
    value outside its domain.
    """
    gt = check_channels(np.asarray(gt, dtype=np.float64), 3, "ground-truth map")
    pred = check_channels(np.asarray(pred, dtype=np.float64), 3, "predicted map")
    check_same_shape(gt, pred, "ground-truth and predicted maps")
    dot = gt[..., 0] * pred[..., 0] + gt[..., 1] * pred[..., 1] + gt[..., 2] * pred[..., 2]
    ss_gt = gt[..., 0] ** 2 + gt[..., 1] ** 2 + gt[..., 2] ** 2
    ss_pred = pred[..., 0] ** 2 + pred[..., 1] ** 2 + pred[..., 2] ** 2
    for name, ss in (("ground-truth", ss_gt), ("predicted", ss_pred)):
        bad = ~(ss > 0)
        if bad.any():
            y, x = (int(i) for i in np.argwhere(bad)[0])
            raise InvalidInputError(f"{name} map has a zero-length vector at pixel (y={y}, x={x})")
    cos = np.clip(dot / np.sqrt(ss_gt * ss_pred), -1.0, 1.0)
    return np.degrees(np.arccos(cos))


def image_error(gt, pred):
    """Mean per-pixel angular error of one image, in degrees."""
    return float(np.mean(angular_error_map(gt, pred)))


@dataclass
class ErrorSummary:
    per_image: list
    mean: float
    median: float
    worst25: float
    best25: float
    method: str = ""
    split: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.per_image)

    def to_dict(self):
        d = {
            "method": self.method,
            "split": self.split,
            "n": self.n,
            "mean": self.mean,
            "median": self.median,
            "worst25": self.worst25,
            "best25": self.best25,
            "per_image": [{"id": i, "error": e} for i, e in self.per_image],
        }
        d.update(self.extra)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def summarize(errors, method="", split=""):
    """Mean, median, worst-25% and best-25% of per-image errors.

    The quartile groups hold ``ceil(n / 4)`` images each. Sorting is by error,
    then sample id.
    """
    errors = [(str(i), float(e)) for i, e in errors]
    if not errors:
        raise InvalidArgumentError("cannot summarise an empty error list")
    ordered = sorted(errors, key=lambda t: (t[1], t[0]))
    vals = [e for _, e in ordered]
    n = len(vals)
    k = math.ceil(n / 4)
    mid = n // 2
    median = vals[mid] if n % 2 else (vals[mid - 1] + vals[mid]) / 2
    return ErrorSummary(
        per_image=ordered,
        mean=math.fsum(vals) / n,
        median=median,
        worst25=math.fsum(vals[-k:]) / k,
        best25=math.fsum(vals[:k]) / k,
        method=method,
        split=split,
    )


def format_table(summaries):
    """Plain-text table with the columns Method, Mean, Median, W.25%, B.25%."""
    rows = [("Method", "Mean", "Median", "W.25%", "B.25%")]
    for s in summaries:
        rows.append((s.method or "-", *(f"{v:.2f}" for v in (s.mean, s.median, s.worst25, s.best25))))
    widths = [max(len(r[c]) for r in rows) for c in range(5)]
    lines = []
    for j, r in enumerate(rows):
        cells = [r[0].ljust(widths[0])] + [r[c].rjust(widths[c]) for c in range(1, 5)]
        lines.append(" | ".join(cells))
        if j == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


METHODS = ("oracle", "gray_world", "white_patch", "trained")


def _trained_map(params, img, epsilon):
    from .estimator import infer

    h, w = img.shape[:2]
    h4, w4 = max(4, h // 4 * 4), max(4, w // 4 * 4)
    if (h4, w4) == (h, w):
        return infer(params, img, epsilon)
    pred = infer(params, resize_bilinear(img, w4, h4), epsilon)
    return g_normalize(resize_bilinear(pred, w, h))


def predict_map(method, img, gt_map=None, params=None, epsilon=1e-6):
    """Illumination map (image = map * canonical image) predicted by ``method``."""
    from .baselines import gray_world, white_patch

    if method == "oracle":
        return g_normalize(gt_map)
    if method == "gray_world":
        return g_normalize(1.0 / gray_world(img))
    if method == "white_patch":
        return g_normalize(1.0 / white_patch(img))
    if method == "trained":
        if params is None:
            raise ConfigError("method 'trained' needs estimator parameters")
        return _trained_map(params, img, epsilon)
    raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")


def filter_prediction(img, pred, postfilter, target="map"):
    """Bilateral post-filtering of a prediction, on the map or on the balanced image.

    With ``target='image'`` the balanced image is filtered and the implied
    illumination ``input / filtered`` is returned.
    """
    from .bilateral import apply_postfilter, bilateral_filter

    if target == "map":
        return apply_postfilter(pred, postfilter)
    if target == "image":
        balanced = img / pred
        filtered = bilateral_filter(balanced, postfilter)
        implied = np.where(filtered > 0, img / np.maximum(filtered, 1e-12), pred)
        implied = np.where(implied > 0, implied, pred)
        return g_normalize(implied)
    raise ConfigError(f"filter target must be 'map' or 'image', got {target!r}")


def evaluate_method(manifest, split, method, params=None, postfilter=None,
                    filter_target="map", epsilon=1e-6):
    """Per-image angular errors of ``method`` on one split, summarised."""
    from .synth import load_sample, split_samples

    entries = split_samples(manifest, split)
    if not entries:
        raise InvalidArgumentError(f"split {split!r} is empty")
    errors = []
    for e in entries:
        s = load_sample(manifest, e)
        try:
            pred = predict_map(method, s["input"], s["gt_map"], params, epsilon)
            if postfilter is not None:
                pred = filter_prediction(s["input"], pred, postfilter, filter_target)
            errors.append((s["id"], image_error(s["gt_map"], pred)))
        except (InvalidInputError, ValueError) as exc:
            raise type(exc)(f"sample {s['id']}: {exc}") from exc
    return summarize(errors, method=method, split=split)
