"""Synthetic two-illuminant scenes with exact ground-truth illumination maps.

A scene is a white-balanced base image lit by a per-pixel convex mixture of
two illuminant chromaticities::

    gt_map(x, y) = alpha(x, y) * l_a + (1 - alpha(x, y)) * l_b
    input(x, y)  = gt_map(x, y) * base(x, y)
"""

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import formats
from .errors import ConfigError, InvalidArgumentError, ShapeError
from .imagecore import check_linear_image, g_normalize, resize_bilinear

ALPHA_KINDS = ("constant", "linear", "radial", "voronoi")
SPLITS = ("train", "val", "test")
MANIFEST_VERSION = 1


@dataclass
class SceneSample:
    input: np.ndarray
    gt_image: np.ndarray
    gt_map: np.ndarray
    alpha: np.ndarray
    illum_a: np.ndarray
    illum_b: np.ndarray
    seed: int = 0


def illuminant(rgb):
    """Validate an illuminant chromaticity and return it G-normalized."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape != (3,) or not np.all(np.isfinite(rgb)) or np.any(rgb <= 0):
        raise InvalidArgumentError(f"illuminant needs three positive components, got {rgb!r}")
    return rgb / rgb[1]


def make_alpha_map(kind, w, h, seed=0, **params):
    """Build an alpha field of the given kind.

    Parameters by kind:

    ``constant``
        ``c`` -- the value everywhere.
    ``linear``
        ``axis`` ('x' or 'y') and ``reverse``; runs 0 -> 1 across the image,
        hitting both values exactly on the border pixels.
    ``radial``
        ``cx``, ``cy`` (centre as a fraction of the image extent) and ``r``
        (radius as a fraction of ``max(w, h)``); alpha = clip(1 - d / R, 0, 1).
    ``voronoi``
        Two sites drawn from ``seed``; pixels nearest the first site get 1,
        the rest 0. Ties go to the first site.
    """
    if w < 1 or h < 1:
        raise InvalidArgumentError(f"alpha map size must be at least 1x1, got {w}x{h}")
    if kind == "constant":
        c = float(params.get("c", 1.0))
        if not 0.0 <= c <= 1.0:
            raise InvalidArgumentError(f"constant alpha must lie in [0, 1], got {c}")
        return np.full((h, w), c)
    if kind == "linear":
        axis = params.get("axis", "x")
        if axis not in ("x", "y"):
            raise ConfigError(f"linear alpha axis must be 'x' or 'y', got {axis!r}")
        n = w if axis == "x" else h
        ramp = np.arange(n) / (n - 1) if n > 1 else np.full(1, 0.5)
        if params.get("reverse", False):
            ramp = ramp[::-1]
        out = np.broadcast_to(ramp[None, :] if axis == "x" else ramp[:, None], (h, w))
        return np.array(out, dtype=np.float64)
    if kind == "radial":
        cx, cy, r = (float(params.get(k, d)) for k, d in (("cx", 0.5), ("cy", 0.5), ("r", 0.5)))
        if not (0 <= cx <= 1 and 0 <= cy <= 1 and 0 < r):
            raise InvalidArgumentError(f"radial parameters out of range: cx={cx}, cy={cy}, r={r}")
        yy, xx = np.mgrid[0:h, 0:w]
        d = np.hypot(xx - cx * (w - 1), yy - cy * (h - 1))
        return np.clip(1.0 - d / (r * max(w, h)), 0.0, 1.0)
    if kind == "voronoi":
        rng = np.random.default_rng(seed)
        sites = rng.uniform([0, 0], [w, h], size=(2, 2))
        yy, xx = np.mgrid[0:h, 0:w] + 0.5
        d0 = np.hypot(xx - sites[0, 0], yy - sites[0, 1])
        d1 = np.hypot(xx - sites[1, 0], yy - sites[1, 1])
        return (d0 <= d1).astype(np.float64)
    raise ConfigError(f"unknown alpha kind {kind!r}; expected one of {ALPHA_KINDS}")


def mix_illuminants(alpha, l_a, l_b):
    """Per-pixel convex mixture of two G-normalized illuminants."""
    a = np.asarray(alpha, dtype=np.float64)[..., None]
    return g_normalize(a * l_a + (1.0 - a) * l_b)


def synthesize(base, l_a, l_b, alpha, seed=0):
    """Light ``base`` with two illuminants mixed by ``alpha``."""
    base = check_linear_image(np.asarray(base, dtype=np.float64))
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != base.shape[:2]:
        raise ShapeError(f"alpha map {alpha.shape} does not match image {base.shape[:2]}")
    l_a, l_b = illuminant(l_a), illuminant(l_b)
    gt_map = mix_illuminants(alpha, l_a, l_b)
    return SceneSample(
        input=gt_map * base, gt_image=base, gt_map=gt_map, alpha=alpha,
        illum_a=l_a, illum_b=l_b, seed=seed,
    )


def smooth_alpha(alpha, w_n=10.0, seed=0):
    """Label smoothing: add N(0, (alpha / w_n)^2) noise, then clamp to [0, 1]."""
    if not w_n > 0:
        raise InvalidArgumentError(f"smoothing constant must be positive, got {w_n}")
    alpha = np.asarray(alpha, dtype=np.float64)
    noise = np.random.default_rng(seed).standard_normal(alpha.shape) * (alpha / w_n)
    return np.clip(alpha + noise, 0.0, 1.0)


# -- procedural base images -------------------------------------------------

def _value_noise(rng, h, w, cell):
    gh, gw = -(-h // cell) + 1, -(-w // cell) + 1
    grid = rng.uniform(0.0, 1.0, size=(gh, gw))
    return resize_bilinear(grid, gw * cell, gh * cell)[:h, :w]


def procedural_base(rng, w, h):
    """A textured, colourful image whose channel statistics average to gray.

    Luminance is multi-scale value noise; colour comes from small Voronoi
    patches whose R, G and B reflectances are drawn independently from the same
    range, so no channel is favoured on average.
    """
    lum = sum(_value_noise(rng, h, w, c) * wt for c, wt in ((16, 0.5), (8, 0.3), (4, 0.2)))
    lum = 0.15 + 0.85 * lum
    n_sites = max(2, (w * h) // 8)
    sites = rng.uniform([0, 0], [w, h], size=(n_sites, 2))
    colors = rng.uniform(0.4, 1.0, size=(n_sites, 3))
    gray = rng.random(n_sites) < 0.2
    colors[gray] = colors[gray].mean(axis=1, keepdims=True)
    yy, xx = np.mgrid[0:h, 0:w] + 0.5
    d2 = (xx[..., None] - sites[:, 0]) ** 2 + (yy[..., None] - sites[:, 1]) ** 2
    patch = colors[np.argmin(d2, axis=-1)]
    return lum[..., None] * patch


def _folder_images(folder):
    if not os.path.isdir(folder):
        raise ConfigError(f"base image folder does not exist: {folder}")
    names = sorted(n for n in os.listdir(folder) if n.lower().endswith(".png"))
    if not names:
        raise ConfigError(f"no PNG files in base image folder {folder}")
    return [os.path.join(folder, n) for n in names]


# -- dataset generation -------------------------------------------------------

@dataclass
class SynthConfig:
    count: int = 400
    width: int = 64
    height: int = 64
    base_source: str = "procedural"
    illum_range: tuple = (0.4, 1.6)
    alpha_kinds: tuple = ALPHA_KINDS
    split: tuple = (0.75, 0.2, 0.05)
    seed: int = 0

    @classmethod
    def from_dict(cls, d):
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown synth config keys: {sorted(unknown)}")
        cfg = cls(**known)
        cfg.illum_range = tuple(cfg.illum_range)
        cfg.alpha_kinds = tuple(cfg.alpha_kinds)
        cfg.split = tuple(cfg.split)
        cfg.validate()
        return cfg

    def validate(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("image size must be positive")
        lo, hi = self.illum_range
        if not 0 < lo <= hi:
            raise ConfigError(f"illuminant range must satisfy 0 < lo <= hi, got {self.illum_range}")
        for k in self.alpha_kinds:
            if k not in ALPHA_KINDS:
                raise ConfigError(f"unknown alpha kind {k!r}")
        if not self.alpha_kinds:
            raise ConfigError("alpha_kinds is empty")
        if len(self.split) != 3 or min(self.split) < 0 or sum(self.split) <= 0:
            raise ConfigError(f"split must be three non-negative ratios, got {self.split}")

    def to_dict(self):
        d = asdict(self)
        d["illum_range"] = list(self.illum_range)
        d["alpha_kinds"] = list(self.alpha_kinds)
        d["split"] = list(self.split)
        return d


def split_sizes(count, ratios):
    """Largest-remainder allocation of ``count`` samples to train/val/test.

    Ties in the remainder go to the earlier split. Afterwards every split with a
    positive ratio is given at least one sample (when there are enough), taken
    from the largest non-train split so the train split keeps its share.
    """
    ratios = np.asarray(ratios, dtype=np.float64)
    quotas = count * ratios / ratios.sum()
    sizes = np.floor(quotas + 1e-9).astype(int)
    frac = np.maximum(quotas - sizes, 0.0)
    order = sorted(range(len(sizes)), key=lambda i: (-frac[i], i))
    for i in order[: count - sizes.sum()]:
        sizes[i] += 1
    wanted = [i for i in range(len(sizes)) if ratios[i] > 0]
    if count >= len(wanted):
        for i in wanted:
            if sizes[i] == 0:
                donors = [j for j in range(1, len(sizes)) if sizes[j] > 1]
                if not donors:
                    donors = [j for j in range(len(sizes)) if sizes[j] > 1]
                j = max(donors, key=lambda j: (sizes[j], -j))
                sizes[j] -= 1
                sizes[i] += 1
    return tuple(int(s) for s in sizes)


def _random_alpha(rng, kinds, w, h):
    kind = kinds[rng.integers(len(kinds))]
    if kind == "constant":
        params = {"c": float(rng.uniform())}
    elif kind == "linear":
        params = {"axis": ["x", "y"][rng.integers(2)], "reverse": bool(rng.integers(2))}
    elif kind == "radial":
        params = {"cx": float(rng.uniform()), "cy": float(rng.uniform()), "r": float(rng.uniform(0.3, 1.0))}
    else:
        params = {}
    return make_alpha_map(kind, w, h, seed=int(rng.integers(2**63)), **params)


def make_sample(cfg, index, folder_files=None):
    """Deterministically build sample ``index`` of a synthetic dataset."""
    rng = np.random.default_rng([cfg.seed, index])
    w, h = cfg.width, cfg.height
    if folder_files:
        path = folder_files[rng.integers(len(folder_files))]
        base = resize_bilinear(formats.read_image(path), w, h)
        base = np.clip(base, 1e-3, None)
    else:
        base = procedural_base(rng, w, h)
    lo, hi = cfg.illum_range
    l_a = illuminant(rng.uniform(lo, hi, 3))
    l_b = illuminant(rng.uniform(lo, hi, 3))
    alpha = _random_alpha(rng, cfg.alpha_kinds, w, h)
    # keep the lit image inside [0, 1] so PNG encoding never clips
    peak = (mix_illuminants(alpha, l_a, l_b) * base).max()
    if peak > 0.98:
        base = base * (0.98 / peak)
    return synthesize(base, l_a, l_b, alpha, seed=index)


def generate_dataset(cfg, out_dir):
    """Write a synthetic dataset and its manifest; returns the manifest dict.

    The manifest is written to ``out_dir/manifest.json`` with sorted keys.
    """
    if isinstance(cfg, dict):
        cfg = SynthConfig.from_dict(cfg)
    cfg.validate()
    if cfg.count <= 0:
        raise ConfigError("dataset count must be positive; an empty manifest is not allowed")
    folder_files = None
    if cfg.base_source != "procedural":
        folder_files = _folder_images(cfg.base_source)
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"output directory is not writable: {out_dir}")

    sizes = split_sizes(cfg.count, cfg.split)
    order = np.random.default_rng([cfg.seed, 2**32]).permutation(cfg.count)
    split_of = np.empty(cfg.count, dtype=object)
    start = 0
    for name, n in zip(SPLITS, sizes):
        split_of[order[start:start + n]] = name
        start += n

    samples = []
    for i in range(cfg.count):
        s = make_sample(cfg, i, folder_files)
        sid = f"s{i:05d}"
        entry = {
            "id": sid,
            "split": str(split_of[i]),
            "input_png": f"{sid}_input.png",
            "gt_png": f"{sid}_gt.png",
            "gt_map_pwcc": f"{sid}_gtmap.pwcc",
            "alpha_pwcc": f"{sid}_alpha.pwcc",
            "illum_a": [float(v) for v in s.illum_a],
            "illum_b": [float(v) for v in s.illum_b],
        }
        formats.write_image(os.path.join(out_dir, entry["input_png"]), s.input)
        formats.write_image(os.path.join(out_dir, entry["gt_png"]), s.gt_image)
        formats.write_float_map(os.path.join(out_dir, entry["gt_map_pwcc"]), s.gt_map)
        formats.write_float_map(os.path.join(out_dir, entry["alpha_pwcc"]), s.alpha)
        samples.append(entry)

    manifest = {"version": MANIFEST_VERSION, "seed": cfg.seed, "config": cfg.to_dict(), "samples": samples}
    write_manifest(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def write_manifest(path, manifest):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path):
    """Read a manifest and remember its directory for resolving sample paths."""
    with open(path) as fh:
        manifest = json.load(fh)
    if "samples" not in manifest:
        raise ConfigError(f"{path} is not a dataset manifest (no 'samples')")
    manifest["root"] = os.path.dirname(os.path.abspath(path))
    return manifest


def split_samples(manifest, split):
    return [s for s in manifest["samples"] if s["split"] == split]


def load_sample(manifest, entry):
    """Load one manifest entry into arrays (input, gt map, alpha, illuminants)."""
    root = manifest.get("root", ".")
    return {
        "id": entry["id"],
        "input": formats.read_image(os.path.join(root, entry["input_png"])),
        "gt_image": formats.read_image(os.path.join(root, entry["gt_png"])),
        "gt_map": formats.read_float_map(os.path.join(root, entry["gt_map_pwcc"])).astype(np.float64),
        "alpha": formats.read_float_map(os.path.join(root, entry["alpha_pwcc"]))[..., 0].astype(np.float64),
        "illum_a": np.asarray(entry["illum_a"], dtype=np.float64),
        "illum_b": np.asarray(entry["illum_b"], dtype=np.float64),
    }
