"""``pwcc`` command line: synth, train, infer, eval and grid.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime or divergence
error, 4 I/O error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import formats
from .bilateral import BilateralConfig, apply_postfilter, bilateral_filter
from .errors import ConfigError, DivergenceError, FormatError, PWCCError, ShapeError
from .estimator import PRESETS, TrainConfig, infer, load_params, preset_config, save_params, train, write_training_log
from .evaluation import format_table, evaluate_method, predict_map
from .imagecore import DEFAULT_EPSILON, g_normalize, resize_bilinear
from .synth import SynthConfig, generate_dataset, load_manifest, load_sample

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("pwcc")


class UsageError(Exception):
    pass


def load_run_config(path):
    """Read a TOML or JSON run configuration."""
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        if path.endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            return tomllib.loads(raw.decode())
        return json.loads(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def resolve_train_config(preset, doc, overrides):
    """Expand a preset name plus optional config sections into a TrainConfig."""
    doc = doc or {}
    preset = preset or doc.get("preset", "pwcc_v1")
    section = dict(doc.get("train", {}))
    section.update({k: v for k, v in overrides.items() if v is not None})
    if preset == "custom":
        return TrainConfig.from_dict(section)
    if preset not in PRESETS:
        raise UsageError(f"unknown preset {preset!r}; choose from {sorted(PRESETS) + ['custom']}")
    return preset_config(preset, **section)


def bilateral_from(args, doc=None):
    section = dict((doc or {}).get("bilateral", {}))
    for key in ("sigma_s", "sigma_r", "diameter"):
        val = getattr(args, key, None)
        if val is not None:
            section[key] = val
    return BilateralConfig(**section).validate()


def _set_threads():
    n = int(os.environ.get("PWCC_THREADS", "0") or 0)
    if n > 0:
        from threadpoolctl import threadpool_limits

        threadpool_limits(n)


# -- commands -------------------------------------------------------------------

def cmd_synth(args):
    doc = load_run_config(args.config)
    section = doc.get("synth", doc)
    cfg = SynthConfig.from_dict({k: v for k, v in section.items() if k not in ("train", "bilateral", "preset")})
    generate_dataset(cfg, args.out)
    path = os.path.join(args.out, "manifest.json")
    print(path)
    return EXIT_OK


def cmd_train(args):
    doc = load_run_config(args.config) if args.config else None
    cfg = resolve_train_config(args.preset, doc, {"epochs": args.epochs, "seed": args.seed})
    manifest = load_manifest(args.manifest)
    params, records = train(manifest, cfg)
    save_params(args.out, params)
    write_training_log(args.log or os.path.splitext(args.out)[0] + ".csv", records)
    best = min(r.val_mean_angular_error for r in records)
    print(f"best val mean angular error: {best:.4f} deg")
    return EXIT_OK


def _white_balance(img, gain_map):
    return img / gain_map


def cmd_infer(args):
    img = formats.read_image(args.input)
    h, w = img.shape[:2]
    if args.oracle_map:
        pred = g_normalize(formats.read_float_map(args.oracle_map).astype(np.float64))
    else:
        if not os.path.exists(args.model):
            raise UsageError(f"model file not found: {args.model}")
        params = load_params(args.model)
        if h % 4 or w % 4:
            if args.strict:
                raise ShapeError(f"image size {w}x{h} is not divisible by 4 (--strict)")
            h4, w4 = max(4, h // 4 * 4), max(4, w // 4 * 4)
            log.warning("resizing %dx%d input to %dx%d for the estimator", w, h, w4, h4)
            pred = g_normalize(resize_bilinear(infer(params, resize_bilinear(img, w4, h4), args.epsilon), w, h))
        else:
            pred = infer(params, img, args.epsilon)
    if pred.shape != img.shape:
        raise ShapeError(f"map {pred.shape[:2]} does not match image {img.shape[:2]}")
    prefix = args.out_prefix
    formats.write_float_map(prefix + "_map.pwcc", pred)
    formats.write_image(prefix + "_wb.png", _white_balance(img, pred))
    if args.filter_target != "none":
        cfg = bilateral_from(args)
        if args.filter_target == "map":
            fmap = apply_postfilter(pred, cfg)
            formats.write_float_map(prefix + "_map_filtered.pwcc", fmap)
            formats.write_image(prefix + "_wb_filtered.png", _white_balance(img, fmap))
        else:
            formats.write_image(prefix + "_wb_filtered.png", bilateral_filter(_white_balance(img, pred), cfg))
    print(prefix)
    return EXIT_OK


def cmd_eval(args):
    manifest = load_manifest(args.manifest)
    params = None
    if args.method == "trained":
        if not args.model:
            raise UsageError("--method trained needs --model")
        if not os.path.exists(args.model):
            raise UsageError(f"model file not found: {args.model}")
        params = load_params(args.model)
    postfilter = bilateral_from(args) if args.filter else None
    summary = evaluate_method(manifest, args.split, args.method, params, postfilter, args.filter_target)
    if args.filter:
        summary.method += "+bf"
    table = format_table([summary])
    stem = args.out or os.path.join(os.path.dirname(os.path.abspath(args.manifest)), f"eval_{args.split}_{summary.method}")
    with open(stem + ".json", "w") as fh:
        fh.write(summary.to_json())
    with open(stem + ".txt", "w") as fh:
        fh.write(table)
    print(table, end="")
    return EXIT_OK


def _grid_panel(method, sample, params_cache):
    img = sample["input"]
    if method in ("gray_world", "white_patch", "oracle"):
        pred = predict_map(method, img, sample["gt_map"])
    else:
        if method not in params_cache:
            if not os.path.exists(method):
                raise UsageError(f"model file not found: {method}")
            params_cache[method] = load_params(method)
        pred = predict_map("trained", img, params=params_cache[method])
    return _white_balance(img, pred)


def cmd_grid(args):
    manifest = load_manifest(args.manifest)
    by_id = {s["id"]: s for s in manifest["samples"]}
    missing = [i for i in args.ids if i not in by_id]
    if missing:
        raise UsageError(f"unknown sample id(s): {', '.join(missing)}")
    rows, cache = [], {}
    for sid in args.ids:
        s = load_sample(manifest, by_id[sid])
        panels = [s["input"]] + [_grid_panel(m, s, cache) for m in args.models] + [s["gt_image"]]
        rows.append(np.concatenate(panels, axis=1))
    grid = np.concatenate(rows, axis=0)
    formats.write_preview(args.out, grid)
    print(args.out)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _add_filter_args(p):
    p.add_argument("--sigma-s", dest="sigma_s", type=float, help="spatial sigma in pixels (default 75)")
    p.add_argument("--sigma-r", dest="sigma_r", type=float, help="range sigma in unit intensity (default 75/255)")
    p.add_argument("--diameter", type=int, help="window diameter in pixels, odd (default 9)")


def build_parser():
    parser = argparse.ArgumentParser(prog="pwcc", description="Pixel-wise two-illuminant colour constancy toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic two-illuminant dataset")
    p.add_argument("--config", required=True, help="TOML or JSON run config ([synth] section)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the estimator")
    p.add_argument("--manifest", required=True)
    p.add_argument("--preset", choices=sorted(PRESETS) + ["custom"])
    p.add_argument("--config", help="TOML or JSON run config ([train] section overrides the preset)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output .pwcm model path")
    p.add_argument("--log", help="training log CSV (default: next to the model)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="predict an illumination map and white-balance an image")
    p.add_argument("--model", help="trained .pwcm model")
    p.add_argument("--oracle-map", help="use this PWCC map as the prediction instead of a model")
    p.add_argument("--input", required=True, help="16-bit linear PNG")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--filter-target", choices=("map", "image", "none"), default="map")
    p.add_argument("--strict", action="store_true", help="fail instead of resizing indivisible inputs")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    _add_filter_args(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="angular error statistics on a dataset split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--method", default="trained", choices=("oracle", "gray_world", "white_patch", "trained"))
    p.add_argument("--model")
    p.add_argument("--filter", action="store_true", help="bilateral post-filter the predictions")
    p.add_argument("--filter-target", choices=("map", "image"), default="map")
    p.add_argument("--out", help="output stem for .json and .txt reports")
    _add_filter_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="8-bit sRGB comparison grid: input | predictions | ground truth")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ids", nargs="+", required=True)
    p.add_argument("--models", nargs="*", default=[], help="model paths or gray_world / white_patch / oracle")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "infer" and not (args.model or args.oracle_map):
        parser.error("infer needs --model or --oracle-map")
    _set_threads()
    try:
        return args.func(args)
    except (UsageError, ConfigError, ShapeError) as exc:
        print(f"pwcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"pwcc: training diverged: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, FormatError) as exc:
        print(f"pwcc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PWCCError as exc:
        print(f"pwcc: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
