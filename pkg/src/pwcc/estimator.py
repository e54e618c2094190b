"""Compact encoder-decoder illumination estimator.

The network maps the log-chrominance of an input image to a per-pixel
log-chrominance illumination map. Layout (NHWC, same padding)::

    e1 = relu(conv3x3(x,  2 -> 8))
    e2 = relu(conv3x3/2(e1, 8 -> 16))
    e3 = relu(conv3x3/2(e2, 16 -> 32))
    b  = relu(conv3x3(e3, 32 -> 32))
    d2 = relu(conv3x3([up(b), e2], 48 -> 16))
    d1 = relu(conv3x3([up(d2), e1], 24 -> 8))
    y  = conv1x1(d1, 8 -> 2)
"""

import csv
import logging
import struct
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import nn
from .errors import (
    BadMagicError,
    CacheMismatchError,
    ConfigError,
    DivergenceError,
    ShapeError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .evaluation import angular_error_map
from .imagecore import DEFAULT_EPSILON, from_log_chroma, resize_bilinear, to_log_chroma
from .losses import combined_loss
from .synth import load_sample, mix_illuminants, smooth_alpha, split_samples

log = logging.getLogger(__name__)

# (kernel, in channels, out channels, stride)
ARCHITECTURE = (
    (3, 2, 8, 1),
    (3, 8, 16, 2),
    (3, 16, 32, 2),
    (3, 32, 32, 1),
    (3, 48, 16, 1),
    (3, 24, 8, 1),
    (1, 8, 2, 1),
)

PARAMS_MAGIC = b"PWCM"
PARAMS_VERSION = 1


@dataclass
class EstimatorParams:
    """Weights ``(k, k, Cin, Cout)`` and biases ``(Cout,)`` for each layer."""

    weights: list
    biases: list

    def blocks(self):
        """Flat list ``[w0, b0, w1, b1, ...]``."""
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    @classmethod
    def from_blocks(cls, blocks):
        return cls(weights=list(blocks[0::2]), biases=list(blocks[1::2]))

    @property
    def size(self):
        return sum(a.size for a in self.blocks())

    def astype(self, dtype):
        return EstimatorParams([w.astype(dtype) for w in self.weights], [b.astype(dtype) for b in self.biases])

    def copy(self):
        return EstimatorParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self):
        return EstimatorParams([np.zeros_like(w) for w in self.weights], [np.zeros_like(b) for b in self.biases])


def init_params(seed=0, dtype=np.float32):
    """Uniform fan-in initialisation, zero biases.

    ReLU layers draw from U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)); the linear
    output layer uses sqrt(3 / fan_in).
    """
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for i, (k, cin, cout, _) in enumerate(ARCHITECTURE):
        fan_in = k * k * cin
        gain = 3.0 if i == len(ARCHITECTURE) - 1 else 6.0
        bound = np.sqrt(gain / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(k, k, cin, cout)).astype(dtype))
        biases.append(np.zeros(cout, dtype=dtype))
    return EstimatorParams(weights, biases)


def init_scale(layer):
    """Target standard deviation of a layer's initial weights."""
    k, cin, _, _ = ARCHITECTURE[layer]
    gain = 3.0 if layer == len(ARCHITECTURE) - 1 else 6.0
    return np.sqrt(gain / (k * k * cin)) / np.sqrt(3.0)


def _signature(params):
    return tuple(w.shape for w in params.weights) + tuple(b.shape for b in params.biases)


def forward(params, x):
    """Run the network on ``(H, W, 2)`` or ``(N, H, W, 2)`` log-chroma input.

    Returns the prediction (same shape as ``x``) and a cache for backward.
    """
    x = np.asarray(x)
    single = x.ndim == 3
    if single:
        x = x[None]
    if x.ndim != 4 or x.shape[-1] != 2:
        raise ShapeError(f"estimator input must be (N, H, W, 2), got {x.shape}")
    h, w = x.shape[1:3]
    if h % 4 or w % 4 or h == 0 or w == 0:
        raise ShapeError(f"estimator input sides must be positive multiples of 4, got {h}x{w}")
    x = x.astype(params.weights[0].dtype, copy=False)
    W, B = params.weights, params.biases

    caches, acts = [], []

    def conv_relu(i, inp, relu=True):
        out, c = nn.conv_forward(inp, W[i], B[i], ARCHITECTURE[i][3])
        caches.append(c)
        if relu:
            out = nn.relu_forward(out)
        acts.append(out)
        return out

    e1 = conv_relu(0, x)
    e2 = conv_relu(1, e1)
    e3 = conv_relu(2, e2)
    b = conv_relu(3, e3)
    d2 = conv_relu(4, np.concatenate([nn.upsample2(b), e2], axis=-1))
    d1 = conv_relu(5, np.concatenate([nn.upsample2(d2), e1], axis=-1))
    y = conv_relu(6, d1, relu=False)
    cache = {"convs": caches, "acts": acts, "single": single, "signature": _signature(params)}
    return (y[0] if single else y), cache


def backward(params, cache, grad_out):
    """Backpropagate ``grad_out`` (shaped like the forward output) to parameter gradients."""
    if cache.get("signature") != _signature(params):
        raise CacheMismatchError("forward cache was built with differently shaped parameters")
    g = np.asarray(grad_out, dtype=params.weights[0].dtype)
    if cache["single"]:
        g = g[None]
    if g.shape != cache["acts"][-1].shape:
        raise CacheMismatchError(f"grad_out shape {g.shape} does not match forward output {cache['acts'][-1].shape}")
    W, convs, acts = params.weights, cache["convs"], cache["acts"]
    dW, dB = [None] * 7, [None] * 7

    def back(i, dout):
        dx, dW[i], dB[i] = nn.conv_backward(dout, W[i], convs[i], need_dx=i > 0)
        return dx

    d_d1 = back(6, g)
    d_cat1 = back(5, nn.relu_backward(d_d1, acts[5]))
    c_up = acts[4].shape[-1]
    d_d2 = nn.upsample2_backward(d_cat1[..., :c_up])
    d_e1 = d_cat1[..., c_up:]
    d_cat2 = back(4, nn.relu_backward(d_d2, acts[4]))
    c_up = acts[3].shape[-1]
    d_b = nn.upsample2_backward(d_cat2[..., :c_up])
    d_e2 = d_cat2[..., c_up:]
    d_e3 = back(3, nn.relu_backward(d_b, acts[3]))
    d_e2 = d_e2 + back(2, nn.relu_backward(d_e3, acts[2]))
    d_e1 = d_e1 + back(1, nn.relu_backward(d_e2, acts[1]))
    back(0, nn.relu_backward(d_e1, acts[0]))
    return EstimatorParams(dW, dB)


def infer(params, img, epsilon=DEFAULT_EPSILON):
    """Predict a G-anchored illumination map for a linear RGB image."""
    pred, _ = forward(params, to_log_chroma(img, epsilon))
    return from_log_chroma(pred.astype(np.float64))


def predict_chroma(params, batch, chunk=16):
    """Forward a stack of log-chroma inputs in chunks, discarding caches."""
    outs = [forward(params, batch[i:i + chunk])[0] for i in range(0, len(batch), chunk)]
    return np.concatenate(outs, axis=0)


# -- serialisation ------------------------------------------------------------

def params_to_bytes(params):
    blocks = params.blocks()
    out = [PARAMS_MAGIC, struct.pack("<II", PARAMS_VERSION, len(blocks))]
    for a in blocks:
        out.append(struct.pack("<I", a.ndim))
        out.append(struct.pack(f"<{a.ndim}I", *a.shape))
        out.append(np.ascontiguousarray(a, dtype="<f4").tobytes())
    return b"".join(out)


def params_from_bytes(blob):
    if len(blob) < 12:
        raise TruncatedFileError("parameter file shorter than its header")
    if blob[:4] != PARAMS_MAGIC:
        raise BadMagicError(f"bad magic {blob[:4]!r}, expected {PARAMS_MAGIC!r}")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != PARAMS_VERSION:
        raise UnsupportedVersionError(f"parameter format version {version} is not supported (expected {PARAMS_VERSION})")
    pos, blocks = 12, []
    try:
        for _ in range(count):
            (rank,) = struct.unpack_from("<I", blob, pos)
            shape = struct.unpack_from(f"<{rank}I", blob, pos + 4)
            pos += 4 + 4 * rank
            n = int(np.prod(shape, dtype=np.int64))
            if pos + 4 * n > len(blob):
                raise TruncatedFileError("parameter payload is truncated")
            blocks.append(np.frombuffer(blob, dtype="<f4", count=n, offset=pos).astype(np.float32).reshape(shape))
            pos += 4 * n
    except struct.error as exc:
        raise TruncatedFileError(f"parameter header is truncated: {exc}") from exc
    params = EstimatorParams.from_blocks(blocks)
    expected = _signature(init_params(0))
    if _signature(params) != expected:
        raise ShapeError("parameter file does not match the estimator architecture")
    return params


def save_params(path, params):
    with open(path, "wb") as fh:
        fh.write(params_to_bytes(params))


def load_params(path):
    with open(path, "rb") as fh:
        return params_from_bytes(fh.read())


# -- training -----------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 300
    batch_size: int = 8
    lr: float = 5e-4
    lambda_tv: float = 2e-4
    label_smooth: bool = False
    w_n: float = 10.0
    decay_start_epoch: int = 120
    decay_constant: float = 120.0
    seed: int = 0
    input_size: int = 64
    optimizer: str = "adam"
    epsilon: float = DEFAULT_EPSILON

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be at least 1")
        if not self.lr > 0 or not self.w_n > 0 or not self.decay_constant > 0:
            raise ConfigError("lr, w_n and decay_constant must be positive")
        if self.lambda_tv < 0:
            raise ConfigError("lambda_tv must be non-negative")
        if self.decay_start_epoch > self.epochs:
            raise ConfigError(f"decay_start_epoch {self.decay_start_epoch} exceeds epochs {self.epochs}")
        if self.input_size < 4 or self.input_size % 4:
            raise ConfigError(f"input_size must be a positive multiple of 4, got {self.input_size}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        return self

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d).validate()

    def to_dict(self):
        return asdict(self)


# Published preset settings; epochs and decay points are at desk scale (the decay starts
# at 40% of training, as 800 of 2000 epochs does).
PRESETS = {
    "pwcc_v1": {"lambda_tv": 2e-4, "lr": 5e-4, "label_smooth": False, "filtering": True},
    "pwcc_v2": {"lambda_tv": 2e-3, "lr": 1e-4, "label_smooth": True, "filtering": True},
}


def preset_config(name, **overrides):
    """TrainConfig for a named preset, with optional field overrides.

    Overriding ``epochs`` alone rescales the decay schedule to keep its shape.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    p = {k: v for k, v in PRESETS[name].items() if k != "filtering"}
    if "epochs" in overrides and "decay_start_epoch" not in overrides:
        e = overrides["epochs"]
        overrides.setdefault("decay_start_epoch", max(0, round(0.4 * e)))
        overrides.setdefault("decay_constant", max(1.0, 0.4 * e))
    p.update(overrides)
    return TrainConfig.from_dict(p)


def learning_rate(cfg, epoch):
    """Inverse decay: ``lr / (1 + (epoch - start) / constant)`` from ``start`` on."""
    if epoch < cfg.decay_start_epoch:
        return cfg.lr
    return cfg.lr / (1.0 + (epoch - cfg.decay_start_epoch) / cfg.decay_constant)


class Adam:
    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in params.blocks()]
        self.v = [np.zeros_like(a) for a in params.blocks()]
        self.t = 0

    def step(self, params, grads, lr):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params.blocks(), grads.blocks(), self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= (lr / c1) * m / (np.sqrt(v / c2) + self.eps)


class SGD:
    def __init__(self, params):
        pass

    def step(self, params, grads, lr):
        for p, g in zip(params.blocks(), grads.blocks()):
            p -= lr * g


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    val_mean_angular_error: float


class TrainingData:
    """Samples of one split preloaded at the training resolution."""

    def __init__(self, manifest, split, size, epsilon=DEFAULT_EPSILON):
        entries = split_samples(manifest, split)
        if not entries:
            raise ConfigError(f"manifest has no samples in split {split!r}")
        self.ids, inputs, gt_maps, alphas, illums = [], [], [], [], []
        for e in entries:
            s = load_sample(manifest, e)
            img, gt, alpha = s["input"], s["gt_map"], s["alpha"]
            if img.shape[:2] != (size, size):
                img = resize_bilinear(img, size, size)
                gt = resize_bilinear(gt, size, size)
                alpha = resize_bilinear(alpha, size, size)
            self.ids.append(s["id"])
            inputs.append(to_log_chroma(img, epsilon))
            gt_maps.append(gt)
            alphas.append(alpha)
            illums.append((s["illum_a"], s["illum_b"]))
        self.epsilon = epsilon
        self.x = np.stack(inputs).astype(np.float32)
        self.gt_maps = np.stack(gt_maps)
        self.alphas = np.stack(alphas)
        self.illums = illums
        self.y = np.stack([to_log_chroma(g, epsilon) for g in gt_maps]).astype(np.float32)

    def __len__(self):
        return len(self.ids)

    def smoothed_targets(self, idx, w_n, seeds):
        out = []
        for i, seed in zip(idx, seeds):
            a = smooth_alpha(self.alphas[i], w_n, seed)
            la, lb = self.illums[i]
            out.append(to_log_chroma(mix_illuminants(a, la, lb), self.epsilon))
        return np.stack(out).astype(np.float32)


def mean_angular_error(params, data, epoch=None):
    """Mean over images of the per-image mean angular error (degrees)."""
    pred = predict_chroma(params, data.x)
    if not np.isfinite(pred).all():
        raise DivergenceError(epoch, "validation", "non-finite prediction")
    errs = [angular_error_map(g, from_log_chroma(p.astype(np.float64))).mean()
            for g, p in zip(data.gt_maps, pred)]
    return float(np.mean(errs))


def train(manifest, cfg, callback=None):
    """Fit the estimator on the manifest's train split.

    Returns ``(best_params, records)`` where ``best_params`` has the lowest
    validation mean angular error seen at the end of any epoch.
    """
    cfg.validate()
    train_set = TrainingData(manifest, "train", cfg.input_size, cfg.epsilon)
    val_set = TrainingData(manifest, "val", cfg.input_size, cfg.epsilon)
    params = init_params(cfg.seed)
    opt = Adam(params) if cfg.optimizer == "adam" else SGD(params)
    best, best_err, records = params.copy(), np.inf, []
    n = len(train_set)
    for epoch in range(1, cfg.epochs + 1):
        lr = learning_rate(cfg, epoch)
        order = np.random.default_rng([cfg.seed, 1, epoch]).permutation(n)
        total, count = 0.0, 0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = np.sort(order[start:start + cfg.batch_size])
            x = train_set.x[idx]
            if cfg.label_smooth:
                y = train_set.smoothed_targets(idx, cfg.w_n, [[cfg.seed, 2, epoch, b, int(i)] for i in idx])
            else:
                y = train_set.y[idx]
            pred, cache = forward(params, x)
            report, grad = combined_loss(pred, y, cfg.lambda_tv)
            if not np.isfinite(report.total):
                raise DivergenceError(epoch, b, report.total)
            grads = backward(params, cache, grad)
            opt.step(params, grads, lr)
            if not all(np.isfinite(a).all() for a in params.blocks()):
                raise DivergenceError(epoch, b, "non-finite parameters")
            total += report.total * len(idx)
            count += len(idx)
        val_err = mean_angular_error(params, val_set, epoch)
        rec = EpochRecord(epoch, lr, total / count, val_err)
        records.append(rec)
        log.debug("epoch %d lr %.3g loss %.6f val %.4f", epoch, lr, rec.train_loss, val_err)
        if callback is not None:
            callback(rec)
        if val_err < best_err:
            best, best_err = params.copy(), val_err
    return best, records


def write_training_log(path, records):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["epoch", "lr", "train_loss", "val_mean_angular_error"])
        for r in records:
            wr.writerow([r.epoch, repr(float(r.lr)), repr(float(r.train_loss)), repr(float(r.val_mean_angular_error))])
