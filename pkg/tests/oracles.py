"""Independent reference implementations used as test oracles.

These are written for clarity, not speed: plain loops over the textbook
definitions, sharing no code with the package under test.
"""

import math

import numpy as np


def central_difference(f, x, idx, step):
    """Central finite difference of scalar ``f`` w.r.t. ``x[idx]`` (x modified in place, then restored)."""
    old = x[idx]
    x[idx] = old + step
    fp = f()
    x[idx] = old - step
    fm = f()
    x[idx] = old
    return (fp - fm) / (2 * step)


def relative_error(analytic, numeric, floor=1e-7):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def naive_bilateral(img, sigma_s, sigma_r, diameter, joint=True):
    """Per-pixel evaluation of the normalised bilateral sum over the clipped disc window."""
    h, w, c = img.shape
    r = diameter // 2
    yy, xx = np.mgrid[0:h, 0:w]
    out = np.zeros_like(img, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            d2 = (yy - y) ** 2 + (xx - x) ** 2
            inside = (np.abs(yy - y) <= r) & (np.abs(xx - x) <= r) & (d2 <= r * r)
            q = img[inside]
            gs = np.exp(-d2[inside] / (2 * sigma_s ** 2))[:, None]
            if joint:
                gr = np.exp(-np.sum((q - img[y, x]) ** 2, axis=1) / (2 * sigma_r ** 2))[:, None]
            else:
                gr = np.exp(-((q - img[y, x]) ** 2) / (2 * sigma_r ** 2))
            wgt = gs * gr
            out[y, x] = (wgt * q).sum(axis=0) / wgt.sum(axis=0)
    return out


def naive_gaussian_blur(img, sigma_s, diameter):
    """Spatial-only normalised Gaussian average over the same disc window."""
    h, w, c = img.shape
    r = diameter // 2
    out = np.zeros_like(img, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc, tot = np.zeros(c), 0.0
            for qy in range(max(0, y - r), min(h, y + r + 1)):
                for qx in range(max(0, x - r), min(w, x + r + 1)):
                    d2 = (qy - y) ** 2 + (qx - x) ** 2
                    if d2 <= r * r:
                        g = math.exp(-d2 / (2 * sigma_s ** 2))
                        acc += g * img[qy, qx]
                        tot += g
            out[y, x] = acc / tot
    return out


def naive_summary(errors):
    """Mean, median, worst and best quarter by explicit sorting."""
    vals = sorted(e for _, e in errors)
    n = len(vals)
    k = -(-n // 4)
    if n % 2:
        med = vals[n // 2]
    else:
        med = (vals[n // 2 - 1] + vals[n // 2]) / 2
    return {
        "mean": math.fsum(vals) / n,
        "median": med,
        "worst25": math.fsum(vals[n - k:]) / k,
        "best25": math.fsum(vals[:k]) / k,
    }


def naive_angle(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    return math.degrees(math.acos(max(-1.0, min(1.0, dot / (na * nb)))))
