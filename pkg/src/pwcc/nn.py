"""Minimal NHWC layer primitives with explicit backward passes.

3x3 convolutions use one of two equivalent formulations, chosen by shape:

* ``im2col``: gather the 9 shifted input windows, one matmul (narrow input),
* ``shift-sum``: one matmul against all 9 taps, then add the shifted partial
  outputs (stride 1 with more input than output channels).

Both keep the arithmetic inside BLAS; they differ only in which side of the
convolution gets expanded nine-fold.
"""

import numpy as np

_TAPS = tuple((dy, dx) for dy in range(3) for dx in range(3))


def _im2col3(x, stride):
    n, h, w, c = x.shape
    ho, wo = (h - 1) // stride + 1, (w - 1) // stride + 1
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    ey, ex = stride * (ho - 1) + 1, stride * (wo - 1) + 1
    cols = np.concatenate([xp[:, dy:dy + ey:stride, dx:dx + ex:stride, :] for dy, dx in _TAPS], axis=-1)
    return cols, (ho, wo)


def _span(d, n):
    # destination / source index ranges for a tap offset d - 1 in {-1, 0, 1}
    off = d - 1
    return slice(max(0, -off), n - max(0, off)), slice(max(0, off), n + min(0, off))


def _shift_sum(y, h, w):
    """``out[p] = sum_k y[k, p + offset_k]`` for ``y`` of shape (9, N, H, W, C)."""
    out = y[4].copy()
    for k, (dy, dx) in enumerate(_TAPS):
        if k == 4:
            continue
        oy, sy = _span(dy, h)
        ox, sx = _span(dx, w)
        out[:, oy, ox, :] += y[k, :, sy, sx, :]
    return out


def _use_shift_sum(k, cin, cout, stride):
    return k == 3 and stride == 1 and cin > cout


def conv_forward(x, weight, bias, stride=1):
    """Same-padded convolution. ``weight`` is ``(k, k, Cin, Cout)`` with k in {1, 3}.

    Returns the output and the cache consumed by :func:`conv_backward`.
    """
    k, _, cin, cout = weight.shape
    n, h, w, _ = x.shape
    if _use_shift_sum(k, cin, cout, stride):
        y = np.matmul(x.reshape(-1, cin), weight.reshape(9, cin, cout)).reshape(9, n, h, w, cout)
        return _shift_sum(y, h, w) + bias, (x, None, stride)
    if k == 1:
        cols = x[:, ::stride, ::stride, :]
        ho, wo = cols.shape[1:3]
    else:
        cols, (ho, wo) = _im2col3(x, stride)
    out = cols.reshape(-1, k * k * cin) @ weight.reshape(k * k * cin, cout) + bias
    return out.reshape(n, ho, wo, cout), (x, cols, stride)


def conv_backward(dout, weight, cache, need_dx=True):
    """Gradients ``(dx, dweight, dbias)`` of a :func:`conv_forward` call.

    ``dx`` is None when ``need_dx`` is false.
    """
    x, cols, stride = cache
    k, _, cin, cout = weight.shape
    n, h, w, _ = x.shape
    ho, wo = dout.shape[1:3]
    d2 = dout.reshape(-1, cout)
    db = d2.sum(axis=0)

    if k == 3 and stride == 1:
        # dout windows serve both gradients: tap (dy, dx) of the flipped kernel
        dcols, _ = _im2col3(dout, 1)
        dcols = dcols.reshape(-1, 9 * cout)
        if cols is None:
            dw_flip = (x.reshape(-1, cin).T @ dcols).reshape(cin, 3, 3, cout)
            dw = dw_flip[:, ::-1, ::-1, :].transpose(1, 2, 0, 3)
        else:
            dw = (cols.reshape(-1, 9 * cin).T @ d2).reshape(weight.shape)
        dx = None
        if need_dx:
            flipped = weight[::-1, ::-1].transpose(0, 1, 3, 2).reshape(9 * cout, cin)
            dx = (dcols @ flipped).reshape(x.shape)
        return dx, np.ascontiguousarray(dw), db

    dw = (cols.reshape(-1, k * k * cin).T @ d2).reshape(weight.shape)
    if not need_dx:
        return None, dw, db
    dcols = d2 @ weight.reshape(k * k * cin, cout).T
    if k == 1:
        if stride == 1:
            return dcols.reshape(x.shape), dw, db
        dx = np.zeros(x.shape, dtype=dout.dtype)
        dx[:, ::stride, ::stride, :] = dcols.reshape(n, ho, wo, cin)
        return dx, dw, db
    dcols = dcols.reshape(n, ho, wo, 9, cin)
    dxp = np.zeros((n, h + 2, w + 2, cin), dtype=dout.dtype)
    ey, ex = stride * (ho - 1) + 1, stride * (wo - 1) + 1
    for i, (dy, dxo) in enumerate(_TAPS):
        dxp[:, dy:dy + ey:stride, dxo:dxo + ex:stride, :] += dcols[..., i, :]
    return dxp[:, 1:-1, 1:-1, :], dw, db


def relu_forward(x):
    return np.maximum(x, 0)


def relu_backward(dout, out):
    return dout * (out > 0)


def upsample2(x):
    """Nearest-neighbour 2x upsampling."""
    return x.repeat(2, axis=1).repeat(2, axis=2)


def upsample2_backward(dout):
    n, h, w, c = dout.shape
    return dout.reshape(n, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4))
