"""Array-level network operations in the channels-first convention.

These are the reference entry points for the individual operations: plain
``numpy`` in, plain ``numpy`` out, input layout ``(C, H, W)`` or
``(N, C, H, W)``.  The training stack itself runs on the channels-last
graph ops in :mod:`flowsur.nn.ops`; both share the kernels in
:mod:`flowsur.nn.kernels`.
"""

from __future__ import annotations

import numpy as np

from . import kernels


def _to_nhwc(x: np.ndarray) -> tuple[np.ndarray, bool]:
    if x.ndim == 3:
        return x.transpose(1, 2, 0)[None], True
    if x.ndim == 4:
        return x.transpose(0, 2, 3, 1), False
    raise ValueError(f"expected (C,H,W) or (N,C,H,W), got shape {x.shape}")


def _from_nhwc(y: np.ndarray, squeeze: bool) -> np.ndarray:
    y = y.transpose(0, 3, 1, 2)
    return y[0] if squeeze else y


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """3x3 conv, stride 1, pad 1. x (C,H,W) with kernel (O,C,3,3) -> (O,H,W)."""
    xh, sq = _to_nhwc(x)
    return _from_nhwc(kernels.conv2d_forward(xh, w, b), sq)


def conv_transpose2d(x: np.ndarray, w: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """3x3 transposed conv, stride 1, pad 1. x (C,H,W) with kernel (C,O,3,3) -> (O,H,W)."""
    xh, sq = _to_nhwc(x)
    return _from_nhwc(kernels.conv_transpose2d_forward(xh, w, b), sq)


def maxpool3x3s2(x: np.ndarray) -> np.ndarray:
    """3x3 max pool, stride 2, pad 1 (-inf fill): (C,H,W) -> (C,ceil(H/2),ceil(W/2))."""
    xh, sq = _to_nhwc(x)
    y, _ = kernels.maxpool3x3s2_forward(xh)
    return _from_nhwc(y, sq)


def bilinear_resize(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resize: (C,H,W) -> (C,out_h,out_w)."""
    xh, sq = _to_nhwc(x)
    return _from_nhwc(kernels.bilinear_resize_forward(xh, out_h, out_w), sq)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.result_type(x.dtype, np.float32))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    d = pred - target
    return float(np.mean(d * d))
