"""Differentiable graph operations.

All image ops here take channels-last activations ``(N, H, W, C)`` wrapped
in :class:`~flowsur.nn.tensor.Tensor`; parameters keep their canonical
layouts (conv kernels ``(O, C, 3, 3)``, transposed-conv kernels
``(C, O, 3, 3)``, dense weights ``(O, F)``).  Each op records a closure
computing parent gradients from the incoming gradient.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import Tensor


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    # GEMM operand rearrangements are cached on the weight tensor; the
    # optimizer invalidates after each step
    wmat = w.cached("conv_wmat", kernels.conv_wmat)
    y = kernels.conv2d_forward(x.data, w.data, None if b is None else b.data, wmat=wmat)
    parents = (x, w) if b is None else (x, w, b)

    def bwd(dy):
        wflip = w.cached("conv_wflip", kernels.conv_wflip_mat)
        dx, dw, db = kernels.conv2d_backward(x.data, w.data, dy, wflip_mat=wflip)
        return (dx, dw) if b is None else (dx, dw, db)

    return Tensor(y, parents=parents, backward=bwd, name="conv2d")


def conv_transpose2d(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    wmat = w.cached("convt_wmat", kernels.conv_transpose_wmat)
    y = kernels.conv_transpose2d_forward(
        x.data, w.data, None if b is None else b.data, wmat=wmat
    )
    parents = (x, w) if b is None else (x, w, b)

    def bwd(dy):
        wflip = w.cached("convt_wflip", kernels.conv_transpose_wflip_mat)
        dx, dw, db = kernels.conv_transpose2d_backward(x.data, w.data, dy, wflip_mat=wflip)
        return (dx, dw) if b is None else (dx, dw, db)

    return Tensor(y, parents=parents, backward=bwd, name="conv_t2d")


def dense(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    y = kernels.dense_forward(x.data, w.data, None if b is None else b.data)
    parents = (x, w) if b is None else (x, w, b)

    def bwd(dy):
        dx, dw, db = kernels.dense_backward(x.data, w.data, dy)
        return (dx, dw) if b is None else (dx, dw, db)

    return Tensor(y, parents=parents, backward=bwd, name="dense")


def maxpool3x3s2(x: Tensor) -> Tensor:
    y, arg = kernels.maxpool3x3s2_forward(x.data)
    shape = x.data.shape

    def bwd(dy):
        return (kernels.maxpool3x3s2_backward(arg, shape, dy),)

    return Tensor(y, parents=(x,), backward=bwd, name="maxpool")


def bilinear_resize(x: Tensor, out_h: int, out_w: int) -> Tensor:
    y = kernels.bilinear_resize_forward(x.data, out_h, out_w)
    in_h, in_w = x.data.shape[1], x.data.shape[2]

    def bwd(dy):
        return (kernels.bilinear_resize_backward(dy, in_h, in_w),)

    return Tensor(y, parents=(x,), backward=bwd, name="resize")


def relu(x: Tensor) -> Tensor:
    y = np.maximum(x.data, 0)

    def bwd(dy):
        return (np.where(x.data > 0, dy, 0),)

    return Tensor(y, parents=(x,), backward=bwd, name="relu")


def sigmoid(x: Tensor) -> Tensor:
    xd = x.data
    y = np.empty_like(xd)
    pos = xd >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-xd[pos]))
    ex = np.exp(xd[~pos])
    y[~pos] = ex / (1.0 + ex)

    def bwd(dy):
        return (dy * y * (1.0 - y),)

    return Tensor(y, parents=(x,), backward=bwd, name="sigmoid")


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ValueError(f"add shape mismatch {a.shape} vs {b.shape}")

    def bwd(dy):
        return dy, dy

    return Tensor(a.data + b.data, parents=(a, b), backward=bwd, name="add")


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    ca = a.data.shape[-1]

    def bwd(dy):
        return dy[..., :ca], dy[..., ca:]

    return Tensor(np.concatenate([a.data, b.data], axis=-1), parents=(a, b), backward=bwd, name="concat")


def to_feature_vector(x: Tensor) -> Tensor:
    """(N, H, W, C) -> (N, C*H*W) with channel-major element order."""
    n, h, w, c = x.data.shape
    y = np.ascontiguousarray(x.data.transpose(0, 3, 1, 2)).reshape(n, c * h * w)

    def bwd(dy):
        return (np.ascontiguousarray(dy.reshape(n, c, h, w).transpose(0, 2, 3, 1)),)

    return Tensor(y, parents=(x,), backward=bwd, name="flatten")


def from_feature_vector(x: Tensor, h: int, w: int, c: int) -> Tensor:
    """(N, C*H*W) channel-major -> (N, H, W, C)."""
    n = x.data.shape[0]
    y = np.ascontiguousarray(x.data.reshape(n, c, h, w).transpose(0, 2, 3, 1))

    def bwd(dy):
        return (np.ascontiguousarray(dy.transpose(0, 3, 1, 2)).reshape(n, c * h * w),)

    return Tensor(y, parents=(x,), backward=bwd, name="unflatten")


def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    t = np.asarray(target, dtype=pred.data.dtype)
    if pred.data.shape != t.shape:
        raise ValueError(f"mse shape mismatch {pred.data.shape} vs {t.shape}")
    d = pred.data - t
    val = np.array(np.mean(d * d), dtype=pred.data.dtype)
    scale = 2.0 / d.size

    def bwd(dy):
        return (dy * scale * d,)

    return Tensor(val, parents=(pred,), backward=bwd, name="mse")
