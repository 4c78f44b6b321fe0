"""Dense array kernels for the network stack.

Everything here is plain ``numpy`` on channels-last batches ``(N, H, W, C)``.
Convolutions are lowered to one BLAS GEMM per kernel tap, multiplying
contiguous row-slab views of the padded input and accumulating the nine
horizontally shifted partial products.  No im2col buffer is ever
materialized; on one core that is the difference between minutes and
hours per training run.  The public graph ops in
:mod:`flowsur.nn.functional` wrap these with the channels-first
``(C, H, W)`` convention used everywhere else in the package.

All kernels are dtype-generic: float64 in, float64 math out, which the
test-suite oracles rely on.
"""

from __future__ import annotations

import numpy as np


def _pad_hw(x: np.ndarray, value: float = 0.0) -> np.ndarray:
    n, h, w, c = x.shape
    xp = np.empty((n, h + 2, w + 2, c), dtype=x.dtype)
    xp[:, 0, :, :] = value
    xp[:, h + 1, :, :] = value
    xp[:, :, 0, :] = value
    xp[:, :, w + 1, :] = value
    xp[:, 1 : h + 1, 1 : w + 1, :] = x
    return xp


def _row_slabs(xp: np.ndarray, h: int):
    """Yield (tap row index, slab) where slab is a (N, h * (W+2), C) view.

    Slab ``ky`` spans padded rows ``ky .. ky+h``; each batch item is one
    contiguous block, so ``matmul`` feeds BLAS without copying.
    """
    n, _, wp, c = xp.shape
    rows = xp.reshape(n, -1, c)
    for ky in range(3):
        yield ky, rows[:, ky * wp : (ky + h) * wp, :]


def conv_wmat(w: np.ndarray) -> np.ndarray:
    """Rearrange a (O, C, 3, 3) kernel into the (9C, O) GEMM operand."""
    return np.ascontiguousarray(w.transpose(2, 3, 1, 0)).reshape(-1, w.shape[0])


def conv_wflip_mat(w: np.ndarray) -> np.ndarray:
    """(9O, C) operand of the input-gradient GEMM: kernel rotated 180."""
    return np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(2, 3, 0, 1)).reshape(
        -1, w.shape[1]
    )


def conv2d_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray | None, wmat: np.ndarray | None = None
) -> np.ndarray:
    """3x3 convolution, stride 1, zero padding 1.

    x: (N, H, W, C), w: (O, C, 3, 3), b: (O,) or None -> (N, H, W, O).
    ``wmat`` may carry a precomputed :func:`conv_wmat` (weights are static
    within a forward/backward pass, so callers cache it).
    """
    n, h, wdt, c = x.shape
    o = w.shape[0]
    wp = wdt + 2
    xp = _pad_hw(x)
    if wmat is None:
        wmat = conv_wmat(w)
    y = np.zeros((n, h, wdt, o), dtype=x.dtype)
    part = np.empty((n, h * wp, o), dtype=x.dtype)
    for ky, slab in _row_slabs(xp, h):
        for kx in range(3):
            tap = wmat[(3 * ky + kx) * c : (3 * ky + kx + 1) * c]
            np.matmul(slab, tap, out=part)
            y += part.reshape(n, h, wp, o)[:, :, kx : kx + wdt, :]
    if b is not None:
        y += b.astype(x.dtype)
    return y


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray, wflip_mat: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of :func:`conv2d_forward` w.r.t. input, kernel and bias."""
    n, h, wdt, c = x.shape
    o = w.shape[0]
    wp = wdt + 2
    db = dy.sum(axis=(0, 1, 2))
    if wflip_mat is None:
        wflip_mat = conv_wflip_mat(w)
    dyb = np.ascontiguousarray(dy)

    # dX: full correlation of dy with the kernel rotated 180 degrees is
    # again a stride-1 padded convolution, so it reuses the tap scheme
    dyp = _pad_hw(dyb)
    dx = np.zeros(x.shape, dtype=x.dtype)
    part = np.empty((n, h * wp, c), dtype=x.dtype)
    for ky, slab in _row_slabs(dyp, h):
        for kx in range(3):
            tap = wflip_mat[(3 * ky + kx) * o : (3 * ky + kx + 1) * o]
            np.matmul(slab, tap, out=part)
            dx += part.reshape(n, h, wp, c)[:, :, kx : kx + wdt, :]

    # dW tap (ky, kx) = slab(x, ky)^T @ dy embedded at column offset kx
    xp = _pad_hw(x)
    dwmat = np.empty((9 * c, o), dtype=x.dtype)
    dwide = np.zeros((n, h, wp, o), dtype=x.dtype)
    for kx in range(3):
        dwide[:, :, kx : kx + wdt, :] = dyb
        if kx > 0:
            dwide[:, :, kx - 1, :] = 0.0
        dflat = dwide.reshape(n, h * wp, o)
        for ky, slab in _row_slabs(xp, h):
            taps = np.matmul(slab.transpose(0, 2, 1), dflat)
            dwmat[(3 * ky + kx) * c : (3 * ky + kx + 1) * c] = taps.sum(axis=0)
    dw = dwmat.reshape(3, 3, c, o).transpose(3, 2, 0, 1).copy()
    return dx, dw, db


def _transpose_kernel(w: np.ndarray) -> np.ndarray:
    """Map a (C, O, 3, 3) transposed-conv kernel onto an equivalent conv kernel.

    Returns a strided view; the GEMM operand builders materialize it.
    """
    return w.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1]


def conv_transpose_wmat(w: np.ndarray) -> np.ndarray:
    """Forward GEMM operand for a (C, O, 3, 3) transposed-conv kernel."""
    return conv_wmat(_transpose_kernel(w))


def conv_transpose_wflip_mat(w: np.ndarray) -> np.ndarray:
    """Input-gradient GEMM operand for a transposed-conv kernel."""
    return conv_wflip_mat(_transpose_kernel(w))


def conv_transpose2d_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray | None, wmat: np.ndarray | None = None
) -> np.ndarray:
    """3x3 transposed convolution, stride 1, padding 1 (shape-preserving).

    x: (N, H, W, C), w: (C, O, 3, 3).  Identical to a plain convolution with
    the kernel axes swapped and the taps rotated 180 degrees.
    """
    if wmat is None:
        wmat = conv_transpose_wmat(w)
    return conv2d_forward(x, _transpose_kernel(w), b, wmat=wmat)


def conv_transpose2d_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray, wflip_mat: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if wflip_mat is None:
        wflip_mat = conv_transpose_wflip_mat(w)
    dx, dw_eq, db = conv2d_backward(x, _transpose_kernel(w), dy, wflip_mat=wflip_mat)
    dw = np.ascontiguousarray(dw_eq[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    return dx, dw, db


def maxpool3x3s2_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 max pooling, stride 2, padding 1 with -inf fill.

    Returns the pooled array (N, ceil(H/2), ceil(W/2), C) and an int8 argmax
    in [0, 9) per output element for the backward scatter.
    """
    n, h, w, c = x.shape
    oh = (h - 1) // 2 + 1
    ow = (w - 1) // 2 + 1
    xp = _pad_hw(x, value=-np.inf)
    y = np.array(xp[:, 0 : 2 * oh - 1 : 2, 0 : 2 * ow - 1 : 2, :])
    arg = np.zeros(y.shape, dtype=np.int8)
    # running max keeps the first tap on ties, matching argmax order
    for k in range(1, 9):
        ky, kx = divmod(k, 3)
        tap = xp[:, ky : ky + 2 * oh - 1 : 2, kx : kx + 2 * ow - 1 : 2, :]
        better = tap > y
        np.copyto(y, tap, where=better)
        arg[better] = k
    return y, arg


def maxpool3x3s2_backward(arg: np.ndarray, x_shape: tuple, dy: np.ndarray) -> np.ndarray:
    n, h, w, c = x_shape
    oh, ow = dy.shape[1], dy.shape[2]
    ky, kx = np.divmod(arg.astype(np.intp), 3)
    oy = np.arange(oh, dtype=np.intp)[None, :, None, None]
    ox = np.arange(ow, dtype=np.intp)[None, None, :, None]
    nn = np.arange(n, dtype=np.intp)[:, None, None, None]
    cc = np.arange(c, dtype=np.intp)[None, None, None, :]
    py = 2 * oy + ky
    px = 2 * ox + kx
    flat = ((nn * (h + 2) + py) * (w + 2) + px) * c + cc
    dxp = np.zeros(n * (h + 2) * (w + 2) * c, dtype=dy.dtype)
    np.add.at(dxp, flat.ravel(), dy.ravel())
    return dxp.reshape(n, h + 2, w + 2, c)[:, 1 : h + 1, 1 : w + 1, :]


_resize_cache: dict[tuple[int, int, str], np.ndarray] = {}


def resize_matrix(n_in: int, n_out: int, dtype=np.float64) -> np.ndarray:
    """Corner-aligned 1D linear interpolation matrix, (n_out, n_in).

    Output sample k sits at k * (n_in - 1) / (n_out - 1); the first and last
    samples coincide with the input corners exactly.
    """
    key = (n_in, n_out, np.dtype(dtype).str)
    hit = _resize_cache.get(key)
    if hit is not None:
        return hit
    r = np.zeros((n_out, n_in), dtype=dtype)
    if n_out == 1 or n_in == 1:
        r[:, 0] = 1.0
    else:
        pos = np.arange(n_out, dtype=np.float64) * (n_in - 1) / (n_out - 1)
        i0 = np.minimum(pos.astype(np.intp), n_in - 2)
        t = pos - i0
        r[np.arange(n_out), i0] += 1.0 - t
        r[np.arange(n_out), i0 + 1] += t
    _resize_cache[key] = r
    return r


def bilinear_resize_forward(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable corner-aligned bilinear resize of an NHWC batch."""
    rh = resize_matrix(x.shape[1], out_h, x.dtype)
    rw = resize_matrix(x.shape[2], out_w, x.dtype)
    return np.einsum("hH,wW,nHWc->nhwc", rh, rw, x, optimize=True)


def bilinear_resize_backward(dy: np.ndarray, in_h: int, in_w: int) -> np.ndarray:
    rh = resize_matrix(in_h, dy.shape[1], dy.dtype)
    rw = resize_matrix(in_w, dy.shape[2], dy.dtype)
    return np.einsum("hH,wW,nhwc->nHWc", rh, rw, dy, optimize=True)


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray | None) -> np.ndarray:
    """x: (N, F), w: (O, F), b: (O,) -> (N, O)."""
    y = x @ w.T
    if b is not None:
        y += b.astype(x.dtype)
    return y


def dense_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return dy @ w, dy.T @ x, dy.sum(axis=0)
