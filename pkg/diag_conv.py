"""Benchmark candidate single-GEMM conv kernels against the shipped ones."""
import time

import numpy as np

from flowsur.nn import kernels as K


def col_build(xp, n, h, w, c):
    col5 = np.empty((n, h, w, 9, c), dtype=xp.dtype)
    for t in range(9):
        ky, kx = divmod(t, 3)
        col5[:, :, :, t, :] = xp[:, ky : ky + h, kx : kx + w, :]
    return col5.reshape(n * h * w, 9 * c)


def conv2d_forward_col(x, w, b, wmat=None):
    n, h, wdt, c = x.shape
    if wmat is None:
        wmat = K.conv_wmat(w)
    col = col_build(K._pad_hw(x), n, h, wdt, c)
    y = (col @ wmat).reshape(n, h, wdt, w.shape[0])
    if b is not None:
        y += b.astype(x.dtype)
    return y


def conv2d_backward_col(x, w, dy, wmat=None):
    n, h, wdt, c = x.shape
    o = w.shape[0]
    if wmat is None:
        wmat = K.conv_wmat(w)
    dyflat = np.ascontiguousarray(dy).reshape(n * h * wdt, o)
    col = col_build(K._pad_hw(x), n, h, wdt, c)
    dwmat = col.T @ dyflat
    dw = dwmat.reshape(3, 3, c, o).transpose(3, 2, 0, 1).copy()
    dcol5 = (dyflat @ wmat.T).reshape(n, h, wdt, 9, c)
    dxp = np.zeros((n, h + 2, wdt + 2, c), dtype=x.dtype)
    for t in range(9):
        ky, kx = divmod(t, 3)
        dxp[:, ky : ky + h, kx : kx + wdt, :] += dcol5[:, :, :, t, :]
    return dxp[:, 1 : h + 1, 1 : wdt + 1, :], dw, dy.sum(axis=(0, 1, 2))


def bench(fn, *args, reps=3):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


rng = np.random.default_rng(0)

# exactness, f64
x = rng.standard_normal((2, 9, 11, 5))
w = rng.standard_normal((4, 5, 3, 3))
b = rng.standard_normal(4)
dy = rng.standard_normal((2, 9, 11, 4))
y0 = K.conv2d_forward(x, w, b)
y1 = conv2d_forward_col(x, w, b)
print("fwd f64 max diff", np.abs(y0 - y1).max())
g0 = K.conv2d_backward(x, w, dy)
g1 = conv2d_backward_col(x, w, dy)
for name, a, bb in zip(("dx", "dw", "db"), g0, g1):
    print(f"bwd f64 {name} max diff", np.abs(a - bb).max())

shapes = [
    (35, 100, 150, 2, 16),
    (35, 100, 150, 16, 16),
    (35, 100, 150, 16, 1),
    (35, 50, 75, 16, 32),
    (35, 25, 38, 32, 64),
    (35, 13, 19, 64, 64),
    (35, 7, 10, 64, 64),
]
tot_old = tot_new = 0.0
for n, h, wd, c, o in shapes:
    x = rng.standard_normal((n, h, wd, c)).astype(np.float32)
    w = (rng.standard_normal((o, c, 3, 3)) * 0.1).astype(np.float32)
    b = rng.standard_normal(o).astype(np.float32)
    dy = rng.standard_normal((n, h, wd, o)).astype(np.float32)
    wmat = K.conv_wmat(w)
    wflip = K.conv_wflip_mat(w)
    rel = np.abs(K.conv2d_forward(x, w, b) - conv2d_forward_col(x, w, b)).max()
    f_old = bench(K.conv2d_forward, x, w, b, wmat)
    f_new = bench(conv2d_forward_col, x, w, b, wmat)
    b_old = bench(lambda: K.conv2d_backward(x, w, dy, wflip))
    b_new = bench(lambda: conv2d_backward_col(x, w, dy, wmat))
    tot_old += f_old + b_old
    tot_new += f_new + b_new
    print(
        f"({n},{h},{wd},{c})->{o}: fwd {f_old*1e3:7.1f} -> {f_new*1e3:7.1f} ms  "
        f"bwd {b_old*1e3:7.1f} -> {b_new*1e3:7.1f} ms  fdiff {rel:.2e}"
    )
print(f"totals: {tot_old*1e3:.0f} ms -> {tot_new*1e3:.0f} ms ({tot_old/tot_new:.2f}x)")
