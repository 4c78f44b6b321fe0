"""Gradient checks: every graph op against central finite differences."""

import numpy as np
import pytest

from flowsur.nn import Tensor
from flowsur.nn import ops

from conftest import numeric_grad, rel_err

TOL = 1e-4


def check_op(build, args: dict, wrt: str, eps: float = 1e-6) -> None:
    """Gradcheck d(sum of squares of output)/d(args[wrt]) for op builder `build`."""

    def scalar(arrs: dict) -> float:
        t = {k: Tensor(v.astype(np.float64), requires_grad=True) for k, v in arrs.items()}
        out = build(t)
        return float(np.sum(out.data * out.data))

    tensors = {k: Tensor(v.astype(np.float64), requires_grad=True) for k, v in args.items()}
    out = build(tensors)
    loss = ops.mse(out, np.zeros(out.data.shape))
    loss.backward()
    scale = out.data.size / 2.0  # mse = sum(sq)/size; rescale to match `scalar`
    analytic = tensors[wrt].grad * 2.0 * scale

    def f(x):
        a = dict(args)
        a[wrt] = x
        return scalar(a)

    numeric = numeric_grad(f, args[wrt], eps=eps)
    assert rel_err(analytic, numeric) < TOL


class TestConvGrads:
    def test_conv2d_input(self, rng):
        args = {
            "x": rng.standard_normal((2, 4, 5, 3)),
            "w": rng.standard_normal((4, 3, 3, 3)),
            "b": rng.standard_normal(4),
        }
        build = lambda t: ops.conv2d(t["x"], t["w"], t["b"])
        check_op(build, args, "x")

    def test_conv2d_weight_and_bias(self, rng):
        args = {
            "x": rng.standard_normal((1, 5, 4, 2)),
            "w": rng.standard_normal((3, 2, 3, 3)),
            "b": rng.standard_normal(3),
        }
        build = lambda t: ops.conv2d(t["x"], t["w"], t["b"])
        check_op(build, args, "w")
        check_op(build, args, "b")

    def test_conv_transpose2d_all(self, rng):
        args = {
            "x": rng.standard_normal((2, 4, 4, 3)),
            "w": rng.standard_normal((3, 2, 3, 3)),
            "b": rng.standard_normal(2),
        }
        build = lambda t: ops.conv_transpose2d(t["x"], t["w"], t["b"])
        for wrt in ("x", "w", "b"):
            check_op(build, args, wrt)


class TestShapeOpGrads:
    def test_maxpool(self, rng):
        # nudge values apart so finite differences never cross an argmax tie
        x = rng.standard_normal((1, 6, 7, 2))
        x += 0.05 * np.arange(x.size).reshape(x.shape)
        check_op(lambda t: ops.maxpool3x3s2(t["x"]), {"x": x}, "x", eps=1e-7)

    def test_bilinear_resize_up_and_down(self, rng):
        x = rng.standard_normal((2, 4, 5, 2))
        check_op(lambda t: ops.bilinear_resize(t["x"], 9, 11), {"x": x}, "x")
        check_op(lambda t: ops.bilinear_resize(t["x"], 2, 3), {"x": x}, "x")

    def test_concat_and_flatten(self, rng):
        args = {"a": rng.standard_normal((2, 3, 4, 2)), "b": rng.standard_normal((2, 3, 4, 5))}
        build = lambda t: ops.to_feature_vector(ops.concat_channels(t["a"], t["b"]))
        check_op(build, args, "a")
        check_op(build, args, "b")

    def test_unflatten_inverts_flatten(self, rng):
        x = Tensor(rng.standard_normal((3, 2, 5, 4)), requires_grad=True)
        v = ops.to_feature_vector(x)
        back = ops.from_feature_vector(v, 2, 5, 4)
        assert np.array_equal(back.data, x.data)
        # channel-major ordering: vector index c*(H*W) + i*W + j
        assert v.data[1, 3 * 10 + 1 * 5 + 4] == x.data[1, 1, 4, 3]


class TestPointwiseGrads:
    def test_relu(self, rng):
        x = rng.standard_normal((3, 4))
        x[np.abs(x) < 0.05] += 0.1  # keep away from the kink
        check_op(lambda t: ops.relu(t["x"]), {"x": x}, "x")

    def test_sigmoid(self, rng):
        check_op(lambda t: ops.sigmoid(t["x"]), {"x": rng.standard_normal((3, 4))}, "x")

    def test_dense(self, rng):
        args = {
            "x": rng.standard_normal((4, 6)),
            "w": rng.standard_normal((3, 6)),
            "b": rng.standard_normal(3),
        }
        build = lambda t: ops.dense(t["x"], t["w"], t["b"])
        for wrt in ("x", "w", "b"):
            check_op(build, args, wrt)

    def test_add_and_reuse_accumulates(self, rng):
        x = rng.standard_normal((3, 3))
        xt = Tensor(x, requires_grad=True)
        # y = x + x reuses the same tensor; grad must accumulate to 2
        loss = ops.mse(ops.add(xt, xt), np.zeros((3, 3)))
        loss.backward()
        expect = 2.0 * 2.0 * (2.0 * x) / x.size
        assert rel_err(xt.grad, expect) < 1e-12


class TestCompositeGrads:
    def test_small_encoder_decoder_chain(self, rng):
        """conv -> relu -> pool -> resize -> conv_t -> sigmoid -> mse, all grads."""
        args = {
            "x": rng.standard_normal((2, 6, 8, 1)),
            "w1": rng.standard_normal((3, 1, 3, 3)) * 0.5,
            "b1": rng.standard_normal(3) * 0.1,
            "w2": rng.standard_normal((3, 1, 3, 3)) * 0.5,
            "b2": rng.standard_normal(1) * 0.1,
        }
        target = rng.random((2, 6, 8, 1))

        def forward(t):
            h = ops.relu(ops.conv2d(t["x"], t["w1"], t["b1"]))
            h = ops.maxpool3x3s2(h)
            h = ops.bilinear_resize(h, 6, 8)
            h = ops.conv_transpose2d(h, t["w2"], t["b2"])
            return ops.sigmoid(h)

        tensors = {k: Tensor(v.astype(np.float64), requires_grad=True) for k, v in args.items()}
        loss = ops.mse(forward(tensors), target)
        loss.backward()

        for wrt in args:
            def f(x, wrt=wrt):
                a = {k: Tensor(v.astype(np.float64)) for k, v in args.items()}
                a[wrt] = Tensor(x)
                d = forward(a).data - target
                return float(np.mean(d * d))

            numeric = numeric_grad(f, args[wrt])
            assert rel_err(tensors[wrt].grad, numeric) < TOL, f"gradient mismatch for {wrt}"


class TestEngineContract:
    def test_backward_needs_scalar_without_seed(self, rng):
        x = Tensor(rng.standard_normal((2, 2)), requires_grad=True)
        y = ops.relu(x)
        with pytest.raises(ValueError):
            y.backward()

    def test_backward_rejected_on_detached(self, rng):
        x = Tensor(rng.standard_normal((2, 2)))
        with pytest.raises(ValueError):
            ops.relu(x).backward()
        with pytest.raises(ValueError):
            x.detach().backward()

    def test_grads_are_deterministic(self, rng):
        x = rng.standard_normal((2, 5, 5, 2))
        w = rng.standard_normal((2, 2, 3, 3))
        grads = []
        for run in range(2):
            xt = Tensor(x.copy(), requires_grad=True)
            wt = Tensor(w.copy(), requires_grad=True)
            h = ops.conv2d(xt, wt)
            loss = ops.mse(ops.add(ops.relu(h), ops.sigmoid(h)), np.zeros(h.data.shape))
            loss.backward()
            grads.append((xt.grad.copy(), wt.grad.copy()))
        assert np.array_equal(grads[0][0], grads[1][0])
        assert np.array_equal(grads[0][1], grads[1][1])

    def test_interior_grads_freed_leaves_kept(self, rng):
        x = Tensor(rng.standard_normal((2, 3)), requires_grad=True)
        h = ops.relu(x)
        loss = ops.mse(h, np.zeros((2, 3)))
        loss.backward()
        assert x.grad is not None
        assert h.grad is None
