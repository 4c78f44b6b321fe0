"""Parameter containers and the layer building blocks used by the models.

Layers are thin: they own a :class:`LayerParams` and build graph nodes via
:mod:`flowsur.nn.ops` when called.  Initialization is seeded He-style
(fan-in scaled), so a fixed seed gives bit-identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .tensor import Tensor


@dataclass
class LayerParams:
    """One named weight/bias pair plus its Adam state.

    Gradient accumulators live on the tensors themselves (``weight.grad``,
    ``bias.grad``).  Moment buffers always match the parameter shapes and
    ``step`` counts completed optimizer updates for this layer.
    """

    name: str
    weight: Tensor
    bias: Tensor | None
    m_w: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    v_w: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    m_b: np.ndarray | None = field(repr=False, default=None)
    v_b: np.ndarray | None = field(repr=False, default=None)
    step: int = 0

    def __post_init__(self):
        if self.m_w is None:
            self.m_w = np.zeros_like(self.weight.data)
            self.v_w = np.zeros_like(self.weight.data)
        if self.bias is not None and self.m_b is None:
            self.m_b = np.zeros_like(self.bias.data)
            self.v_b = np.zeros_like(self.bias.data)
        if self.m_w.shape != self.weight.data.shape or self.v_w.shape != self.weight.data.shape:
            raise ValueError(f"{self.name}: moment shape mismatch with weight")
        if self.bias is not None and (
            self.m_b.shape != self.bias.data.shape or self.v_b.shape != self.bias.data.shape
        ):
            raise ValueError(f"{self.name}: moment shape mismatch with bias")
        if self.step < 0:
            raise ValueError(f"{self.name}: negative step count")

    def zero_grad(self) -> None:
        self.weight.zero_grad()
        if self.bias is not None:
            self.bias.zero_grad()

    def n_params(self) -> int:
        n = self.weight.data.size
        if self.bias is not None:
            n += self.bias.data.size
        return n


def _he_weight(
    rng: np.random.Generator, shape: tuple, fan_in: int, dtype, scale: float = 1.0
) -> np.ndarray:
    std = scale * np.sqrt(2.0 / fan_in)
    return (rng.standard_normal(shape) * std).astype(dtype)


def make_conv_params(
    name: str,
    c_in: int,
    c_out: int,
    rng: np.random.Generator,
    dtype=np.float32,
    weight_scale: float = 1.0,
) -> LayerParams:
    w = _he_weight(rng, (c_out, c_in, 3, 3), fan_in=9 * c_in, dtype=dtype, scale=weight_scale)
    b = np.zeros(c_out, dtype=dtype)
    return LayerParams(name, Tensor(w, requires_grad=True, name=name + ".w"),
                       Tensor(b, requires_grad=True, name=name + ".b"))


def make_conv_transpose_params(
    name: str, c_in: int, c_out: int, rng: np.random.Generator, dtype=np.float32
) -> LayerParams:
    w = _he_weight(rng, (c_in, c_out, 3, 3), fan_in=9 * c_in, dtype=dtype)
    b = np.zeros(c_out, dtype=dtype)
    return LayerParams(name, Tensor(w, requires_grad=True, name=name + ".w"),
                       Tensor(b, requires_grad=True, name=name + ".b"))


def make_dense_params(
    name: str, f_in: int, f_out: int, rng: np.random.Generator, dtype=np.float32
) -> LayerParams:
    w = _he_weight(rng, (f_out, f_in), fan_in=f_in, dtype=dtype)
    b = np.zeros(f_out, dtype=dtype)
    return LayerParams(name, Tensor(w, requires_grad=True, name=name + ".w"),
                       Tensor(b, requires_grad=True, name=name + ".b"))


class Conv:
    def __init__(
        self,
        name: str,
        c_in: int,
        c_out: int,
        rng: np.random.Generator,
        dtype=np.float32,
        weight_scale: float = 1.0,
    ):
        self.params = make_conv_params(name, c_in, c_out, rng, dtype, weight_scale)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.params.weight, self.params.bias)


class ConvTranspose:
    def __init__(self, name: str, c_in: int, c_out: int, rng: np.random.Generator, dtype=np.float32):
        self.params = make_conv_transpose_params(name, c_in, c_out, rng, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv_transpose2d(x, self.params.weight, self.params.bias)


class Dense:
    def __init__(self, name: str, f_in: int, f_out: int, rng: np.random.Generator, dtype=np.float32):
        self.params = make_dense_params(name, f_in, f_out, rng, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.dense(x, self.params.weight, self.params.bias)


class ResidualBlock:
    """Identity-skip block: two conv/relu/conv pairs, then add and relu.

    Channel count is preserved so the skip needs no projection.  The
    closing convolution starts at zero, making a fresh block the identity;
    without that, stacking several blocks multiplies activation variance
    until a downstream sigmoid saturates and its gradient dies.
    """

    def __init__(self, name: str, channels: int, rng: np.random.Generator, dtype=np.float32):
        self.convs = [
            Conv(f"{name}.c{i}", channels, channels, rng, dtype,
                 weight_scale=0.0 if i == 3 else 1.0)
            for i in range(4)
        ]

    def __call__(self, x: Tensor) -> Tensor:
        h = self.convs[1](ops.relu(self.convs[0](x)))
        h = self.convs[3](ops.relu(self.convs[2](h)))
        return ops.relu(ops.add(h, x))

    def layer_params(self) -> list[LayerParams]:
        return [c.params for c in self.convs]


def collect_params(*parts) -> list[LayerParams]:
    """Flatten layers / blocks / LayerParams / iterables into a parameter list."""
    out: list[LayerParams] = []
    for p in parts:
        if isinstance(p, LayerParams):
            out.append(p)
        elif isinstance(p, ResidualBlock):
            out.extend(p.layer_params())
        elif isinstance(p, (Conv, ConvTranspose, Dense)):
            out.append(p.params)
        elif isinstance(p, (list, tuple)):
            out.extend(collect_params(*p))
        else:
            raise TypeError(f"cannot collect parameters from {type(p)!r}")
    return out
