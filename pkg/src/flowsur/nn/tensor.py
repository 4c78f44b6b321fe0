"""Reverse-mode automatic differentiation over numpy arrays.

A :class:`Tensor` records the operation that produced it as a closure over
its parent tensors.  ``backward()`` walks the graph once in reverse
topological order and accumulates gradients into ``.grad``.  The walk is
iterative and visits parents in recorded order, so gradient accumulation
order is identical from run to run: with fixed seeds, training is
bit-reproducible.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class Tensor:
    """An array node in the computation graph.

    ``data`` is any-shape numpy array.  Leaf tensors (parameters, inputs)
    have no parents.  Non-leaf tensors carry a backward closure mapping the
    incoming gradient to one gradient per parent (``None`` for parents that
    do not require grad).
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name", "_op_cache")

    def __init__(
        self,
        data: np.ndarray,
        requires_grad: bool = False,
        parents: Sequence["Tensor"] = (),
        backward: Callable[[np.ndarray], tuple] | None = None,
        name: str = "",
    ):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad) or any(p.requires_grad for p in parents)
        self._parents = tuple(parents)
        self._backward = backward
        self.name = name
        self._op_cache: dict | None = None

    def cached(self, key: str, builder: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Memoize a derived array (e.g. a GEMM operand rearrangement).

        Valid until :meth:`invalidate_cache`; every in-place mutation of
        ``data`` (optimizer steps, parameter loads) must invalidate.
        """
        if self._op_cache is None:
            self._op_cache = {}
        hit = self._op_cache.get(key)
        if hit is None:
            hit = self._op_cache[key] = builder(self.data)
        return hit

    def invalidate_cache(self) -> None:
        self._op_cache = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Propagate gradients from this tensor to every reachable leaf.

        Without an explicit seed gradient the tensor must be scalar-sized;
        calling this on a detached tensor or an input that was never part of
        a recorded computation is rejected rather than silently producing
        zeros.
        """
        if not self.requires_grad:
            raise ValueError("backward() on a tensor that is not connected to any parameter")
        if grad is None:
            if self.data.size != 1:
                raise ValueError(
                    f"backward() without a seed gradient needs a scalar, got shape {self.shape}"
                )
            grad = np.ones_like(self.data)
        grad = np.asarray(grad, dtype=self.data.dtype)
        if grad.shape != self.data.shape:
            raise ValueError(f"seed gradient shape {grad.shape} != tensor shape {self.shape}")

        order: list[Tensor] = []
        seen: dict[int, None] = {}  # id -> marker; insertion-ordered for determinism
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen[id(node)] = None
            stack.append((node, True))
            for p in reversed(node._parents):
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))

        self.grad = grad
        for node in reversed(order):
            if node._backward is None or node.grad is None:
                continue
            pgrads = node._backward(node.grad)
            for parent, pg in zip(node._parents, pgrads):
                if pg is None or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = pg
                else:
                    parent.grad = parent.grad + pg
            if node is not self:
                node.grad = None  # free interior gradients as soon as they are consumed

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, grad={self.requires_grad}{tag})"
