"""Adam with decoupled-from-nothing weight decay: decay is added to the
gradient before the moment updates (the classic L2-coupled form)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .layers import LayerParams


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.learning_rate):
            raise ValueError("learning_rate must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.eps <= 0.0 or self.weight_decay < 0.0:
            raise ValueError("eps must be positive and weight_decay non-negative")


def _update(theta: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
            step: int, cfg: OptimizerConfig, where: str) -> None:
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite gradient in {where}")
    g = grad if cfg.weight_decay == 0.0 else grad + cfg.weight_decay * theta
    m *= cfg.beta1
    m += (1.0 - cfg.beta1) * g
    v *= cfg.beta2
    v += (1.0 - cfg.beta2) * np.square(g)
    mhat = m / (1.0 - cfg.beta1 ** step)
    vhat = v / (1.0 - cfg.beta2 ** step)
    theta -= cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.eps)


def adam_step(params: Iterable[LayerParams], cfg: OptimizerConfig) -> None:
    """Apply one Adam update to every layer, consuming accumulated gradients.

    A layer with no gradient (never touched by the loss) is left untouched,
    including its step count.  Non-finite gradients abort with the offending
    layer named.
    """
    for p in params:
        wg = p.weight.grad
        bg = None if p.bias is None else p.bias.grad
        if wg is None and bg is None:
            continue
        p.step += 1
        if wg is not None:
            _update(p.weight.data, wg, p.m_w, p.v_w, p.step, cfg, p.name + ".weight")
            p.weight.invalidate_cache()  # cached GEMM operands are now stale
        if bg is not None:
            _update(p.bias.data, bg, p.m_b, p.v_b, p.step, cfg, p.name + ".bias")
            p.bias.invalidate_cache()
        p.zero_grad()
