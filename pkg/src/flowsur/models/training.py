"""Shared full-batch training loop with checkpoint support.

All three networks train the same way: rebuild the graph each epoch on the
whole training set, backpropagate one scalar loss, apply one Adam step.
The loop aborts on a non-finite loss (naming the epoch) and can stop early
once the loss drops below a threshold.
"""

from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np

from ..nn import LayerParams, OptimizerConfig, adam_step
from ..nn.container import read_container, write_container


def run_full_batch(
    forward_loss,
    params: list[LayerParams],
    config: OptimizerConfig,
    epochs: int,
    early_stop_loss: float | None = None,
    start_epoch: int = 0,
    log_every: int = 0,
    log=print,
    on_epoch=None,
) -> list[float]:
    """Train until ``epochs`` or until the loss drops below the threshold.

    ``forward_loss`` builds the graph and returns the scalar loss tensor.
    ``on_epoch(epoch, loss)`` runs after each optimizer step (checkpoint
    hook).  Returns the per-epoch loss history (loss measured before each
    step).
    """
    history: list[float] = []
    t0 = time.perf_counter()
    for epoch in range(start_epoch + 1, epochs + 1):
        loss = forward_loss()
        value = float(loss.data)
        if not np.isfinite(value):
            raise FloatingPointError(f"non-finite loss at epoch {epoch}")
        history.append(value)
        loss.backward()
        adam_step(params, config)
        if on_epoch is not None:
            on_epoch(epoch, value)
        if log_every and epoch % log_every == 0:
            rate = (time.perf_counter() - t0) / len(history)
            log(f"epoch {epoch}: loss {value:.4e} ({rate:.2f}s/epoch)")
        if early_stop_loss is not None and value < early_stop_loss:
            if log_every:
                log(f"early stop at epoch {epoch}: loss {value:.4e}")
            break
    return history


def save_checkpoint(path: str | Path, params: list[LayerParams], epoch: int, history: list[float]) -> None:
    """Atomically snapshot parameters plus optimizer state mid-training."""
    tensors: dict[str, np.ndarray] = {}
    for p in params:
        tensors[p.name + ".w"] = p.weight.data
        tensors[p.name + ".m_w"] = p.m_w
        tensors[p.name + ".v_w"] = p.v_w
        tensors[p.name + ".step"] = np.float32(p.step)
        if p.bias is not None:
            tensors[p.name + ".b"] = p.bias.data
            tensors[p.name + ".m_b"] = p.m_b
            tensors[p.name + ".v_b"] = p.v_b
    tensors["ckpt.epoch"] = np.float32(epoch)
    tensors["ckpt.history"] = np.asarray(history, dtype=np.float32)
    tmp = str(path) + ".tmp"
    write_container(tmp, tensors)
    os.replace(tmp, path)


def load_checkpoint(path: str | Path, params: list[LayerParams]) -> tuple[int, list[float]]:
    """Restore a snapshot into already-built layers; returns (epoch, history)."""
    tensors = read_container(path)
    for p in params:
        p.weight.data[...] = tensors[p.name + ".w"]
        p.weight.invalidate_cache()
        p.m_w[...] = tensors[p.name + ".m_w"]
        p.v_w[...] = tensors[p.name + ".v_w"]
        p.step = int(tensors[p.name + ".step"])
        if p.bias is not None:
            p.bias.data[...] = tensors[p.name + ".b"]
            p.bias.invalidate_cache()
            p.m_b[...] = tensors[p.name + ".m_b"]
            p.v_b[...] = tensors[p.name + ".v_b"]
    return int(tensors["ckpt.epoch"]), [float(x) for x in tensors["ckpt.history"]]
