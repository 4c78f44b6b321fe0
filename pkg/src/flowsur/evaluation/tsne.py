"""Exact t-SNE, written against the original formulation.

No tree approximations: pairwise affinities with per-point bandwidths
matched to a target perplexity by bisection, then momentum gradient
descent on the KL divergence between the input and embedding
distributions.  Deterministic for a fixed seed, which the latent-space
tests and exports rely on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

EXAGGERATION = 4.0
EXAGGERATION_ITERS = 100
LEARNING_RATE = 200.0
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
MOMENTUM_SWITCH_ITER = 250
_TINY = 1e-12


@dataclass(frozen=True)
class Embedding2D:
    """2D coordinates per latent, with class labels and the KL trace."""

    coords: np.ndarray  # (N, 2) float64
    labels: tuple
    kl_trace: np.ndarray  # KL w.r.t. the unexaggerated affinities, one per iteration
    jittered: bool = False

    def __post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError(f"expected (N, 2) coordinates, got {self.coords.shape}")
        if len(self.labels) != self.coords.shape[0]:
            raise ValueError("one label per embedded point required")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("embedding produced non-finite coordinates")


def _sq_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _row_affinities(d2_row: np.ndarray, perplexity: float) -> np.ndarray:
    """Conditional affinities for one point, bandwidth matched by bisection.

    The precision beta is searched until the Shannon entropy of the row
    equals log(perplexity).
    """
    target = np.log(perplexity)
    beta, lo, hi = 1.0, 0.0, np.inf
    p = np.zeros_like(d2_row)
    for _ in range(64):
        np.exp(-d2_row * beta, out=p)
        s = p.sum()
        if s <= 0.0:
            h = 0.0
        else:
            p /= s
            h = float(-(p * np.log(np.maximum(p, _TINY))).sum())
        if abs(h - target) < 1e-7:
            break
        if h > target:  # too flat, sharpen
            lo = beta
            beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
        else:
            hi = beta
            beta = (lo + beta) / 2.0
    return p


def _joint_affinities(x: np.ndarray, perplexity: float) -> np.ndarray:
    n = x.shape[0]
    d2 = _sq_distances(x)
    cond = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        cond[i, mask[i]] = _row_affinities(d2[i, mask[i]], perplexity)
    p = (cond + cond.T) / (2.0 * n)
    return np.maximum(p, _TINY)


def tsne_embed(
    latents: np.ndarray,
    labels,
    perplexity: float = 5.0,
    seed: int = 0,
    n_iter: int = 1000,
) -> Embedding2D:
    """Embed latent vectors into 2D by exact t-SNE.

    Needs at least ``3 * perplexity`` points for the bandwidth search to be
    meaningful.  Duplicate latents are nudged apart with seeded noise and
    the embedding is flagged as jittered.
    """
    x = np.asarray(latents, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected (N, D) latents, got shape {x.shape}")
    labels = tuple(labels)
    n = x.shape[0]
    if len(labels) != n:
        raise ValueError("one label per latent required")
    if n < 3 * perplexity:
        raise ValueError(f"{n} points is too few for perplexity {perplexity}")

    rng = np.random.default_rng(seed)
    jittered = False
    d2 = _sq_distances(x)
    if n > 1 and np.min(d2[~np.eye(n, dtype=bool)]) == 0.0:
        scale = float(np.sqrt(np.max(d2))) or 1.0
        x = x + rng.normal(scale=1e-6 * scale, size=x.shape)
        jittered = True
        warnings.warn("duplicate latents jittered before embedding", UserWarning)

    p = _joint_affinities(x, perplexity)
    y = rng.standard_normal((n, 2)) * 1e-4
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    kl_trace = np.empty(n_iter)
    p_sum_log = float((p * np.log(p)).sum())  # entropy part of KL, constant

    for it in range(n_iter):
        p_eff = p * EXAGGERATION if it < EXAGGERATION_ITERS else p
        num = 1.0 / (1.0 + _sq_distances(y))
        np.fill_diagonal(num, 0.0)
        q = np.maximum(num / num.sum(), _TINY)

        pq = (p_eff - q) * num
        grad = 4.0 * (np.diag(pq.sum(axis=1)) - pq) @ y

        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        momentum = MOMENTUM_EARLY if it < MOMENTUM_SWITCH_ITER else MOMENTUM_LATE
        velocity = momentum * velocity - LEARNING_RATE * gains * grad
        y += velocity
        y -= y.mean(axis=0)

        # trace always uses the true affinities so the curve is comparable
        # across the exaggeration boundary
        kl_trace[it] = p_sum_log - float((p * np.log(q)).sum())

    return Embedding2D(coords=y, labels=labels, kl_trace=kl_trace, jittered=jittered)
