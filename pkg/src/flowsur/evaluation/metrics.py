"""Field-error metrics and latent-space separability scores.

All metric functions are pure and operate on physical-unit arrays; the
report layer decides which fields and floors to feed them.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class ErrorStats(NamedTuple):
    median: float
    p75: float
    p95: float
    max: float


class BandResult(NamedTuple):
    fraction: float
    excluded: int


def error_map(predicted: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Elementwise absolute difference, same shape and units as the inputs."""
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape:
        raise ValueError(
            f"shape mismatch: predicted {predicted.shape} vs truth {truth.shape}"
        )
    return np.abs(predicted - truth)


def distribution_stats(values: np.ndarray) -> ErrorStats:
    """Median, p75, p95, max of a sample, linear-interpolated quantiles."""
    flat = np.asarray(values, dtype=np.float64).ravel()
    if flat.size == 0:
        raise ValueError("cannot summarize an empty sample")
    q = np.quantile(flat, [0.5, 0.75, 0.95])
    return ErrorStats(float(q[0]), float(q[1]), float(q[2]), float(flat.max()))


def r2_score(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Coefficient of determination over all cells.

    1 means a perfect fit, 0 matches the constant mean predictor, negative
    is worse than that.  A constant truth field leaves nothing to explain.
    """
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if predicted.shape != truth.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {truth.shape}")
    ss_tot = float(((truth - truth.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ValueError("truth field is constant; r2 is undefined")
    ss_res = float(((truth - predicted) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def within_band_fraction(
    predicted: np.ndarray,
    truth: np.ndarray,
    band: float = 0.20,
    floor: float = 0.0,
) -> BandResult:
    """Fraction of cells whose relative error is within ``band``.

    Cells with ``|truth| < floor`` are excluded from the denominator (their
    relative error is dominated by the near-zero reference) and counted in
    ``excluded``.  With every cell excluded the fraction is nan.
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {truth.shape}")
    eligible = np.abs(truth) >= floor
    n_excluded = int(predicted.size - eligible.sum())
    if not eligible.any():
        return BandResult(float("nan"), n_excluded)
    ok = np.abs(predicted[eligible] - truth[eligible]) <= band * np.abs(truth[eligible])
    return BandResult(float(ok.mean()), n_excluded)


def latent_separability(latents: np.ndarray, labels) -> float:
    """Leave-one-out 1-nearest-neighbor accuracy in the raw latent space."""
    x = np.asarray(latents, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected (N, D) latents, got {x.shape}")
    labels = list(labels)
    if len(labels) != x.shape[0]:
        raise ValueError("one label per latent required")
    if len(set(labels)) < 2:
        raise ValueError("need at least two classes")
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, np.inf)
    nearest = np.argmin(d2, axis=1)
    return float(np.mean([labels[i] == labels[j] for i, j in enumerate(nearest)]))


def nearest_centroid_accuracy(coords: np.ndarray, labels) -> float:
    """Fraction of points closest to their own class centroid."""
    y = np.asarray(coords, dtype=np.float64)
    labels = list(labels)
    if y.ndim != 2 or len(labels) != y.shape[0]:
        raise ValueError("coords must be (N, D) with one label per row")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    cents = np.stack([y[[l == c for l in labels]].mean(axis=0) for c in classes])
    d2 = ((y[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
    assigned = np.argmin(d2, axis=1)
    return float(np.mean([classes[a] == l for a, l in zip(assigned, labels)]))
