"""Per-case evaluation reports and their file exports.

The report holds everything in memory (error maps included); export
writes one statistics CSV per field, portable pixmap images for every
predicted/truth/error field, and the latent embedding as CSV plus a
scatter image.  Images use a fixed blue-to-red colormap with the floor
row at the bottom edge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import (
    BandResult,
    ErrorStats,
    distribution_stats,
    error_map,
    r2_score,
    within_band_fraction,
)
from .tsne import Embedding2D

BAND = 0.20
# relative-error floors: 1e-3 in normalized units, expressed per field's
# physical scale (velocity scale 1.2 m/s, temperature span 25 K)
VELOCITY_FLOOR = 1e-3 * 1.2
TEMPERATURE_FLOOR = 1e-3 * 25.0

CLASS_COLORS = {
    "left": (0, 0, 255),
    "right": (255, 165, 0),
    "dual": (0, 128, 0),
}


@dataclass(frozen=True)
class FieldEval:
    """Metrics plus the raw maps for one field of one case."""

    stats: ErrorStats
    r2: float
    band: BandResult
    error: np.ndarray
    predicted: np.ndarray
    truth: np.ndarray


@dataclass(frozen=True)
class AggregateEval:
    stats: ErrorStats
    r2: float
    band: BandResult


@dataclass(frozen=True)
class CaseEval:
    label: str
    left: float
    right: float
    velocity: FieldEval
    temperature: FieldEval


@dataclass(frozen=True)
class EvalReport:
    cases: tuple
    aggregate_velocity: AggregateEval
    aggregate_temperature: AggregateEval


def _eval_field(predicted: np.ndarray, truth: np.ndarray, floor: float) -> FieldEval:
    err = error_map(predicted, truth)
    return FieldEval(
        stats=distribution_stats(err),
        r2=r2_score(predicted, truth),
        band=within_band_fraction(predicted, truth, band=BAND, floor=floor),
        error=err,
        predicted=np.asarray(predicted, dtype=np.float64),
        truth=np.asarray(truth, dtype=np.float64),
    )


def _aggregate(pairs: list, floor: float) -> AggregateEval:
    pred = np.concatenate([p.ravel() for p, _ in pairs])
    truth = np.concatenate([t.ravel() for _, t in pairs])
    return AggregateEval(
        stats=distribution_stats(np.abs(pred - truth)),
        r2=r2_score(pred, truth),
        band=within_band_fraction(pred, truth, band=BAND, floor=floor),
    )


def evaluate_model(bundle, records) -> EvalReport:
    """Score a trained bundle against solver ground truth, physical units."""
    records = list(records)
    if not records:
        raise ValueError("no cases to evaluate")
    cases = []
    v_pairs, t_pairs = [], []
    for rec in records:
        config = rec.spec.config
        if config == "dual":
            speed_hat, temp_hat, _ = bundle.predict_dual(
                rec.spec.left_velocity, rec.spec.right_velocity
            )
        else:
            # single-inlet case: the idle slot sits at 0, outside the
            # operating range, so the dual path must not see it
            active = (rec.spec.left_velocity if config == "left"
                      else rec.spec.right_velocity)
            speed_hat, temp_hat, _ = bundle.predict_single(config, active)
        speed, temp = bundle.norm.denormalize(rec.fields)
        cases.append(
            CaseEval(
                label=rec.spec.label(),
                left=rec.spec.left_velocity,
                right=rec.spec.right_velocity,
                velocity=_eval_field(speed_hat, speed, VELOCITY_FLOOR),
                temperature=_eval_field(temp_hat, temp, TEMPERATURE_FLOOR),
            )
        )
        v_pairs.append((speed_hat, speed))
        t_pairs.append((temp_hat, temp))
    return EvalReport(
        cases=tuple(cases),
        aggregate_velocity=_aggregate(v_pairs, VELOCITY_FLOOR),
        aggregate_temperature=_aggregate(t_pairs, TEMPERATURE_FLOOR),
    )


def colormap_rgb(t: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to a blue-to-red ramp: 0 -> (0,0,255), 1 -> (255,0,0)."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    rgb = np.empty(t.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = np.rint(255.0 * t).astype(np.uint8)
    rgb[..., 1] = 0
    rgb[..., 2] = np.rint(255.0 * (1.0 - t)).astype(np.uint8)
    return rgb


def write_ppm(path, values: np.ndarray, lo: float | None = None, hi: float | None = None):
    """Write a field as a binary portable pixmap, floor row at the bottom.

    Values are normalized to [lo, hi] (the array extremes by default); a
    constant field renders solid blue.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected a 2D field, got {values.shape}")
    lo = float(values.min()) if lo is None else float(lo)
    hi = float(values.max()) if hi is None else float(hi)
    span = hi - lo
    t = np.zeros_like(values) if span <= 0 else (values - lo) / span
    rgb = colormap_rgb(t[::-1, :])  # row 0 is the floor, drawn last (bottom)
    ny, nx = values.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
    return path


_CSV_HEADER = ["case", "left", "right", "field", "median", "p75", "p95", "max",
               "r2", "band_fraction"]


def _stats_row(case_id, left, right, field_name, stats, r2, band):
    return [
        case_id,
        "" if left is None else f"{left:.6g}",
        "" if right is None else f"{right:.6g}",
        field_name,
        f"{stats.median:.8g}",
        f"{stats.p75:.8g}",
        f"{stats.p95:.8g}",
        f"{stats.max:.8g}",
        f"{r2:.8g}",
        f"{band.fraction:.8g}",
    ]


def export_report(report: EvalReport, out_dir) -> list:
    """Write per-field CSVs and per-case images; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    for field_name, agg in [
        ("velocity", report.aggregate_velocity),
        ("temperature", report.aggregate_temperature),
    ]:
        path = out_dir / f"stats_{field_name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_CSV_HEADER)
            for case in report.cases:
                fe = getattr(case, field_name)
                w.writerow(_stats_row(case.label, case.left, case.right,
                                      field_name, fe.stats, fe.r2, fe.band))
            w.writerow(_stats_row("all", None, None, field_name,
                                  agg.stats, agg.r2, agg.band))
        written.append(path)

    for case in report.cases:
        for field_name in ("velocity", "temperature"):
            fe = getattr(case, field_name)
            for kind, arr in [("predicted", fe.predicted), ("truth", fe.truth),
                              ("error", fe.error)]:
                written.append(
                    write_ppm(out_dir / f"{case.label}_{field_name}_{kind}.ppm", arr)
                )
    return written


def export_embedding(emb: Embedding2D, out_dir, case_ids=None, size: int = 300) -> list:
    """Write the 2D embedding as a CSV and a scatter pixmap."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = emb.coords.shape[0]
    case_ids = list(case_ids) if case_ids is not None else [str(i) for i in range(n)]
    if len(case_ids) != n:
        raise ValueError("one case id per embedded point required")

    csv_path = out_dir / "latent_embedding.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "label", "x", "y"])
        for cid, lab, (x, y) in zip(case_ids, emb.labels, emb.coords):
            w.writerow([cid, lab, f"{x:.8g}", f"{y:.8g}"])

    img = np.full((size, size, 3), 255, dtype=np.uint8)
    lo = emb.coords.min(axis=0)
    hi = emb.coords.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    margin = 0.06
    pos = (emb.coords - lo) / span  # [0, 1] each axis
    px = (margin + pos * (1 - 2 * margin)) * (size - 1)
    for (x, y), lab in zip(px, emb.labels):
        color = CLASS_COLORS.get(lab, (0, 0, 0))
        cx, cy = int(round(x)), int(round((size - 1) - y))  # y up on the page
        y0, y1 = max(cy - 2, 0), min(cy + 3, size)
        x0, x1 = max(cx - 2, 0), min(cx + 3, size)
        img[y0:y1, x0:x1] = color
    ppm_path = out_dir / "latent_embedding.ppm"
    with open(ppm_path, "wb") as fh:
        fh.write(f"P6\n{size} {size}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return [csv_path, ppm_path]
