"""Prediction-quality metrics, latent embedding, and report export."""

from .metrics import (
    BandResult,
    ErrorStats,
    distribution_stats,
    error_map,
    latent_separability,
    nearest_centroid_accuracy,
    r2_score,
    within_band_fraction,
)
from .report import (
    AggregateEval,
    CaseEval,
    EvalReport,
    FieldEval,
    evaluate_model,
    export_embedding,
    export_report,
    write_ppm,
)
from .tsne import Embedding2D, tsne_embed

__all__ = [
    "AggregateEval",
    "BandResult",
    "CaseEval",
    "Embedding2D",
    "ErrorStats",
    "EvalReport",
    "FieldEval",
    "distribution_stats",
    "error_map",
    "evaluate_model",
    "export_embedding",
    "export_report",
    "latent_separability",
    "nearest_centroid_accuracy",
    "r2_score",
    "tsne_embed",
    "within_band_fraction",
    "write_ppm",
]
