"""End-to-end error of the throwaway mid-training bundle."""
from pathlib import Path

from flowsur.evaluation import evaluate_model, latent_separability, nearest_centroid_accuracy, tsne_embed
from flowsur.models import ModelBundle
from flowsur.pipeline import load_splits, _field_stack
import numpy as np

train_records, test_records, _ = load_splits(Path("artifacts"))
bundle = ModelBundle.load("/tmp/stagecheck/model.cbml")
report = evaluate_model(bundle, test_records)
for case in report.cases:
    print(f"{case.label:22s} v_p95 {case.velocity.stats.p95:.4f}  v_r2 {case.velocity.r2:.4f}  "
          f"t_p95 {case.temperature.stats.p95:.4f}  t_r2 {case.temperature.r2:.4f}")
print(f"aggregate: v_median {report.aggregate_velocity.stats.median:.4f}  "
      f"t_median {report.aggregate_temperature.stats.median:.4f}")

train_report = evaluate_model(bundle, train_records)
print(f"train pooled v_median {train_report.aggregate_velocity.stats.median:.4f}")

latents = bundle.autoencoder.transform(_field_stack(train_records))
labels = [r.spec.config for r in train_records]
sep = latent_separability(latents, labels)
coords = tsne_embed(latents, labels, perplexity=5.0, seed=0)
acc = nearest_centroid_accuracy(coords, labels)
print(f"latent separability {sep:.3f}  tsne centroid acc {acc:.3f}")
