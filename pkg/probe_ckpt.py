"""Reconstruction-quality probe for the live training checkpoint."""

import sys

import numpy as np

from flowsur.pipeline import load_splits, _restore_autoencoder, _field_stack
from flowsur.evaluation.metrics import distribution_stats, r2_score
from pathlib import Path

train, test, norm = load_splits("artifacts")
auto = _restore_autoencoder(train, Path("artifacts"), seed=0)
print(f"checkpoint at epoch {auto.n_iter_}, loss {auto.loss_history_[-1]:.4e}")

for name, records in (("train", train[:8]), ("test", test)):
    x = _field_stack(records)
    recon = auto.reconstruct(x)
    for i, rec in enumerate(records):
        v_hat, t_hat = norm.denormalize(recon[i])
        v_true, t_true = norm.denormalize(rec.fields)
        ev = np.abs(v_hat - v_true)
        et = np.abs(t_hat - t_true)
        print(
            f"{name} {rec.spec.label():24s}"
            f" v_p95={distribution_stats(ev).p95:.4f} v_r2={r2_score(v_hat, v_true):.4f}"
            f" t_p95={distribution_stats(et).p95:.4f} t_r2={r2_score(t_hat, t_true):.4f}"
        )
