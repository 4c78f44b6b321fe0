"""Diagnose the single-sample overfit stall."""
import numpy as np
from pathlib import Path
from flowsur.pipeline import load_splits
from flowsur.models.autoencoder import CaerAutoencoder
from flowsur.nn import functional as F

train_records, _, _ = load_splits(Path("artifacts"))
sample = train_records[0].fields.astype(np.float64)
half = F.bilinear_resize(sample, 50, 75)
for name, arr in (("full", sample), ("half", half)):
    for ch in range(2):
        c = arr[ch]
        print(f"{name} ch{ch}: min {c.min():.4f} max {c.max():.4f} "
              f"mean {c.mean():.4f} frac==0 {(c == 0).mean():.4f} frac==1 {(c == 1).mean():.4f}")

def run(tag, shape, data, epochs, **kw):
    ae = CaerAutoencoder(input_shape=shape, epochs=epochs, early_stop_loss=0.0,
                         seed=kw.pop("seed", 0), log_every=0, **kw)
    ae.fit(data[None].astype(np.float32))
    h = ae.loss_history_
    marks = [0, 50, 100, 200, 400, 800, 1200, 1600, 2000, 2400, 2800]
    line = " ".join(f"{m}:{h[m]:.3e}" for m in marks if m < len(h))
    print(f"[{tag}] {line} final:{h[-1]:.3e}", flush=True)

run("half lr1e-4", (50, 75), half, 3000)
run("half lr1e-3", (50, 75), half, 3000, learning_rate=1e-3)
run("half lr3e-4", (50, 75), half, 3000, learning_rate=3e-4)
run("half lr1e-4 seed1", (50, 75), half, 1500, seed=1)
run("full lr1e-4", tuple(sample.shape[1:]), sample, 800)
