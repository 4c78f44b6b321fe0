"""Per-case reconstruction loss under the live checkpoint, plus a second
single-sample probe on a different record."""
from pathlib import Path

import numpy as np

from flowsur.models.autoencoder import CaerAutoencoder
from flowsur.nn import functional as F
from flowsur.pipeline import _restore_autoencoder, load_splits

train_records, _, _ = load_splits(Path("artifacts"))
ae = _restore_autoencoder(train_records, Path("artifacts"), seed=0)
print(f"checkpoint epoch {ae.n_iter_}, loss {ae.loss_history_[-1]:.4e}")

rows = []
for i, rec in enumerate(train_records):
    x = rec.fields[None].astype(np.float32)
    z = ae.transform(x)
    y = ae.inverse_transform(z)
    err = (y[0] - rec.fields) ** 2
    rows.append((float(err.mean()), float(err[0].mean()), float(err[1].mean()), i, rec.spec.label()))
rows.sort(reverse=True)
print("worst cases (total, ch0, ch1):")
for tot, c0, c1, i, label in rows[:8]:
    print(f"  [{i:2d}] {label:24s} {tot:.3e}  v {c0:.3e}  t {c1:.3e}")
print("best cases:")
for tot, c0, c1, i, label in rows[-3:]:
    print(f"  [{i:2d}] {label:24s} {tot:.3e}  v {c0:.3e}  t {c1:.3e}")
case0 = next(r for r in rows if r[3] == 0)
print(f"case 0: total {case0[0]:.3e}  v {case0[1]:.3e}  t {case0[2]:.3e}")

sample = train_records[17].fields.astype(np.float64)
half = F.bilinear_resize(sample, 50, 75)
ae2 = CaerAutoencoder(input_shape=(50, 75), epochs=1500, early_stop_loss=1e-5,
                      learning_rate=1e-3, seed=0)
ae2.fit(half[None].astype(np.float32))
h = ae2.loss_history_
marks = [0, 100, 300, 600, 900, 1200]
print("[record 17 half lr1e-3] " + " ".join(f"{m}:{h[m]:.3e}" for m in marks if m < len(h))
      + f" final:{h[-1]:.3e} n_iter:{ae2.n_iter_}")
