"""Anatomy of the single-sample plateau: where does the residual error live?"""
import numpy as np

from flowsur.models.autoencoder import CaerAutoencoder
from flowsur.nn import functional as F, ops
from flowsur.nn.tensor import Tensor
from flowsur.pipeline import load_splits
from pathlib import Path

train_records, _, _ = load_splits(Path("artifacts"))
sample = train_records[0].fields.astype(np.float64)
half = F.bilinear_resize(sample, 50, 75).astype(np.float32)


def autopsy(tag, lr, epochs):
    ae = CaerAutoencoder(input_shape=(50, 75), epochs=epochs, early_stop_loss=1e-5,
                         learning_rate=lr, seed=0)
    ae.fit(half[None])
    x = half[None].transpose(0, 2, 3, 1)
    z = ae._encode_graph(Tensor(x))
    pre_v = ae._out_v(_decode_trunk(ae, z, ae._dec_v))
    pre_t = ae._out_t(_decode_trunk(ae, z, ae._dec_t))
    print(f"[{tag}] final loss {ae.loss_history_[-1]:.3e}  best {min(ae.loss_history_):.3e}")
    for name, pre, ch in (("v", pre_v.data, 0), ("t", pre_t.data, 1)):
        out = 1.0 / (1.0 + np.exp(-pre[0, :, :, 0]))
        err2 = (out - half[ch]) ** 2
        sat = np.abs(pre[0, :, :, 0]) > 4.0
        flat = np.sort(err2.ravel())[::-1]
        top = flat[: max(1, flat.size // 100)].sum() / flat.sum()
        print(f"  {name}: mse {err2.mean():.3e}  sat {sat.mean():.3f}  "
              f"err_on_sat {err2[sat].sum() / err2.sum() if sat.any() else 0.0:.3f}  "
              f"top1%share {top:.3f}  pre std {pre.std():.2f} range [{pre.min():.1f},{pre.max():.1f}]")
    zd = z.data
    print(f"  latent: std {zd.std():.3f}  frac|z|<1e-6 {np.mean(np.abs(zd) < 1e-6):.3f}  "
          f"range [{zd.min():.2f},{zd.max():.2f}]")


def _decode_trunk(ae, z, stages):
    x = z
    for (tconv, res), (th, tw) in zip(stages, reversed(ae.sizes_[:-1])):
        x = res(ops.relu(tconv(ops.bilinear_resize(x, th, tw))))
    return x


autopsy("lr1e-3 600ep", 1e-3, 600)
autopsy("lr1e-2 600ep", 1e-2, 600)
