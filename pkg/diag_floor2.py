"""Does calibrated head bias keep the single-sample branches alive?"""
import numpy as np

from flowsur.models.autoencoder import CaerAutoencoder
from flowsur.nn import functional as F, ops
from flowsur.nn.tensor import Tensor
from flowsur.pipeline import load_splits
from pathlib import Path

train_records, _, _ = load_splits(Path("artifacts"))
sample = train_records[0].fields.astype(np.float64)
half = F.bilinear_resize(sample, 50, 75).astype(np.float32)


def trunk(ae, z, stages):
    x = z
    for (tconv, res), (th, tw) in zip(stages, reversed(ae.sizes_[:-1])):
        x = res(ops.relu(tconv(ops.bilinear_resize(x, th, tw))))
    return x


def run(tag, lr, epochs):
    ae = CaerAutoencoder(input_shape=(50, 75), epochs=epochs, early_stop_loss=1e-5,
                         learning_rate=lr, seed=0)
    ae.fit(half[None])
    h = ae.loss_history_
    marks = [0, 100, 300, 600, 1000, 1500, 2000, 3000]
    traj = " ".join(f"{m}:{h[m]:.3e}" for m in marks if m < len(h))
    print(f"[{tag}] {traj} final:{h[-1]:.3e} best:{min(h):.3e} n:{ae.n_iter_}")
    x = half[None].transpose(0, 2, 3, 1)
    z = ae._encode_graph(Tensor(x))
    for name, stages, out, ch in (("v", ae._dec_v, ae._out_v, 0), ("t", ae._dec_t, ae._out_t, 1)):
        pre = out(trunk(ae, z, stages)).data[0, :, :, 0]
        sat = np.abs(pre) > 4.0
        mse = ((1.0 / (1.0 + np.exp(-np.clip(pre, -80, 80))) - half[ch]) ** 2).mean()
        print(f"  {name}: mse {mse:.3e}  sat {sat.mean():.3f}  pre range [{pre.min():.1f},{pre.max():.1f}]")


run("lr1e-4", 1e-4, 4000)
run("lr1e-3", 1e-3, 4000)
