"""Profile a few training epochs to rank engine hotspots."""
import cProfile
import io
import pstats

import numpy as np

from flowsur.models.autoencoder import CaerAutoencoder

rng = np.random.default_rng(0)
X = rng.random((8, 2, 100, 150), dtype=np.float32)
ae = CaerAutoencoder(epochs=3, early_stop_loss=0.0, seed=0)
pr = cProfile.Profile()
pr.enable()
ae.fit(X)
pr.disable()
for key in ("tottime", "cumulative"):
    s = io.StringIO()
    pstats.Stats(pr, stream=s).sort_stats(key).print_stats(25)
    print(f"==== {key} ====")
    print(s.getvalue())
