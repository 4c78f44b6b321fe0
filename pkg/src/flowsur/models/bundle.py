"""One trained surrogate: autoencoder + latent regressor + fusion network.

The bundle serializes every parameter tensor plus the normalization
constants into a single container file and answers the end-to-end
question: given two inlet velocities, what do the velocity-magnitude and
temperature fields look like?
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset import NormalizationSpec
from ..nn.container import file_checksum, read_container, write_container
from ..solver.cases import VELOCITY_RANGE
from .autoencoder import CaerAutoencoder
from .latent import LatentAggregator, LatentPredictor, make_descriptor


@dataclass
class ModelBundle:
    autoencoder: CaerAutoencoder
    predictor: LatentPredictor
    aggregator: LatentAggregator
    norm: NormalizationSpec

    @property
    def grid_shape(self) -> tuple[int, int]:
        return tuple(self.autoencoder.input_shape)

    def _check_velocity(self, value: float, which: str) -> float:
        lo, hi = VELOCITY_RANGE
        if not (lo <= value <= hi):
            raise ValueError(f"{which} inlet velocity {value} outside [{lo}, {hi}] m/s")
        return float(value)

    def predict_latent(self, side: str, velocity: float) -> np.ndarray:
        """Latent for one inlet acting alone, from the descriptor regressor."""
        self._check_velocity(velocity, side)
        d = make_descriptor(side, velocity, self.norm.velocity_scale)
        return self.predictor.predict(d[None])[0]

    def predict_single(self, side: str, velocity: float):
        """One inlet active: returns (speed m/s, temperature degC, millis).

        Decodes the regressed latent directly; the fusion network is not
        involved.  Fields are (ny, nx) with row 0 at the floor.
        """
        t0 = time.perf_counter()
        z = self.predict_latent(side, velocity)
        fields = self.autoencoder.inverse_transform(z[None])[0]
        speed, temperature = self.norm.denormalize(fields)
        elapsed_ms = (time.perf_counter() - t0) * 1e3
        return speed, temperature, elapsed_ms

    def predict_dual(self, left_velocity: float, right_velocity: float):
        """Both inlets active: returns (speed m/s, temperature degC, millis).

        Fields are (ny, nx) with row 0 at the floor.
        """
        t0 = time.perf_counter()
        self._check_velocity(left_velocity, "left")
        self._check_velocity(right_velocity, "right")
        scale = self.norm.velocity_scale
        d = np.stack(
            [
                make_descriptor("left", left_velocity, scale),
                make_descriptor("right", right_velocity, scale),
            ]
        )
        z = self.predictor.predict(d)
        pair = np.concatenate([z[0], z[1]])[None]
        fused = self.aggregator.predict(pair)
        fields = self.autoencoder.inverse_transform(fused)[0]
        speed, temperature = self.norm.denormalize(fields)
        elapsed_ms = (time.perf_counter() - t0) * 1e3
        return speed, temperature, elapsed_ms

    # ------------------------------------------------------------------
    def save(self, path: str | Path) -> None:
        tensors: dict[str, np.ndarray] = {}
        for model in (self.autoencoder, self.predictor, self.aggregator):
            for p in model.params_:
                tensors[p.name + ".w"] = p.weight.data
                if p.bias is not None:
                    tensors[p.name + ".b"] = p.bias.data
        tensors["norm.velocity_scale"] = np.float32(self.norm.velocity_scale)
        tensors["norm.temp_low"] = np.float32(self.norm.temp_low)
        tensors["norm.temp_high"] = np.float32(self.norm.temp_high)
        tensors["meta.grid"] = np.asarray(self.grid_shape, dtype=np.float32)
        write_container(path, tensors)

    @classmethod
    def load(cls, path: str | Path) -> "ModelBundle":
        tensors = read_container(path)
        grid = tuple(int(v) for v in tensors["meta.grid"])
        norm = NormalizationSpec(
            velocity_scale=float(tensors["norm.velocity_scale"]),
            temp_low=float(tensors["norm.temp_low"]),
            temp_high=float(tensors["norm.temp_high"]),
        )
        auto = CaerAutoencoder(input_shape=grid).init_random()
        pred = LatentPredictor().init_random()
        agg = LatentAggregator(latent_shape=auto.latent_shape_).init_random()
        for model in (auto, pred, agg):
            for p in model.params_:
                w = tensors[p.name + ".w"]
                if w.shape != p.weight.data.shape:
                    raise ValueError(f"{p.name}: stored shape {w.shape} != expected {p.weight.data.shape}")
                p.weight.data[...] = w
                p.weight.invalidate_cache()
                if p.bias is not None:
                    p.bias.data[...] = tensors[p.name + ".b"]
                    p.bias.invalidate_cache()
        return cls(autoencoder=auto, predictor=pred, aggregator=agg, norm=norm)

    @classmethod
    def random(cls, seed: int = 0, input_shape=(100, 150)) -> "ModelBundle":
        """Untrained bundle with seeded weights (latency and shape testing)."""
        auto = CaerAutoencoder(input_shape=input_shape, seed=seed).init_random()
        pred = LatentPredictor(seed=seed + 1).init_random()
        agg = LatentAggregator(latent_shape=auto.latent_shape_, seed=seed + 2).init_random()
        return cls(autoencoder=auto, predictor=pred, aggregator=agg, norm=NormalizationSpec())


def model_checksum(path: str | Path) -> str:
    """Hex digest identifying a saved bundle file."""
    return file_checksum(path)
