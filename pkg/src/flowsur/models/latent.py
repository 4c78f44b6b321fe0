"""Latent-space models: inlet descriptor regression and dual-inlet fusion.

``LatentPredictor`` maps a two-number inlet descriptor (side code, scaled
velocity) to the flattened latent of the matching single-inlet field.
``LatentAggregator`` fuses a left and a right latent, stacked along the
channel axis, into the latent of the combined dual-inlet flow.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..nn import Conv, Dense, OptimizerConfig, ResidualBlock, collect_params
from ..nn import ops
from ..nn.tensor import Tensor
from .training import run_full_batch

MLP_WIDTHS = (128, 512, 1026, 2000, 2000, 1280)


def make_descriptor(side: str, velocity: float, velocity_scale: float = 1.2) -> np.ndarray:
    """Encode an inlet as (position code, scaled velocity); left=0, right=1."""
    codes = {"left": 0.0, "right": 1.0}
    if side not in codes:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return np.array([codes[side], velocity / velocity_scale], dtype=np.float32)


class LatentPredictor(BaseEstimator, RegressorMixin):
    """Six dense layers (relu between, linear last) from descriptor to latent."""

    def __init__(
        self,
        epochs=10000,
        learning_rate=1e-4,
        weight_decay=1e-7,
        early_stop_loss=1e-4,
        seed=0,
        log_every=0,
    ):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.early_stop_loss = early_stop_loss
        self.seed = seed
        self.log_every = log_every

    def _build(self) -> None:
        rng = np.random.default_rng(self.seed)
        self._layers = []
        f_in = 2
        for i, width in enumerate(MLP_WIDTHS):
            self._layers.append(Dense(f"mlp.fc{i + 1}", f_in, width, rng))
            f_in = width
        self.params_ = collect_params(self._layers)

    def _forward(self, x: Tensor) -> Tensor:
        for layer in self._layers[:-1]:
            x = ops.relu(layer(x))
        return self._layers[-1](x)

    @staticmethod
    def _check_descriptors(D) -> np.ndarray:
        D = np.asarray(D, dtype=np.float32)
        if D.ndim != 2 or D.shape[1] != 2:
            raise ValueError(f"expected (N, 2) descriptors, got {D.shape}")
        if not np.all(np.isin(D[:, 0], [0.0, 1.0])):
            raise ValueError("descriptor position code must be 0.0 (left) or 1.0 (right)")
        if D[:, 1].min() < 0.0 or D[:, 1].max() > 1.0:
            raise ValueError("descriptor velocity must lie in [0, 1] after scaling")
        return D

    def fit(self, X, y, log=print):
        D = self._check_descriptors(X)
        Z = np.asarray(y, dtype=np.float32)
        if Z.ndim != 2 or Z.shape[0] != D.shape[0]:
            raise ValueError(f"latent targets {Z.shape} do not match descriptors {D.shape}")
        if Z.shape[1] != MLP_WIDTHS[-1]:
            raise ValueError(f"latent width must be {MLP_WIDTHS[-1]}, got {Z.shape[1]}")
        self._build()
        xt = Tensor(D)

        def forward_loss():
            return ops.mse(self._forward(xt), Z)

        config = OptimizerConfig(
            learning_rate=self.learning_rate, weight_decay=self.weight_decay
        )
        self.loss_history_ = run_full_batch(
            forward_loss,
            self.params_,
            config,
            self.epochs,
            early_stop_loss=self.early_stop_loss,
            log_every=self.log_every,
            log=log,
        )
        self.n_iter_ = len(self.loss_history_)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return self._forward(Tensor(self._check_descriptors(X))).data

    def init_random(self):
        self._build()
        self.loss_history_ = []
        self.n_iter_ = 0
        return self


class LatentAggregator(BaseEstimator, RegressorMixin):
    """Channel-stacked latent fusion CNN.

    Input rows are two flattened latents side by side (left then right);
    internally they form a 128-channel map over the latent grid, widened
    to 256 channels, narrowed back to 64, spatial extent untouched.  The
    final conv is linear: fused latents live in the encoder's raw range.
    """

    def __init__(
        self,
        latent_shape=(64, 4, 5),
        epochs=6000,
        learning_rate=1e-4,
        weight_decay=1e-7,
        early_stop_loss=None,
        seed=0,
        log_every=0,
    ):
        self.latent_shape = latent_shape
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.early_stop_loss = early_stop_loss
        self.seed = seed
        self.log_every = log_every

    def _build(self) -> None:
        rng = np.random.default_rng(self.seed)
        c = self.latent_shape[0]
        self._c1 = Conv("agg.c1", 2 * c, 4 * c, rng)
        self._res1 = ResidualBlock("agg.res1", 4 * c, rng)
        self._c2 = Conv("agg.c2", 4 * c, 2 * c, rng)
        self._res2 = ResidualBlock("agg.res2", 2 * c, rng)
        self._c3 = Conv("agg.c3", 2 * c, c, rng)
        self.params_ = collect_params(self._c1, self._res1, self._c2, self._res2, self._c3)

    def _forward(self, x: Tensor) -> Tensor:
        x = self._res1(ops.relu(self._c1(x)))
        x = self._res2(ops.relu(self._c2(x)))
        return self._c3(x)

    @property
    def latent_dim(self) -> int:
        return int(np.prod(self.latent_shape))

    def _check_pairs(self, X) -> Tensor:
        X = np.asarray(X, dtype=np.float32)
        d = self.latent_dim
        if X.ndim != 2 or X.shape[1] != 2 * d:
            raise ValueError(f"expected (N, {2 * d}) latent pairs, got {X.shape}")
        c, h, w = self.latent_shape
        left = ops.from_feature_vector(Tensor(X[:, :d]), h, w, c)
        right = ops.from_feature_vector(Tensor(X[:, d:]), h, w, c)
        return ops.concat_channels(left, right)

    def fit(self, X, y, log=print):
        xt = self._check_pairs(X)
        Z = np.asarray(y, dtype=np.float32)
        if Z.ndim != 2 or Z.shape != (xt.data.shape[0], self.latent_dim):
            raise ValueError(f"expected ({xt.data.shape[0]}, {self.latent_dim}) targets, got {Z.shape}")
        self._build()
        self.loss_history_ = self._train(xt, Z, self.epochs, log)
        self.n_iter_ = len(self.loss_history_)
        return self

    def fine_tune(self, X, y, epochs, log=print):
        """Extra passes on new pairs (e.g. regressor-predicted latents)."""
        check_is_fitted(self)
        xt = self._check_pairs(X)
        Z = np.asarray(y, dtype=np.float32)
        self.loss_history_ = self.loss_history_ + self._train(xt, Z, epochs, log)
        self.n_iter_ = len(self.loss_history_)
        return self

    def _train(self, xt: Tensor, Z: np.ndarray, epochs: int, log) -> list[float]:
        def forward_loss():
            out = ops.to_feature_vector(self._forward(xt))
            return ops.mse(out, Z)

        config = OptimizerConfig(
            learning_rate=self.learning_rate, weight_decay=self.weight_decay
        )
        return run_full_batch(
            forward_loss,
            self.params_,
            config,
            epochs,
            early_stop_loss=self.early_stop_loss,
            log_every=self.log_every,
            log=log,
        )

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return ops.to_feature_vector(self._forward(self._check_pairs(X))).data

    def init_random(self):
        self._build()
        self.loss_history_ = []
        self.n_iter_ = 0
        return self
