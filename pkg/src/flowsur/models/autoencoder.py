"""Convolutional autoencoder with a shared encoder and twin decoders.

The encoder compresses a two-channel field stack through five stages of
conv / relu / pool / residual-block down to a 64-channel feature map
(4x5 on the full 100x150 grid, 23.4375x smaller than the input).  Two
mirrored decoder branches, one per field, upsample back through the same
size ladder and end in a sigmoid so reconstructions stay inside the
normalized [0, 1] range.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..nn import Conv, ConvTranspose, OptimizerConfig, ResidualBlock, collect_params
from ..nn import ops
from ..nn.tensor import Tensor
from .training import load_checkpoint, run_full_batch, save_checkpoint

ENCODER_CHANNELS = (2, 16, 32, 64, 64, 64)
DECODER_CHANNELS = (64, 64, 32, 16, 8)


def _pooled(size: int) -> int:
    # 3x3 window, stride 2, pad 1
    return (size - 1) // 2 + 1


def encoder_sizes(height: int, width: int) -> list[tuple[int, int]]:
    """Spatial extent after each of the five stages, input first."""
    sizes = [(height, width)]
    for _ in range(5):
        h, w = sizes[-1]
        sizes.append((_pooled(h), _pooled(w)))
    return sizes


class CaerAutoencoder(BaseEstimator, TransformerMixin):
    """Field-stack compressor: fit on (N, 2, H, W) stacks in [0, 1].

    ``transform`` yields flattened channel-major latents,
    ``inverse_transform`` decodes latents back to field stacks.  Training
    is full batch with a summed per-field reconstruction loss.
    """

    def __init__(
        self,
        input_shape=(100, 150),
        epochs=20000,
        learning_rate=1e-4,
        weight_decay=1e-7,
        early_stop_loss=1e-4,
        seed=0,
        log_every=0,
    ):
        self.input_shape = input_shape
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.early_stop_loss = early_stop_loss
        self.seed = seed
        self.log_every = log_every

    # ------------------------------------------------------------------
    # construction
    def _build(self) -> None:
        rng = np.random.default_rng(self.seed)
        sizes = encoder_sizes(*self.input_shape)
        # the fifth pool must still have something to reduce
        if min(sizes[-2]) < 2:
            raise ValueError(f"input {self.input_shape} too small for five pooling stages")
        self.sizes_ = sizes
        self.latent_shape_ = (ENCODER_CHANNELS[-1], *sizes[-1])
        self.latent_dim_ = int(np.prod(self.latent_shape_))

        self._enc = []
        for i in range(5):
            conv = Conv(f"enc.s{i + 1}.conv", ENCODER_CHANNELS[i], ENCODER_CHANNELS[i + 1], rng)
            res = ResidualBlock(f"enc.s{i + 1}.res", ENCODER_CHANNELS[i + 1], rng)
            self._enc.append((conv, res))

        def branch(prefix: str):
            stages = []
            c_in = ENCODER_CHANNELS[-1]
            for i, c_out in enumerate(DECODER_CHANNELS):
                tconv = ConvTranspose(f"{prefix}.s{i + 1}.tconv", c_in, c_out, rng)
                res = ResidualBlock(f"{prefix}.s{i + 1}.res", c_out, rng)
                stages.append((tconv, res))
                c_in = c_out
            out = ConvTranspose(f"{prefix}.out", c_in, 1, rng)
            return stages, out

        self._dec_v, self._out_v = branch("dec_v")
        self._dec_t, self._out_t = branch("dec_t")
        self.params_ = collect_params(
            [list(pair) for pair in self._enc],
            [list(pair) for pair in self._dec_v],
            self._out_v,
            [list(pair) for pair in self._dec_t],
            self._out_t,
        )

    # ------------------------------------------------------------------
    # graph forward passes (NHWC tensors)
    def _encode_graph(self, x: Tensor) -> Tensor:
        for conv, res in self._enc:
            x = res(ops.maxpool3x3s2(ops.relu(conv(x))))
        return x

    def _decode_graph(self, z: Tensor, stages, out) -> Tensor:
        x = z
        for (tconv, res), (th, tw) in zip(stages, reversed(self.sizes_[:-1])):
            x = res(ops.relu(tconv(ops.bilinear_resize(x, th, tw))))
        return ops.sigmoid(out(x))

    def _calibrate_heads(self, v_target: np.ndarray, t_target: np.ndarray) -> None:
        # Start each head at the logit of its field mean.  A head opening at
        # the sigmoid midpoint overshoots hard on a low-mean field; with few
        # samples the whole branch can park in saturation where the gradient
        # underflows to exactly zero and the branch never recovers.
        for out, target in ((self._out_v, v_target), (self._out_t, t_target)):
            m = float(np.clip(target.mean(), 1e-3, 1.0 - 1e-3))
            out.params.bias.data[:] = np.log(m / (1.0 - m))

    # ------------------------------------------------------------------
    # validation
    def _check_fields(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float32)
        expected = (2, *self.input_shape)
        if X.ndim != 4 or X.shape[1:] != expected:
            raise ValueError(f"expected (N, {expected[0]}, {expected[1]}, {expected[2]}) fields, got {X.shape}")
        if X.min() < -1e-6 or X.max() > 1 + 1e-6:
            raise ValueError("fields must be normalized to [0, 1]")
        return X.transpose(0, 2, 3, 1)  # to NHWC

    def _check_latents(self, Z) -> Tensor:
        Z = np.asarray(Z, dtype=np.float32)
        if Z.ndim != 2 or Z.shape[1] != self.latent_dim_:
            raise ValueError(f"expected (N, {self.latent_dim_}) latents, got {Z.shape}")
        c, h, w = self.latent_shape_
        return ops.from_feature_vector(Tensor(Z), h, w, c)

    # ------------------------------------------------------------------
    # estimator API
    def fit(self, X, y=None, checkpoint_path=None, checkpoint_every=250, log=print):
        """Full-batch reconstruction training; optional resumable snapshots."""
        self._build()
        x = self._check_fields(X)
        v_target = x[..., 0:1]
        t_target = x[..., 1:2]
        self._calibrate_heads(v_target, t_target)
        xt = Tensor(x)

        start_epoch = 0
        live: list[float] = []
        if checkpoint_path is not None and Path(checkpoint_path).exists():
            start_epoch, live = load_checkpoint(checkpoint_path, self.params_)
            if self.log_every:
                log(f"resumed from {checkpoint_path} at epoch {start_epoch}")

        def forward_loss():
            z = self._encode_graph(xt)
            v_hat = self._decode_graph(z, self._dec_v, self._out_v)
            t_hat = self._decode_graph(z, self._dec_t, self._out_t)
            return ops.add(ops.mse(v_hat, v_target), ops.mse(t_hat, t_target))

        def on_epoch(epoch, value):
            live.append(value)
            if checkpoint_path is not None and checkpoint_every and epoch % checkpoint_every == 0:
                save_checkpoint(checkpoint_path, self.params_, epoch, live)

        config = OptimizerConfig(
            learning_rate=self.learning_rate, weight_decay=self.weight_decay
        )
        run_full_batch(
            forward_loss,
            self.params_,
            config,
            self.epochs,
            early_stop_loss=self.early_stop_loss,
            start_epoch=start_epoch,
            log_every=self.log_every,
            log=log,
            on_epoch=on_epoch,
        )
        self.loss_history_ = live
        self.n_iter_ = len(self.loss_history_)
        if checkpoint_path is not None:
            save_checkpoint(checkpoint_path, self.params_, self.n_iter_, self.loss_history_)
        return self

    def transform(self, X) -> np.ndarray:
        """Encode field stacks to flattened channel-major latents (N, D)."""
        check_is_fitted(self)
        x = Tensor(self._check_fields(X))
        z = self._encode_graph(x)
        return ops.to_feature_vector(z).data

    def inverse_transform(self, Z) -> np.ndarray:
        """Decode latents (N, D) back to normalized (N, 2, H, W) stacks."""
        check_is_fitted(self)
        z = self._check_latents(Z)
        v = self._decode_graph(z, self._dec_v, self._out_v)
        t = self._decode_graph(z, self._dec_t, self._out_t)
        fields = np.concatenate([v.data, t.data], axis=3)  # (N, H, W, 2)
        return fields.transpose(0, 3, 1, 2)

    def reconstruct(self, X) -> np.ndarray:
        """encode + decode in one call."""
        return self.inverse_transform(self.transform(X))

    @property
    def compression_ratio(self) -> float:
        """Input size over latent size, exact rational."""
        check_is_fitted(self)
        h, w = self.input_shape
        return (2 * h * w) / self.latent_dim_

    def init_random(self):
        """Build with seeded random weights but no training (testing aid)."""
        self._build()
        self.loss_history_ = []
        self.n_iter_ = 0
        return self
