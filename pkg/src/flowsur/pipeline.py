"""End-to-end orchestration: simulate, train, predict, evaluate.

Each stage reads and writes plain files so stages can run in separate
processes (or be skipped when their outputs already exist).  Directory
layout under an artifacts root:

    cases/<label>.flowc   one solved scenario each
    train.flowds          packed training tensors + normalization
    test.flowds           held-out tensors
    model.cbml            every trained parameter tensor in one container
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np

from .dataset import (
    NormalizationSpec,
    generate_case_matrix,
    read_dataset,
    to_sample,
    write_dataset,
)
from .solver import (
    CaseSpec,
    RoomGeometry,
    build_case,
    read_case,
    solve_steady,
    write_case,
)


def _log(msg: str) -> None:
    print(msg, flush=True)
    sys.stdout.flush()


def simulate_cases(
    out_dir: str | Path,
    geometry: RoomGeometry | None = None,
    tolerance: float = 1e-5,
    log=_log,
) -> tuple[Path, Path]:
    """Solve the full case matrix and pack both dataset splits.

    Skips any case whose output file already exists and converged, so an
    interrupted run resumes where it stopped.  Returns the two dataset paths.
    """
    geometry = geometry or RoomGeometry()
    out_dir = Path(out_dir)
    case_dir = out_dir / "cases"
    case_dir.mkdir(parents=True, exist_ok=True)
    train_specs, test_specs = generate_case_matrix()
    norm = NormalizationSpec()

    def solved(spec: CaseSpec) -> Path:
        path = case_dir / f"{spec.label()}.flowc"
        if path.exists():
            try:
                cached = read_case(path)
                if cached.converged and cached.nx == geometry.nx:
                    return path
            except ValueError:
                pass
        t0 = time.perf_counter()
        case = build_case(spec, geometry)
        state = solve_steady(case, tolerance=tolerance)
        write_case(path, spec, state)
        log(
            f"{spec.label()}: {state.iterations} iterations, "
            f"{time.perf_counter() - t0:.1f}s, residual {state.final_residual:.2e}"
        )
        return path

    train_records = []
    for i, spec in enumerate(train_specs):
        path = solved(spec)
        train_records.append(to_sample(read_case(path), norm, "train"))
        log(f"training case {i + 1}/{len(train_specs)} ready")
    test_records = []
    for i, spec in enumerate(test_specs):
        path = solved(spec)
        test_records.append(to_sample(read_case(path), norm, "test"))
        log(f"held-out case {i + 1}/{len(test_specs)} ready")

    train_path = out_dir / "train.flowds"
    test_path = out_dir / "test.flowds"
    write_dataset(train_path, train_records, norm)
    write_dataset(test_path, test_records, norm)
    log(f"wrote {train_path} ({len(train_records)} cases) and {test_path} ({len(test_records)})")
    return train_path, test_path


def load_splits(data_dir: str | Path):
    """Read both dataset files, returning (train, test, normalization)."""
    data_dir = Path(data_dir)
    train_records, norm = read_dataset(data_dir / "train.flowds")
    test_records, norm_t = read_dataset(data_dir / "test.flowds")
    if (norm.velocity_scale, norm.temp_low, norm.temp_high) != (
        norm_t.velocity_scale,
        norm_t.temp_low,
        norm_t.temp_high,
    ):
        raise ValueError("train and test datasets disagree on normalization")
    return train_records, test_records, norm


def _field_stack(records) -> "np.ndarray":
    return np.stack([r.fields for r in records])


def _restore_autoencoder(records, out_dir: Path, seed: int):
    """Rebuild the encoder/decoder stack from its training checkpoint."""
    from .models import CaerAutoencoder
    from .models.training import load_checkpoint

    shape = records[0].fields.shape[1:]
    auto = CaerAutoencoder(input_shape=shape, seed=seed).init_random()
    ckpt = out_dir / "caer.ckpt"
    if not ckpt.exists():
        raise FileNotFoundError(f"{ckpt} missing; run the autoencoder stage first")
    epoch, history = load_checkpoint(ckpt, auto.params_)
    auto.loss_history_ = history
    auto.n_iter_ = epoch
    return auto


def _single_latents(auto, train_records, velocity_scale: float):
    """Descriptor rows and encoder latents for the single-inlet cases."""
    from .models import make_descriptor

    singles = [r for r in train_records if r.spec.config in ("left", "right")]
    descriptors = np.stack(
        [
            make_descriptor(
                r.spec.config,
                r.spec.left_velocity if r.spec.config == "left" else r.spec.right_velocity,
                velocity_scale,
            )
            for r in singles
        ]
    )
    latents = auto.transform(_field_stack(singles))
    return singles, descriptors, latents


def train_all(
    data_dir: str | Path,
    out_dir: str | Path,
    stage: str = "all",
    seed: int = 0,
    caer_epochs: int | None = None,
    mlp_epochs: int | None = None,
    agg_epochs: int | None = None,
    log=_log,
) -> Path | None:
    """Run the training stages; returns the bundle path once assembled.

    Stages: ``autoencoder`` (checkpointed, resumable), ``mlp``,
    ``aggregator`` (which also assembles the final bundle), ``bundle``
    (assembly only), or ``all``.
    """
    from .models import CaerAutoencoder, LatentAggregator, LatentPredictor, ModelBundle
    from .models.training import load_checkpoint, save_checkpoint

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_records, _, norm = load_splits(data_dir)
    stages = ("autoencoder", "mlp", "aggregator") if stage == "all" else (stage,)

    auto = None
    if "autoencoder" in stages:
        kwargs = {} if caer_epochs is None else {"epochs": caer_epochs}
        grid = train_records[0].fields.shape[1:]
        auto = CaerAutoencoder(input_shape=grid, seed=seed, log_every=25, **kwargs)
        log(f"autoencoder: training on {len(train_records)} cases")
        auto.fit(_field_stack(train_records), checkpoint_path=out_dir / "caer.ckpt", log=log)
        log(f"autoencoder: stopped after {auto.n_iter_} epochs, loss {auto.loss_history_[-1]:.4e}")

    if "mlp" in stages:
        if auto is None:
            auto = _restore_autoencoder(train_records, out_dir, seed)
        singles, descriptors, latents = _single_latents(auto, train_records, norm.velocity_scale)
        kwargs = {} if mlp_epochs is None else {"epochs": mlp_epochs}
        mlp = LatentPredictor(seed=seed + 1, log_every=200, **kwargs)
        log(f"mlp: training on {len(singles)} descriptor/latent pairs")
        mlp.fit(descriptors, latents, log=log)
        log(f"mlp: stopped after {mlp.n_iter_} epochs, loss {mlp.loss_history_[-1]:.4e}")
        save_checkpoint(out_dir / "mlp.ckpt", mlp.params_, mlp.n_iter_, mlp.loss_history_)

    if "aggregator" in stages or stage == "bundle":
        if auto is None:
            auto = _restore_autoencoder(train_records, out_dir, seed)
        singles, _, single_latents = _single_latents(auto, train_records, norm.velocity_scale)
        by_key = {
            (
                r.spec.config,
                r.spec.left_velocity if r.spec.config == "left" else r.spec.right_velocity,
            ): z
            for r, z in zip(singles, single_latents)
        }
        duals = [r for r in train_records if r.spec.config == "dual"]
        dual_latents = auto.transform(_field_stack(duals))
        X = np.stack(
            [
                np.concatenate(
                    [by_key[("left", r.spec.left_velocity)], by_key[("right", r.spec.right_velocity)]]
                )
                for r in duals
            ]
        )
        agg = LatentAggregator(latent_shape=auto.latent_shape_, seed=seed + 2, log_every=200)
        if stage != "bundle":
            if agg_epochs is not None:
                agg.set_params(epochs=agg_epochs)
            log(f"aggregator: training on {len(duals)} latent triples")
            agg.fit(X, dual_latents, log=log)
            log(f"aggregator: finished {agg.n_iter_} epochs, loss {agg.loss_history_[-1]:.4e}")
            save_checkpoint(out_dir / "agg.ckpt", agg.params_, agg.n_iter_, agg.loss_history_)
        else:
            agg.init_random()
            epoch, history = load_checkpoint(out_dir / "agg.ckpt", agg.params_)
            agg.loss_history_, agg.n_iter_ = history, epoch

        mlp = LatentPredictor(seed=seed + 1).init_random()
        epoch, history = load_checkpoint(out_dir / "mlp.ckpt", mlp.params_)
        mlp.loss_history_, mlp.n_iter_ = history, epoch

        bundle = ModelBundle(autoencoder=auto, predictor=mlp, aggregator=agg, norm=norm)
        path = out_dir / "model.cbml"
        bundle.save(path)
        log(f"bundle written to {path}")
        return path
    return None
