"""Command-line entry points for the full workflow.

Subcommands: simulate, train, predict, eval, embed, serve.  Every
command exits 0 on success and nonzero with a message on stderr
otherwise; argparse itself handles unknown flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

STAGES = ("all", "autoencoder", "mlp", "aggregator", "bundle")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowsur",
        description="component-based indoor flow and temperature surrogate",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="solve the case matrix into a dataset")
    p.add_argument("--out", required=True, help="dataset output directory")
    p.add_argument("--tolerance", type=float, default=1e-5,
                   help="solver residual tolerance")

    p = sub.add_parser("train", help="train the model stages in order")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="checkpoint/model output directory")
    p.add_argument("--stage", choices=STAGES, default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=None,
                   help="override the epoch budget of the selected stage")

    p = sub.add_parser("predict", help="predict one dual-inlet scenario")
    p.add_argument("--model", required=True, help="trained model bundle")
    p.add_argument("--left", type=float, required=True, help="left inlet m/s")
    p.add_argument("--right", type=float, required=True, help="right inlet m/s")
    p.add_argument("--out", default=None,
                   help="optional .npz path for the predicted fields")

    p = sub.add_parser("eval", help="score the model against the held-out cases")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="report output directory")

    p = sub.add_parser("embed", help="export the 2D embedding of training latents")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("--model", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--static", default=None, help="static UI directory")
    p.add_argument("--config", default=None, help="JSON settings file")
    return parser


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def _cmd_simulate(args) -> int:
    from .pipeline import simulate_cases

    train_path, test_path = simulate_cases(args.out, tolerance=args.tolerance)
    print(f"wrote {train_path} and {test_path}")
    return 0


def _cmd_train(args) -> int:
    from .pipeline import train_all

    epochs = {}
    if args.epochs is not None:
        if args.stage in ("all", "bundle"):
            raise ValueError("--epochs needs a single training --stage")
        key = {"autoencoder": "caer_epochs", "mlp": "mlp_epochs",
               "aggregator": "agg_epochs"}[args.stage]
        epochs[key] = args.epochs
    train_all(args.data, args.out, stage=args.stage, seed=args.seed, **epochs)
    return 0


def _cmd_predict(args) -> int:
    from .models import ModelBundle

    path = _require_file(args.model, "model")
    bundle = ModelBundle.load(path)
    speed, temperature, elapsed_ms = bundle.predict_dual(args.left, args.right)
    print(f"left {args.left:.2f} m/s, right {args.right:.2f} m/s "
          f"-> {elapsed_ms:.1f} ms")
    print(f"velocity: min {speed.min():.4f} max {speed.max():.4f} m/s")
    print(f"temperature: min {temperature.min():.2f} max {temperature.max():.2f} degC")
    if args.out:
        np.savez(args.out, velocity=speed, temperature=temperature)
        print(f"saved {args.out}")
    return 0


def _cmd_eval(args) -> int:
    from .evaluation import evaluate_model, export_report
    from .models import ModelBundle
    from .pipeline import load_splits

    path = _require_file(args.model, "model")
    bundle = ModelBundle.load(path)
    _, test_records, _ = load_splits(args.data)
    report = evaluate_model(bundle, test_records)
    written = export_report(report, args.out)
    for case in report.cases:
        print(f"{case.label}: velocity p95 {case.velocity.stats.p95:.4f} m/s "
              f"r2 {case.velocity.r2:.4f} | temperature p95 "
              f"{case.temperature.stats.p95:.3f} degC r2 {case.temperature.r2:.4f}")
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def _cmd_embed(args) -> int:
    from .evaluation import export_embedding, tsne_embed
    from .models import ModelBundle
    from .pipeline import load_splits

    path = _require_file(args.model, "model")
    bundle = ModelBundle.load(path)
    train_records, _, _ = load_splits(args.data)
    fields = np.stack([r.fields for r in train_records])
    latents = bundle.autoencoder.transform(fields)
    labels = [r.spec.config for r in train_records]
    emb = tsne_embed(latents, labels, perplexity=5.0, seed=args.seed)
    paths = export_embedding(emb, args.out,
                             case_ids=[r.spec.label() for r in train_records])
    print(f"wrote {paths[0]} and {paths[1]}")
    return 0


def _cmd_serve(args) -> int:
    from .service import resolve_settings, serve

    settings = resolve_settings(port=args.port, model=args.model,
                                static=args.static, config_file=args.config)
    if not settings["model"]:
        raise FileNotFoundError("model not found: pass --model or set FLOWSUR_MODEL")
    _require_file(settings["model"], "model")
    serve(settings["model"], port=settings["port"], static_dir=settings["static"])
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "embed": _cmd_embed,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
