"""Command-line entry point.

Subcommands: synth, encode, split, eval, export-png.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Progress goes to stderr; data only to files (and stdout where noted).
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .datasets import (
    DataError,
    SyntheticSpec,
    fixed_subject_split,
    generate_synthetic,
    load_manifest,
    load_recording,
    loso_splits,
    write_split_plans,
)
from .encoders import DEFAULT_Q, METHODS, encode_stack
from .evaluate import ClassifierConfig, EncodingConfig, emit_report, fixed_evaluate, loso_evaluate
from .image_io import export_image_png, export_image_raw, import_image_raw
from .encoders import EncodedImage
from .signals import preprocess

USAGE_EXIT = 1
DATA_EXIT = 2
INTERNAL_EXIT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _echo_args(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_config(out_dir: Path, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.txt").write_text("".join(f"{k}={v}\n" for k, v in sorted(config.items())))


def _positive_int(minimum: int, name: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be at least {minimum}")
        return value

    return parse


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_subjects=args.subjects,
        n_repetitions=args.reps,
        seed=args.seed,
        class_separation=args.separation,
        noise_scale=args.noise,
        subject_jitter=args.jitter,
    )
    out = Path(args.out)
    manifest = generate_synthetic(spec, out)
    _write_config(out, {"subcommand": "synth", **_echo_args(args)})
    _log(f"synth: wrote {len(manifest)} recordings under {out}")
    print(out / "manifest.csv")
    return 0


def cmd_encode(args) -> int:
    manifest = load_manifest(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, {"subcommand": "encode", **_echo_args(args)})
    for i, entry in enumerate(manifest.entries):
        rec = load_recording(entry)
        accel, gyro = preprocess(rec, target_len=args.target_len, target_hz=args.target_hz)
        stem = f"{entry.subject_id}_{entry.label}{entry.repetition:02d}"
        for ch, suffix in ((accel, "accel"), (gyro, "gyro")):
            stack = encode_stack(ch, args.method, args.q)
            export_image_raw(stack, out / f"{stem}_{suffix}.imair")
        if (i + 1) % 500 == 0:
            _log(f"encode: {i + 1}/{len(manifest)} recordings done")
    _log(f"encode: wrote {2 * len(manifest)} image files to {out}")
    return 0


def cmd_split(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.mode == "loso":
        plans = loso_splits(manifest, val_fraction=args.val_fraction, seed=args.seed)
    else:
        plans = [
            fixed_subject_split(
                manifest,
                n_train_subjects=args.train_subjects,
                val_fraction=args.val_fraction,
                seed=args.seed,
            )
        ]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_split_plans(plans, out / "splits.csv")
    _write_config(out, {"subcommand": "split", **_echo_args(args)})
    _log(f"split: wrote {len(plans)} fold(s) to {out / 'splits.csv'}")
    return 0


def cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    enc = EncodingConfig(
        method=args.method,
        n_bins=args.q,
        pool_factor=args.pool_factor,
        target_len=args.target_len,
        target_hz=args.target_hz,
    )
    clf = ClassifierConfig(
        kind=args.classifier,
        temperature=args.temperature,
        step=args.step,
        l2=args.l2,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.model_seed,
    )
    if args.mode == "loso":
        report = loso_evaluate(
            manifest,
            enc,
            clf,
            val_fraction=args.val_fraction,
            split_seed=args.seed,
            workers=args.workers,
            permute_seed=args.permute_labels,
        )
    else:
        report = fixed_evaluate(
            manifest,
            enc,
            clf,
            n_train_subjects=args.train_subjects,
            val_fraction=args.val_fraction,
            split_seed=args.seed,
            permute_seed=args.permute_labels,
        )
    emit_report(report, args.out)
    for fold in report.folds:
        _log(f"eval: {fold.fold_id}: n={fold.n_test} fused={fold.accuracy_fused:.4f}")
    for fold_id, message in report.failures:
        _log(f"eval: {fold_id}: FAILED: {message}")
    _log(f"eval: mean fused accuracy {report.mean_fused:.4f} over {len(report.folds)} fold(s)")
    print(report.mean_fused)
    return 0


def cmd_export_png(args) -> int:
    channels = import_image_raw(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    for c, pixels in enumerate(channels):
        img = EncodedImage(pixels=pixels, method=args.method)
        export_image_png(img, out / f"{stem}_c{c}.png")
    _write_config(out, {"subcommand": "export-png", **_echo_args(args)})
    _log(f"export-png: wrote {len(channels)} channel(s) to {out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="airwriting", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a deterministic synthetic dataset")
    p.add_argument("--subjects", type=_positive_int(2, "--subjects"), default=20)
    p.add_argument("--reps", type=_positive_int(1, "--reps"), default=10)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--jitter", type=float, default=0.8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="encode every recording as raw image stacks")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", choices=METHODS, default="gadf")
    p.add_argument("--q", type=_positive_int(2, "--q"), default=DEFAULT_Q)
    p.add_argument("--target-len", type=_positive_int(1, "--target-len"), default=155)
    p.add_argument("--target-hz", type=float, default=62.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("split", help="write train/val/test subject splits")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("fixed", "loso"), default="loso")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--train-subjects", type=_positive_int(1, "--train-subjects"), default=40)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("eval", help="run a full evaluation and write report files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("fixed", "loso"), default="loso")
    p.add_argument("--method", choices=METHODS, default="gadf")
    p.add_argument("--q", type=_positive_int(2, "--q"), default=DEFAULT_Q)
    p.add_argument("--pool-factor", type=_positive_int(1, "--pool-factor"), default=5)
    p.add_argument("--target-len", type=_positive_int(1, "--target-len"), default=155)
    p.add_argument("--target-hz", type=float, default=62.0)
    p.add_argument("--classifier", choices=("centroid", "logistic"), default="logistic")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--max-epochs", type=_positive_int(1, "--max-epochs"), default=2000)
    p.add_argument("--patience", type=_positive_int(1, "--patience"), default=10)
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=0, help="split seed")
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--train-subjects", type=_positive_int(1, "--train-subjects"), default=40)
    p.add_argument("--workers", type=_positive_int(1, "--workers"), default=os.cpu_count() or 1)
    p.add_argument("--permute-labels", type=int, default=None, metavar="SEED",
                   help="permute train/val labels (chance-level control)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-png", help="convert a raw image file to grayscale PNGs")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=METHODS, default="gadf",
                   help="method recorded in the PNG sidecar")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_png)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for key, value in _echo_args(args).items():
        _log(f"config {key}={value}")
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        _log(f"error: {exc}")
        return DATA_EXIT
    except (ValueError, RuntimeError) as exc:
        _log(f"error: {exc}")
        return DATA_EXIT
    except Exception as exc:  # pragma: no cover - unexpected
        _log(f"internal error: {type(exc).__name__}: {exc}")
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
