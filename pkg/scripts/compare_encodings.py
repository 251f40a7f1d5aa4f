#!/usr/bin/env python3
"""Compare all four image encodings on one fixed subject split.

Prints an accelerometer / gyroscope / fusion accuracy row per encoding,
using an existing manifest or a freshly generated synthetic dataset.
"""
import argparse
import sys
import time
from pathlib import Path

from airwriting import (
    ClassifierConfig,
    EncodingConfig,
    SyntheticSpec,
    fixed_evaluate,
    generate_synthetic,
    load_manifest,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifest", help="existing manifest CSV (default: synthesize one)")
    ap.add_argument("--subjects", type=int, default=10)
    ap.add_argument("--reps", type=int, default=4)
    ap.add_argument("--train-subjects", type=int, default=7)
    ap.add_argument("--q", type=int, default=8)
    ap.add_argument("--pool-factor", type=int, default=10)
    ap.add_argument("--classifier", default="logistic", choices=("centroid", "logistic"))
    ap.add_argument("--max-epochs", type=int, default=150)
    ap.add_argument("--workdir", default="runs/compare_encodings")
    args = ap.parse_args()

    if args.manifest:
        manifest = load_manifest(args.manifest)
    else:
        spec = SyntheticSpec(n_subjects=args.subjects, n_repetitions=args.reps)
        manifest = generate_synthetic(spec, Path(args.workdir) / "data")
        print(f"synthesized {len(manifest)} recordings", file=sys.stderr)

    clf = ClassifierConfig(kind=args.classifier, max_epochs=args.max_epochs)
    print(f"{'encoding':<10} {'accel':>8} {'gyro':>8} {'fusion':>8} {'seconds':>8}")
    for method in ("ssm", "mtf", "gasf", "gadf"):
        enc = EncodingConfig(method=method, n_bins=args.q, pool_factor=args.pool_factor)
        t0 = time.perf_counter()
        report = fixed_evaluate(
            manifest, enc, clf, n_train_subjects=args.train_subjects, split_seed=0
        )
        fold = report.folds[0]
        print(f"{method:<10} {fold.accuracy_accel:>8.4f} {fold.accuracy_gyro:>8.4f} "
              f"{fold.accuracy_fused:>8.4f} {time.perf_counter() - t0:>8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
