"""End-to-end evaluation: preprocess, encode, pool, train per-sensor models,
fuse posteriors, and aggregate accuracies over split plans.

Folds are pure functions of (manifest, plan, configs), so they can run in
any order or concurrently; the report is always assembled in plan order.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classify
from .classify import LETTERS, N_CLASSES, LogisticConfig
from .datasets import Manifest, SplitPlan, fixed_subject_split, load_recording, loso_splits
from .encoders import DEFAULT_Q, GADF, METHODS, encode_stack
from .signals import preprocess


@dataclass
class EncodingConfig:
    method: str = GADF
    n_bins: int = DEFAULT_Q
    pool_factor: int = classify.DEFAULT_POOL_FACTOR
    target_len: int = 155
    target_hz: float | None = 62.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")


@dataclass
class ClassifierConfig:
    kind: str = "logistic"
    temperature: float = 1.0
    step: float = 0.1
    l2: float = 1e-4
    max_epochs: int = 2000
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("centroid", "logistic"):
            raise ValueError(f"classifier kind must be 'centroid' or 'logistic', got {self.kind!r}")

    def logistic(self) -> LogisticConfig:
        return LogisticConfig(
            step=self.step,
            l2=self.l2,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.seed,
        )


@dataclass
class FeatureTable:
    """Pooled per-recording features for both sensors, aligned to manifest order."""

    accel: np.ndarray  # (n, D)
    gyro: np.ndarray  # (n, D)
    labels: np.ndarray  # (n,) class indices
    subjects: np.ndarray  # (n,) subject ids
    repetitions: np.ndarray  # (n,)
    pool_factor: int

    def mask_for(self, subjects) -> np.ndarray:
        return np.isin(self.subjects, list(subjects))


def compute_features(manifest: Manifest, enc: EncodingConfig, entries=None) -> FeatureTable:
    """Load, preprocess, encode, and pool every recording (pure per recording)."""
    entries = manifest.entries if entries is None else entries
    feats_a, feats_g, labels, subjects, reps = [], [], [], [], []
    for entry in entries:
        rec = load_recording(entry)
        accel, gyro = preprocess(rec, target_len=enc.target_len, target_hz=enc.target_hz)
        for ch, out in ((accel, feats_a), (gyro, feats_g)):
            stack = encode_stack(ch, enc.method, enc.n_bins)
            out.append(classify.pool_features(stack, enc.pool_factor).x)
        labels.append(classify.label_index(entry.label))
        subjects.append(entry.subject_id)
        reps.append(entry.repetition)
    return FeatureTable(
        accel=np.stack(feats_a),
        gyro=np.stack(feats_g),
        labels=np.array(labels),
        subjects=np.array(subjects),
        repetitions=np.array(reps),
        pool_factor=enc.pool_factor,
    )


@dataclass
class RecordOutcome:
    subject_id: str
    repetition: int
    true_label: str
    p_accel: np.ndarray
    p_gyro: np.ndarray
    p_fused: np.ndarray
    predicted: str


@dataclass
class FoldResult:
    fold_id: str
    records: list[RecordOutcome]
    accuracy_accel: float
    accuracy_gyro: float
    accuracy_fused: float

    @property
    def n_test(self) -> int:
        return len(self.records)


@dataclass
class EvaluationReport:
    folds: list[FoldResult]
    failures: list[tuple[str, str]]
    mean_accel: float
    mean_gyro: float
    mean_fused: float
    std_fused: float
    recording_weighted_fused: float
    confusion_counts: np.ndarray  # (26, 26), rows = true class
    config: dict[str, object] = field(default_factory=dict)


def _fit_sensor_model(x, y, x_val, y_val, clf: ClassifierConfig, pool_factor: int):
    if clf.kind == "centroid":
        pairs = [(classify.FeatureVector(x=row, pool_factor=pool_factor), LETTERS[c]) for row, c in zip(x, y)]
        return classify.fit_centroid(pairs, temperature=clf.temperature)
    return classify.fit_logistic_arrays(x, y, x_val, y_val, clf.logistic(), pool_factor)


def run_fold(
    plan: SplitPlan,
    manifest: Manifest,
    enc: EncodingConfig,
    clf: ClassifierConfig,
    features: FeatureTable | None = None,
    permute_seed: int | None = None,
) -> FoldResult:
    """
    Train a SensorModelPair on the plan's train/val subjects and score the
    test subjects. permute_seed, if given, shuffles the training and
    validation labels (chance-level control run).
    """
    plan_subjects = set(plan.train_subjects) | set(plan.val_subjects) | set(plan.test_subjects)
    missing = plan_subjects - set(manifest.subjects())
    if missing:
        raise ValueError(f"fold {plan.fold_id}: subjects not in manifest: {sorted(missing)}")
    if features is None:
        features = compute_features(manifest, enc, manifest.entries_for(plan_subjects))
    train_m = features.mask_for(plan.train_subjects)
    val_m = features.mask_for(plan.val_subjects)
    test_m = features.mask_for(plan.test_subjects)
    if not test_m.any():
        raise ValueError(f"fold {plan.fold_id}: empty test set")
    # leakage guard: a test recording must never reach training or validation
    assert not (test_m & (train_m | val_m)).any()

    y_train = features.labels[train_m]
    y_val = features.labels[val_m]
    if permute_seed is not None:
        rng = np.random.default_rng([permute_seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(plan.fold_id.encode())])
        y_train = y_train[rng.permutation(len(y_train))]
        y_val = y_val[rng.permutation(len(y_val))]

    models = {}
    for sensor, x_all in (("accel", features.accel), ("gyro", features.gyro)):
        models[sensor] = _fit_sensor_model(
            x_all[train_m], y_train, x_all[val_m] if val_m.any() else None,
            y_val if val_m.any() else None, clf, features.pool_factor,
        )
    pair = classify.SensorModelPair(accel=models["accel"], gyro=models["gyro"])

    p_a = pair.accel.proba_matrix(features.accel[test_m])
    p_g = pair.gyro.proba_matrix(features.gyro[test_m])
    p_f = (p_a + p_g) / 2.0
    y_test = features.labels[test_m]
    pred_a, pred_g, pred_f = (np.argmax(p, axis=1) for p in (p_a, p_g, p_f))
    records = [
        RecordOutcome(
            subject_id=str(s),
            repetition=int(r),
            true_label=LETTERS[t],
            p_accel=p_a[i],
            p_gyro=p_g[i],
            p_fused=p_f[i],
            predicted=LETTERS[pred_f[i]],
        )
        for i, (s, r, t) in enumerate(
            zip(features.subjects[test_m], features.repetitions[test_m], y_test)
        )
    ]
    return FoldResult(
        fold_id=plan.fold_id,
        records=records,
        accuracy_accel=float((pred_a == y_test).mean()),
        accuracy_gyro=float((pred_g == y_test).mean()),
        accuracy_fused=float((pred_f == y_test).mean()),
    )


def _aggregate(plans, outcomes, config) -> EvaluationReport:
    folds, failures = [], []
    for plan, outcome in zip(plans, outcomes):
        if isinstance(outcome, FoldResult):
            folds.append(outcome)
        else:
            failures.append((plan.fold_id, str(outcome)))
    if folds:
        acc_a = np.array([f.accuracy_accel for f in folds])
        acc_g = np.array([f.accuracy_gyro for f in folds])
        acc_f = np.array([f.accuracy_fused for f in folds])
        n_correct = sum(sum(r.predicted == r.true_label for r in f.records) for f in folds)
        n_records = sum(f.n_test for f in folds)
        mean_a, mean_g, mean_f = acc_a.mean(), acc_g.mean(), acc_f.mean()
        std_f = acc_f.std()
        weighted = n_correct / n_records
    else:
        mean_a = mean_g = mean_f = std_f = weighted = float("nan")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for fold in folds:
        for rec in fold.records:
            counts[classify.label_index(rec.true_label), classify.label_index(rec.predicted)] += 1
    return EvaluationReport(
        folds=folds,
        failures=failures,
        mean_accel=float(mean_a),
        mean_gyro=float(mean_g),
        mean_fused=float(mean_f),
        std_fused=float(std_f),
        recording_weighted_fused=float(weighted),
        confusion_counts=counts,
        config=dict(config),
    )


def _run_plans(plans, manifest, enc, clf, workers, permute_seed, config) -> EvaluationReport:
    features = compute_features(manifest, enc)

    def one(plan):
        try:
            return run_fold(plan, manifest, enc, clf, features=features, permute_seed=permute_seed)
        except Exception as exc:  # recorded per fold, not fatal
            return exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, plans))
    else:
        outcomes = [one(plan) for plan in plans]
    return _aggregate(plans, outcomes, config)


def loso_evaluate(
    manifest: Manifest,
    enc: EncodingConfig,
    clf: ClassifierConfig,
    val_fraction: float = 0.2,
    split_seed: int = 0,
    workers: int = 1,
    permute_seed: int | None = None,
) -> EvaluationReport:
    """Leave-one-subject-out evaluation over every subject in the manifest."""
    plans = loso_splits(manifest, val_fraction=val_fraction, seed=split_seed)
    config = _config_echo("loso", manifest, enc, clf, val_fraction, split_seed, workers, permute_seed)
    config["n_folds"] = len(plans)
    return _run_plans(plans, manifest, enc, clf, workers, permute_seed, config)


def fixed_evaluate(
    manifest: Manifest,
    enc: EncodingConfig,
    clf: ClassifierConfig,
    n_train_subjects: int = 40,
    val_fraction: float = 0.2,
    split_seed: int = 0,
    permute_seed: int | None = None,
) -> EvaluationReport:
    """Single-fold evaluation with a fixed seeded subject split."""
    plan = fixed_subject_split(
        manifest, n_train_subjects=n_train_subjects, val_fraction=val_fraction, seed=split_seed
    )
    config = _config_echo("fixed", manifest, enc, clf, val_fraction, split_seed, 1, permute_seed)
    config["n_train_subjects"] = n_train_subjects
    return _run_plans([plan], manifest, enc, clf, 1, permute_seed, config)


def _config_echo(mode, manifest, enc, clf, val_fraction, split_seed, workers, permute_seed):
    return {
        "mode": mode,
        "dataset": manifest.dataset_name,
        "n_subjects": len(manifest.subjects()),
        "n_recordings": len(manifest),
        "encoding_method": enc.method,
        "n_bins": enc.n_bins,
        "pool_factor": enc.pool_factor,
        "target_len": enc.target_len,
        "target_hz": enc.target_hz,
        "classifier": clf.kind,
        "temperature": clf.temperature,
        "step": clf.step,
        "l2": clf.l2,
        "max_epochs": clf.max_epochs,
        "patience": clf.patience,
        "model_seed": clf.seed,
        "split_seed": split_seed,
        "val_fraction": val_fraction,
        "workers": workers,
        "permute_seed": permute_seed,
    }


def confusion(report: EvaluationReport) -> tuple[np.ndarray, np.ndarray]:
    """Confusion counts recomputed from the per-record logs, plus a row-normalized copy."""
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for fold in report.folds:
        for rec in fold.records:
            counts[classify.label_index(rec.true_label), classify.label_index(rec.predicted)] += 1
    normalized = np.zeros((N_CLASSES, N_CLASSES))
    row_sums = counts.sum(axis=1)
    nonzero = row_sums > 0
    normalized[nonzero] = counts[nonzero] / row_sums[nonzero, None]
    return counts, normalized


def emit_report(report: EvaluationReport, out_dir) -> None:
    """
    Write summary.csv (per-fold + aggregate accuracies), confusion.csv,
    aggregate.txt, and config.txt. Deterministic bytes for identical reports.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lines = ["fold_id,n_test,acc_accel,acc_gyro,acc_fused"]
    for fold in report.folds:
        lines.append(
            f"{fold.fold_id},{fold.n_test},{fold.accuracy_accel!r},"
            f"{fold.accuracy_gyro!r},{fold.accuracy_fused!r}"
        )
    total = sum(f.n_test for f in report.folds)
    lines.append(
        f"mean,{total},{report.mean_accel!r},{report.mean_gyro!r},{report.mean_fused!r}"
    )
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")

    rows = [",".join(LETTERS)]
    rows.extend(",".join(str(int(v)) for v in row) for row in report.confusion_counts)
    (out_dir / "confusion.csv").write_text("\n".join(rows) + "\n")

    agg = {
        "n_folds": len(report.folds),
        "n_failed": len(report.failures),
        "failed_folds": ";".join(fid for fid, _ in report.failures),
        "n_records": total,
        "mean_acc_accel": repr(report.mean_accel),
        "mean_acc_gyro": repr(report.mean_gyro),
        "mean_acc_fused": repr(report.mean_fused),
        "std_acc_fused": repr(report.std_fused),
        "recording_weighted_acc_fused": repr(report.recording_weighted_fused),
    }
    (out_dir / "aggregate.txt").write_text("".join(f"{k}={v}\n" for k, v in agg.items()))

    echo = "".join(f"{k}={report.config[k]}\n" for k in sorted(report.config))
    (out_dir / "config.txt").write_text(echo)
