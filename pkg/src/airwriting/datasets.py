"""Manifest and recording I/O, evaluation splits, and synthetic dataset generation.

On-disk formats:
  manifest CSV   header `subject_id,label,repetition,sample_rate_hz,path`,
                 paths relative to the manifest's directory
  recording CSV  6 numeric columns ax,ay,az,gx,gy,gz, optional single header
                 row (detected by a non-numeric first cell)
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .signals import RawRecording

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
SYNTH_RATE_HZ = 62.0

MANIFEST_COLUMNS = ["subject_id", "label", "repetition", "sample_rate_hz", "path"]
RECORDING_COLUMNS = ["ax", "ay", "az", "gx", "gy", "gz"]


class DataError(Exception):
    """Malformed or inconsistent on-disk data."""


@dataclass
class ManifestEntry:
    subject_id: str
    label: str
    repetition: int
    sample_rate_hz: float
    path: Path  # resolved at load time


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    dataset_name: str

    def subjects(self) -> list[str]:
        return sorted({e.subject_id for e in self.entries})

    def entries_for(self, subjects) -> list[ManifestEntry]:
        wanted = set(subjects)
        return [e for e in self.entries if e.subject_id in wanted]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class SplitPlan:
    """Subject-disjoint train/validation/test assignment for one fold."""

    train_subjects: tuple[str, ...]
    val_subjects: tuple[str, ...]
    test_subjects: tuple[str, ...]
    fold_id: str

    def __post_init__(self):
        train, val, test = map(set, (self.train_subjects, self.val_subjects, self.test_subjects))
        if train & val or train & test or val & test:
            raise ValueError(f"fold {self.fold_id}: overlapping subject sets")
        if not test:
            raise ValueError(f"fold {self.fold_id}: empty test set")


def load_manifest(path) -> Manifest:
    """Parse and validate a manifest CSV; every referenced recording must exist."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    root = path.parent
    entries: list[ManifestEntry] = []
    seen: dict[tuple, int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: no entries") from None
        if [h.strip() for h in header] != MANIFEST_COLUMNS:
            raise DataError(f"{path}: row 1: expected header {','.join(MANIFEST_COLUMNS)}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise DataError(f"{path}: row {row_no}: expected 5 columns, got {len(row)}")
            subject, label, rep_s, rate_s, rel = (c.strip() for c in row)
            try:
                rep = int(rep_s)
                rate = float(rate_s)
            except ValueError:
                raise DataError(f"{path}: row {row_no}: bad repetition or sample rate") from None
            key = (subject, label, rep)
            if key in seen:
                raise DataError(
                    f"{path}: row {row_no}: duplicate (subject,label,repetition) "
                    f"{key}, first seen at row {seen[key]}"
                )
            seen[key] = row_no
            rec_path = (root / rel).resolve()
            if not rec_path.is_file():
                raise DataError(f"{path}: row {row_no}: recording file missing: {rec_path}")
            entries.append(ManifestEntry(subject, label, rep, rate, rec_path))
    if not entries:
        raise DataError(f"{path}: no entries")
    return Manifest(entries=entries, dataset_name=path.stem)


def load_recording(entry: ManifestEntry) -> RawRecording:
    """Read one recording CSV into a RawRecording."""
    try:
        with open(entry.path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {entry.path}: {exc}") from exc
    if lines:
        first = lines[0].split(",")[0].strip()
        try:
            float(first)
        except ValueError:
            lines = lines[1:]  # header row
    rows = [ln for ln in lines if ln.strip()]
    if not rows:
        raise DataError(f"{entry.path}: empty recording file")
    try:
        data = np.array([ln.split(",") for ln in rows], dtype=float)
    except ValueError as exc:
        raise DataError(f"{entry.path}: non-numeric cell: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 6:
        raise DataError(f"{entry.path}: expected 6 data columns, got {data.shape[1] if data.ndim == 2 else 1}")
    if not np.isfinite(data).all():
        raise DataError(f"{entry.path}: non-finite sample values")
    return RawRecording(
        samples=data,
        subject_id=entry.subject_id,
        label=entry.label,
        repetition=entry.repetition,
        sample_rate_hz=entry.sample_rate_hz,
    )


def _mask_seed(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def _n_val_subjects(n_pool: int, val_fraction: float) -> int:
    if not 0.0 <= val_fraction < 1.0:
        raise ValueError("val_fraction must be in [0, 1)")
    n_val = int(math.floor(val_fraction * n_pool + 0.5))
    return min(n_val, n_pool - 1)  # keep at least one training subject


def loso_splits(manifest: Manifest, val_fraction: float = 0.2, seed: int = 0) -> list[SplitPlan]:
    """
    One leave-one-subject-out fold per subject.

    The held-out subject is the whole test set; the rest are shuffled with a
    fold-specific seeded generator and split subject-level into train/val.
    """
    subjects = manifest.subjects()
    if len(subjects) < 2:
        raise ValueError("LOSO needs at least 2 subjects")
    plans = []
    for k, held_out in enumerate(subjects):
        rest = [s for s in subjects if s != held_out]
        rng = np.random.default_rng([_mask_seed(seed), k])
        perm = list(rng.permutation(rest))
        n_val = _n_val_subjects(len(rest), val_fraction)
        plans.append(
            SplitPlan(
                train_subjects=tuple(sorted(perm[n_val:])),
                val_subjects=tuple(sorted(perm[:n_val])),
                test_subjects=(held_out,),
                fold_id=f"loso_{held_out}",
            )
        )
    return plans


def fixed_subject_split(
    manifest: Manifest,
    n_train_subjects: int = 40,
    val_fraction: float = 0.2,
    seed: int = 0,
) -> SplitPlan:
    """
    Seeded subject shuffle; the first n_train_subjects form train+val
    (subject-level split at val_fraction), the remainder form the test set.
    """
    subjects = manifest.subjects()
    if len(subjects) <= n_train_subjects:
        raise ValueError(
            f"need more than {n_train_subjects} subjects for a fixed split, have {len(subjects)}"
        )
    if n_train_subjects < 1:
        raise ValueError("n_train_subjects must be positive")
    rng = np.random.default_rng([_mask_seed(seed)])
    perm = list(rng.permutation(subjects))
    pool, test = perm[:n_train_subjects], perm[n_train_subjects:]
    n_val = _n_val_subjects(len(pool), val_fraction)
    return SplitPlan(
        train_subjects=tuple(sorted(pool[n_val:])),
        val_subjects=tuple(sorted(pool[:n_val])),
        test_subjects=tuple(sorted(test)),
        fold_id="fixed",
    )


def write_split_plans(plans: list[SplitPlan], path) -> None:
    """Write plans as a CSV with columns fold_id,role,subject_id."""
    out = ["fold_id,role,subject_id"]
    for plan in plans:
        for role, subjects in (
            ("train", plan.train_subjects),
            ("val", plan.val_subjects),
            ("test", plan.test_subjects),
        ):
            out.extend(f"{plan.fold_id},{role},{s}" for s in subjects)
    Path(path).write_text("\n".join(out) + "\n")


@dataclass
class SyntheticSpec:
    """Parameters for the deterministic synthetic letter dataset.

    Each class is a template of 3 random-frequency sinusoids per channel,
    evaluated on an absolute 62 Hz time grid so that two recordings of one
    class are prefix-identical up to their drawn lengths. Recordings add a
    per-subject slow sinusoid (subject_jitter) and white noise (noise_scale).
    """

    n_subjects: int = 20
    n_repetitions: int = 10
    seed: int = 7
    class_separation: float = 1.0
    noise_scale: float = 1.0
    subject_jitter: float = 0.8

    def __post_init__(self):
        if self.n_subjects < 2:
            raise ValueError("n_subjects must be at least 2")
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be at least 1")
        if self.class_separation <= 0:
            raise ValueError("class_separation must be positive")
        if self.noise_scale < 0 or self.subject_jitter < 0:
            raise ValueError("noise_scale and subject_jitter must be non-negative")


MIN_SYNTH_LEN = 120
MAX_SYNTH_LEN = 190

_N_TEMPLATE_WAVES = 3
_N_JITTER_WAVES = 2


def _class_params(seed: int, class_idx: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0, class_idx])
    freq = rng.uniform(0.4, 5.0, size=(6, _N_TEMPLATE_WAVES))
    amp = rng.uniform(0.5, 1.5, size=(6, _N_TEMPLATE_WAVES))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(6, _N_TEMPLATE_WAVES))
    return np.stack([freq, amp, phase])


def _subject_params(seed: int, subject_idx: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 1, subject_idx])
    freq = rng.uniform(0.1, 0.8, size=(6, _N_JITTER_WAVES))
    amp = rng.uniform(0.5, 1.5, size=(6, _N_JITTER_WAVES))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(6, _N_JITTER_WAVES))
    return np.stack([freq, amp, phase])


def _wave_sum(params: np.ndarray, t: np.ndarray) -> np.ndarray:
    freq, amp, phase = params
    # (L, 6): sum the component sinusoids per channel
    arg = 2.0 * np.pi * freq[None, :, :] * t[:, None, None] + phase[None, :, :]
    return (amp[None, :, :] * np.sin(arg)).sum(axis=2)


def synth_recording(spec: SyntheticSpec, subject_idx: int, class_idx: int, rep: int) -> RawRecording:
    """Generate one synthetic recording; pure function of (spec, indices)."""
    seed = _mask_seed(spec.seed)
    rng = np.random.default_rng([seed, 2, subject_idx, class_idx, rep])
    length = int(rng.integers(MIN_SYNTH_LEN, MAX_SYNTH_LEN + 1))
    t = np.arange(length) / SYNTH_RATE_HZ
    samples = spec.class_separation * _wave_sum(_class_params(seed, class_idx), t)
    if spec.subject_jitter > 0:
        samples = samples + spec.subject_jitter * _wave_sum(_subject_params(seed, subject_idx), t)
    if spec.noise_scale > 0:
        samples = samples + spec.noise_scale * rng.standard_normal((length, 6))
    return RawRecording(
        samples=samples,
        subject_id=f"s{subject_idx:02d}",
        label=LETTERS[class_idx],
        repetition=rep,
        sample_rate_hz=SYNTH_RATE_HZ,
    )


def write_recording_csv(samples: np.ndarray, path) -> None:
    lines = [",".join(RECORDING_COLUMNS)]
    lines.extend(",".join(repr(float(x)) for x in row) for row in samples)
    Path(path).write_text("\n".join(lines) + "\n")


def generate_synthetic(spec: SyntheticSpec, out_dir) -> Manifest:
    """
    Write a full synthetic dataset (recordings + manifest.csv) under out_dir.

    Deterministic: the same spec always produces byte-identical files.
    Returns the manifest, already validated via load_manifest.
    """
    out_dir = Path(out_dir)
    rec_dir = out_dir / "recordings"
    try:
        rec_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out_dir}: {exc}") from exc
    rows = []
    for s in range(spec.n_subjects):
        subject = f"s{s:02d}"
        subject_dir = rec_dir / subject
        subject_dir.mkdir(exist_ok=True)
        for c, letter in enumerate(LETTERS):
            for rep in range(spec.n_repetitions):
                rec = synth_recording(spec, s, c, rep)
                rel = f"recordings/{subject}/{letter}{rep:02d}.csv"
                write_recording_csv(rec.samples, out_dir / rel)
                rows.append(f"{subject},{letter},{rep},{SYNTH_RATE_HZ!r},{rel}")
    manifest_path = out_dir / "manifest.csv"
    manifest_path.write_text(",".join(MANIFEST_COLUMNS) + "\n" + "\n".join(rows) + "\n")
    return load_manifest(manifest_path)
