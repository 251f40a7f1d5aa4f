import pytest
from numpy.testing import assert_array_equal

from airwriting import (
    DataError,
    Manifest,
    ManifestEntry,
    SplitPlan,
    SyntheticSpec,
    fixed_subject_split,
    generate_synthetic,
    load_manifest,
    load_recording,
    loso_splits,
)
from airwriting.datasets import synth_recording, write_recording_csv

HEADER = "subject_id,label,repetition,sample_rate_hz,path"


def write_recording(path, rows=10, header=True, cols=6, value=1.0):
    names = ["ax", "ay", "az", "gx", "gy", "gz", "extra"][:cols]
    lines = [",".join(names)] if header else []
    lines += [",".join([repr(value + r * 0.5)] * cols) for r in range(rows)]
    path.write_text("\n".join(lines) + "\n")


def make_manifest_dir(tmp_path, subjects=("s00", "s01"), labels=("A",), reps=(0,)):
    rows = [HEADER]
    for s in subjects:
        for lb in labels:
            for r in reps:
                rel = f"{s}_{lb}{r}.csv"
                write_recording(tmp_path / rel)
                rows.append(f"{s},{lb},{r},62.0,{rel}")
    path = tmp_path / "manifest.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


def subjects_manifest(n_subjects, labels="ABC", reps=2, name="mem"):
    """In-memory manifest (no files) for split-logic tests."""
    entries = [
        ManifestEntry(f"s{k:02d}", lb, r, 62.0, None)
        for k in range(n_subjects)
        for lb in labels
        for r in range(reps)
    ]
    return Manifest(entries=entries, dataset_name=name)


class TestLoadManifest:
    def test_round_trip(self, tmp_path):
        path = make_manifest_dir(tmp_path, subjects=("s00", "s01", "s02"))
        manifest = load_manifest(path)
        assert len(manifest) == 3
        assert manifest.subjects() == ["s00", "s01", "s02"]
        assert manifest.dataset_name == "manifest"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text("")
        with pytest.raises(DataError, match="no entries"):
            load_manifest(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text(HEADER + "\n")
        with pytest.raises(DataError, match="no entries"):
            load_manifest(path)

    def test_missing_recording_file_named(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text(HEADER + "\ns00,A,0,62.0,ghost.csv\n")
        with pytest.raises(DataError, match="ghost.csv"):
            load_manifest(path)

    def test_duplicate_triple_reports_row(self, tmp_path):
        write_recording(tmp_path / "a.csv")
        write_recording(tmp_path / "b.csv")
        path = tmp_path / "manifest.csv"
        path.write_text(HEADER + "\ns00,A,0,62.0,a.csv\ns00,A,0,62.0,b.csv\n")
        with pytest.raises(DataError, match="row 3.*duplicate"):
            load_manifest(path)

    def test_malformed_row_reports_row(self, tmp_path):
        write_recording(tmp_path / "a.csv")
        path = tmp_path / "manifest.csv"
        path.write_text(HEADER + "\ns00,A,zero,62.0,a.csv\n")
        with pytest.raises(DataError, match="row 2"):
            load_manifest(path)


class TestLoadRecording:
    def entry(self, path):
        return ManifestEntry("s00", "A", 0, 62.0, path)

    def test_plain_csv(self, tmp_path):
        p = tmp_path / "r.csv"
        write_recording(p, rows=155, header=False)
        rec = load_recording(self.entry(p))
        assert rec.length == 155
        assert rec.samples.shape == (155, 6)

    def test_header_skipped(self, tmp_path):
        p = tmp_path / "r.csv"
        write_recording(p, rows=12, header=True)
        assert load_recording(self.entry(p)).length == 12

    def test_wrong_column_count(self, tmp_path):
        p = tmp_path / "r.csv"
        write_recording(p, rows=5, cols=7)
        with pytest.raises(DataError, match="expected 6 data columns"):
            load_recording(self.entry(p))

    def test_non_numeric_cell(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("1,2,3,4,5,6\n1,2,x,4,5,6\n")
        with pytest.raises(DataError, match="non-numeric"):
            load_recording(self.entry(p))

    def test_empty_file(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("")
        with pytest.raises(DataError, match="empty"):
            load_recording(self.entry(p))


class TestLosoSplits:
    def test_one_fold_per_subject(self):
        plans = loso_splits(subjects_manifest(20), seed=3)
        assert len(plans) == 20
        assert all(len(p.test_subjects) == 1 for p in plans)

    def test_no_leakage(self):
        for plan in loso_splits(subjects_manifest(9), seed=1):
            test = set(plan.test_subjects)
            assert not test & set(plan.train_subjects)
            assert not test & set(plan.val_subjects)

    def test_folds_partition_subjects(self):
        manifest = subjects_manifest(12)
        plans = loso_splits(manifest, seed=5)
        held_out = sorted(s for p in plans for s in p.test_subjects)
        assert held_out == manifest.subjects()

    def test_same_seed_reproduces(self):
        manifest = subjects_manifest(10)
        assert loso_splits(manifest, seed=42) == loso_splits(manifest, seed=42)
        assert loso_splits(manifest, seed=42) != loso_splits(manifest, seed=43)

    def test_val_fraction_subject_level(self):
        plans = loso_splits(subjects_manifest(20), val_fraction=0.2, seed=0)
        # 19 remaining -> round(3.8) = 4 validation subjects
        assert all(len(p.val_subjects) == 4 for p in plans)
        assert all(len(p.train_subjects) == 15 for p in plans)

    def test_single_subject_rejected(self):
        single = Manifest(entries=[ManifestEntry("s00", "A", 0, 62.0, None)], dataset_name="one")
        with pytest.raises(ValueError):
            loso_splits(single)


class TestFixedSplit:
    def test_dataset1_shaped_counts(self):
        manifest = subjects_manifest(55, labels="ABCDEFGHIJKLMNOPQRSTUVWXYZ", reps=15)
        plan = fixed_subject_split(manifest, n_train_subjects=40, val_fraction=0.2, seed=9)
        trainval = manifest.entries_for(plan.train_subjects + plan.val_subjects)
        test = manifest.entries_for(plan.test_subjects)
        assert len(trainval) == 15600
        assert len(test) == 5850
        assert len(plan.val_subjects) == 8 and len(plan.train_subjects) == 32

    def test_determinism(self):
        manifest = subjects_manifest(10)
        assert fixed_subject_split(manifest, 6, seed=2) == fixed_subject_split(manifest, 6, seed=2)

    def test_boundary_single_test_subject(self):
        plan = fixed_subject_split(subjects_manifest(5), n_train_subjects=4, seed=0)
        assert len(plan.test_subjects) == 1

    def test_insufficient_subjects(self):
        with pytest.raises(ValueError):
            fixed_subject_split(subjects_manifest(5), n_train_subjects=5)


def test_split_plan_rejects_overlap():
    with pytest.raises(ValueError, match="overlap"):
        SplitPlan(("s1",), ("s1",), ("s2",), "bad")
    with pytest.raises(ValueError, match="empty test"):
        SplitPlan(("s1",), ("s2",), (), "bad")


class TestSynthetic:
    def test_byte_identical_reruns(self, tmp_path):
        spec = SyntheticSpec(n_subjects=2, n_repetitions=1, seed=7)
        generate_synthetic(spec, tmp_path / "one")
        generate_synthetic(spec, tmp_path / "two")
        for p in sorted((tmp_path / "one").rglob("*.csv")):
            twin = tmp_path / "two" / p.relative_to(tmp_path / "one")
            assert p.read_bytes() == twin.read_bytes()

    def test_count(self, tmp_path):
        manifest = generate_synthetic(SyntheticSpec(n_subjects=3, n_repetitions=2, seed=1), tmp_path)
        assert len(manifest) == 3 * 26 * 2

    def test_clean_recordings_identical_up_to_length(self):
        spec = SyntheticSpec(n_subjects=2, n_repetitions=2, seed=5, noise_scale=0.0, subject_jitter=0.0)
        a = synth_recording(spec, 0, 3, 0)
        b = synth_recording(spec, 1, 3, 1)
        n = min(a.length, b.length)
        assert_array_equal(a.samples[:n], b.samples[:n])

    def test_lengths_within_bounds(self):
        spec = SyntheticSpec(n_subjects=4, n_repetitions=2, seed=3)
        lengths = {synth_recording(spec, s, c, r).length for s in range(4) for c in (0, 25) for r in range(2)}
        assert all(120 <= n <= 190 for n in lengths)
        assert len(lengths) > 1

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(n_subjects=1)
        with pytest.raises(ValueError):
            SyntheticSpec(noise_scale=-0.1)

    def test_loadable_round_trip(self, tmp_path):
        manifest = generate_synthetic(SyntheticSpec(n_subjects=2, n_repetitions=1, seed=2), tmp_path)
        rec = load_recording(manifest.entries[0])
        reread = load_recording(manifest.entries[0])
        assert_array_equal(rec.samples, reread.samples)
        assert 120 <= rec.length <= 190


def test_write_recording_csv_round_trip(tmp_path, rng):
    samples = rng.normal(size=(30, 6))
    path = tmp_path / "rec.csv"
    write_recording_csv(samples, path)
    rec = load_recording(ManifestEntry("s00", "A", 0, 62.0, path))
    assert_array_equal(rec.samples, samples)
