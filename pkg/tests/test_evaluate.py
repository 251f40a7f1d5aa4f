import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from airwriting import (
    ClassifierConfig,
    EncodingConfig,
    Manifest,
    SyntheticSpec,
    compute_features,
    confusion,
    emit_report,
    fixed_evaluate,
    fixed_subject_split,
    generate_synthetic,
    loso_evaluate,
    loso_splits,
    run_fold,
)

FAST_ENC = EncodingConfig(method="gadf", pool_factor=31)
CENTROID = ClassifierConfig(kind="centroid")


@pytest.fixture(scope="module")
def clean_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("clean_synth")
    spec = SyntheticSpec(n_subjects=3, n_repetitions=2, seed=21, noise_scale=0.0, subject_jitter=0.0)
    return generate_synthetic(spec, out)


@pytest.fixture(scope="module")
def wide_dataset(tmp_path_factory):
    """14 subjects so a fixed split can hold >= 500 test recordings."""
    out = tmp_path_factory.mktemp("wide_synth")
    spec = SyntheticSpec(n_subjects=14, n_repetitions=2, seed=31)
    return generate_synthetic(spec, out)


class TestRunFold:
    def test_clean_dataset_perfect_fusion(self, clean_dataset):
        plan = fixed_subject_split(clean_dataset, n_train_subjects=2, seed=0)
        result = run_fold(plan, clean_dataset, FAST_ENC, CENTROID)
        assert result.accuracy_fused == 1.0
        assert result.n_test == 52

    def test_accuracy_matches_recount(self, clean_dataset):
        plan = fixed_subject_split(clean_dataset, n_train_subjects=2, seed=0)
        result = run_fold(plan, clean_dataset, FAST_ENC, CENTROID)
        recount = sum(r.predicted == r.true_label for r in result.records) / result.n_test
        assert result.accuracy_fused == recount

    def test_permuted_labels_hit_chance_level(self, wide_dataset):
        # predictions inside one true class are correlated, so average the
        # control over a few permutations instead of trusting a single draw
        plan = fixed_subject_split(wide_dataset, n_train_subjects=4, seed=1)
        features = compute_features(wide_dataset, FAST_ENC)
        results = [
            run_fold(plan, wide_dataset, FAST_ENC, CENTROID, features=features, permute_seed=s)
            for s in range(5)
        ]
        assert all(r.n_test >= 500 for r in results)
        assert abs(np.mean([r.accuracy_fused for r in results]) - 1 / 26) <= 0.05

    def test_posteriors_are_simplex_rows(self, clean_dataset):
        plan = fixed_subject_split(clean_dataset, n_train_subjects=2, seed=0)
        result = run_fold(plan, clean_dataset, FAST_ENC, CENTROID)
        for rec in result.records[:10]:
            for p in (rec.p_accel, rec.p_gyro, rec.p_fused):
                assert_allclose(p.sum(), 1.0, atol=1e-9)
                assert (p >= 0).all()
            assert_array_equal(rec.p_fused, (rec.p_accel + rec.p_gyro) / 2)


class TestLoso:
    def test_fold_count_and_mean(self, small_dataset):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        assert len(report.folds) == 6
        per_fold = [f.accuracy_fused for f in report.folds]
        assert_allclose(report.mean_fused, np.mean(per_fold), atol=1e-12)
        assert_allclose(report.std_fused, np.std(per_fold), atol=1e-12)

    def test_recording_weighted_mean(self, small_dataset):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        correct = sum(
            sum(r.predicted == r.true_label for r in f.records) for f in report.folds
        )
        total = sum(f.n_test for f in report.folds)
        assert report.recording_weighted_fused == correct / total

    def test_fold_order_invariance(self, small_dataset):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        plans = loso_splits(manifest, seed=0)
        features = compute_features(manifest, FAST_ENC)
        reversed_results = {
            plan.fold_id: run_fold(plan, manifest, FAST_ENC, CENTROID, features=features)
            for plan in reversed(plans)
        }
        for fold in report.folds:
            twin = reversed_results[fold.fold_id]
            assert fold.accuracy_fused == twin.accuracy_fused
            assert [r.predicted for r in fold.records] == [r.predicted for r in twin.records]

    def test_workers_do_not_change_results(self, small_dataset):
        manifest, _, _ = small_dataset
        seq = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0, workers=1)
        par = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0, workers=2)
        assert [f.accuracy_fused for f in seq.folds] == [f.accuracy_fused for f in par.folds]
        assert_array_equal(seq.confusion_counts, par.confusion_counts)

    def test_no_subject_leakage_in_any_fold(self, small_dataset):
        manifest, _, _ = small_dataset
        for plan in loso_splits(manifest, seed=4):
            test = set(plan.test_subjects)
            assert not test & set(plan.train_subjects)
            assert not test & set(plan.val_subjects)

    def test_failed_fold_recorded_not_fatal(self, small_dataset):
        manifest, _, _ = small_dataset
        # class A survives only for subject s00: every fold whose training
        # pool lacks s00 cannot fit a centroid model
        entries = [e for e in manifest.entries if e.label != "A" or e.subject_id == "s00"]
        pruned = Manifest(entries=entries, dataset_name="pruned")
        report = loso_evaluate(pruned, FAST_ENC, CENTROID, split_seed=0)
        failed_ids = {fid for fid, _ in report.failures}
        assert "loso_s00" in failed_ids
        assert report.folds  # other folds still complete
        assert all("missing" in msg for _, msg in report.failures)


class TestFixedEvaluate:
    def test_single_fold_report(self, small_dataset):
        manifest, _, _ = small_dataset
        report = fixed_evaluate(manifest, FAST_ENC, CENTROID, n_train_subjects=4, split_seed=0)
        assert len(report.folds) == 1
        assert report.folds[0].n_test == 2 * 26 * 2
        assert report.config["mode"] == "fixed"


class TestConfusion:
    def test_perfect_classifier_is_diagonal(self, clean_dataset):
        report = fixed_evaluate(clean_dataset, FAST_ENC, CENTROID, n_train_subjects=2, split_seed=0)
        counts, normalized = confusion(report)
        assert counts.sum() == report.folds[0].n_test
        assert_array_equal(counts, np.diag(np.diag(counts)))
        assert_allclose(normalized[counts.sum(axis=1) > 0].sum(axis=1), 1.0, atol=1e-12)

    def test_matches_report_counts(self, small_dataset):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=2)
        counts, _ = confusion(report)
        assert_array_equal(counts, report.confusion_counts)
        assert counts.sum() == sum(f.n_test for f in report.folds)


class TestEmitReport:
    def test_deterministic_bytes_and_row_count(self, small_dataset, tmp_path):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        emit_report(report, tmp_path / "a")
        emit_report(report, tmp_path / "b")
        for name in ("summary.csv", "confusion.csv", "aggregate.txt", "config.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        lines = (tmp_path / "a" / "summary.csv").read_text().splitlines()
        assert len(lines) == 1 + len(report.folds) + 1  # header + folds + aggregate

    def test_summary_parse_back_exact(self, small_dataset, tmp_path):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        emit_report(report, tmp_path)
        lines = (tmp_path / "summary.csv").read_text().splitlines()[1:]
        by_id = {f.fold_id: f for f in report.folds}
        for line in lines[:-1]:
            fold_id, n_test, acc_a, acc_g, acc_f = line.split(",")
            fold = by_id[fold_id]
            assert int(n_test) == fold.n_test
            assert float(acc_a) == fold.accuracy_accel
            assert float(acc_g) == fold.accuracy_gyro
            assert float(acc_f) == fold.accuracy_fused
        mean_line = lines[-1].split(",")
        assert mean_line[0] == "mean"
        assert float(mean_line[4]) == report.mean_fused

    def test_confusion_csv_shape(self, small_dataset, tmp_path):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        emit_report(report, tmp_path)
        rows = (tmp_path / "confusion.csv").read_text().splitlines()
        assert rows[0] == ",".join("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
        assert len(rows) == 27
        parsed = np.array([[int(v) for v in row.split(",")] for row in rows[1:]])
        assert_array_equal(parsed, report.confusion_counts)

    def test_config_echo_complete(self, small_dataset, tmp_path):
        manifest, _, _ = small_dataset
        report = loso_evaluate(manifest, FAST_ENC, CENTROID, split_seed=0)
        emit_report(report, tmp_path)
        echo = dict(
            line.split("=", 1) for line in (tmp_path / "config.txt").read_text().splitlines()
        )
        for key in ("mode", "encoding_method", "n_bins", "pool_factor", "classifier",
                    "split_seed", "val_fraction", "workers", "permute_seed"):
            assert key in echo
