import numpy as np
import pytest

from airwriting import RawRecording, SyntheticSpec, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_recording(samples, subject="s00", label="A", rep=0, rate=62.0):
    return RawRecording(
        samples=np.asarray(samples, dtype=float),
        subject_id=subject,
        label=label,
        repetition=rep,
        sample_rate_hz=rate,
    )


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """6 subjects x 26 letters x 2 reps, clean enough for fast end-to-end tests."""
    out = tmp_path_factory.mktemp("small_synth")
    spec = SyntheticSpec(n_subjects=6, n_repetitions=2, seed=11, noise_scale=0.1, subject_jitter=0.1)
    manifest = generate_synthetic(spec, out)
    return manifest, spec, out
