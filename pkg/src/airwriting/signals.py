"""Recording containers and the preprocessing chain: resample, fix length, z-normalize, split."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

FIXED_LENGTH = 155
N_AXES = 6
ACCEL = "accelerometer"
GYRO = "gyroscope"

# Below this, a channel's spread is treated as zero (flatlined sensor).
DEGENERATE_STD = 1e-12


@dataclass
class RawRecording:
    """One airwriting recording: L x 6 samples (3 accel axes, then 3 gyro axes)."""

    samples: np.ndarray
    subject_id: str
    label: str
    repetition: int
    sample_rate_hz: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != N_AXES:
            raise ValueError(f"expected an L x {N_AXES} sample matrix, got shape {self.samples.shape}")
        if self.samples.shape[0] < 1:
            raise ValueError("recording must contain at least one sample")
        if not np.isfinite(self.samples).all():
            raise ValueError("recording contains non-finite samples")
        if len(self.label) != 1 or not ("A" <= self.label <= "Z"):
            raise ValueError(f"label must be a single letter A-Z, got {self.label!r}")
        if self.repetition < 0:
            raise ValueError("repetition must be non-negative")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    @property
    def length(self) -> int:
        return self.samples.shape[0]


@dataclass
class FixedSignal:
    """A recording brought to exactly FIXED_LENGTH rows, with its source metadata."""

    samples: np.ndarray
    subject_id: str
    label: str
    repetition: int
    sample_rate_hz: float
    target_len: int = FIXED_LENGTH

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape != (self.target_len, N_AXES):
            raise ValueError(
                f"expected {self.target_len} x {N_AXES} samples, got shape {self.samples.shape}"
            )


@dataclass
class SensorChannels:
    """155 x 3 matrix for one sensor (accelerometer or gyroscope)."""

    values: np.ndarray
    sensor_kind: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != 3:
            raise ValueError(f"expected an N x 3 matrix, got shape {self.values.shape}")
        if self.sensor_kind not in (ACCEL, GYRO):
            raise ValueError(f"sensor_kind must be {ACCEL!r} or {GYRO!r}")


def resample(rec: RawRecording, target_hz: float) -> RawRecording:
    """
    Downsample a recording to target_hz by linear interpolation.

    Output sample k sits at index position k * (source_hz / target_hz) of the
    input grid; positions past the last input sample clamp to the final value.
    Output length is round(L * target_hz / source_hz).
    """
    if target_hz <= 0:
        raise ValueError("target_hz must be positive")
    if target_hz > rec.sample_rate_hz:
        raise ValueError(
            f"cannot upsample: target {target_hz} Hz exceeds source {rec.sample_rate_hz} Hz"
        )
    if target_hz == rec.sample_rate_hz:
        return replace(rec, samples=rec.samples.copy())
    n_in = rec.length
    if n_in < 2:
        raise ValueError("resampling needs at least 2 samples")
    n_out = int(round(n_in * target_hz / rec.sample_rate_hz))
    if n_out < 1:
        raise ValueError("target_hz too low: resampled recording would be empty")
    pos = np.arange(n_out) * (rec.sample_rate_hz / target_hz)
    grid = np.arange(n_in, dtype=float)
    out = np.column_stack([np.interp(pos, grid, rec.samples[:, c]) for c in range(N_AXES)])
    return replace(rec, samples=out, sample_rate_hz=float(target_hz))


def fix_length(rec: RawRecording, target_len: int = FIXED_LENGTH) -> FixedSignal:
    """Keep the first target_len rows, or zero-pad at the end if the recording is shorter."""
    if target_len < 1:
        raise ValueError("target_len must be positive")
    n = rec.length
    if n >= target_len:
        samples = rec.samples[:target_len].copy()
    else:
        samples = np.zeros((target_len, N_AXES))
        samples[:n] = rec.samples
    return FixedSignal(
        samples=samples,
        subject_id=rec.subject_id,
        label=rec.label,
        repetition=rec.repetition,
        sample_rate_hz=rec.sample_rate_hz,
        target_len=target_len,
    )


def z_normalize(sig: FixedSignal) -> FixedSignal:
    """
    Z-normalize each of the 6 columns independently (population std).

    A column with std below DEGENERATE_STD maps to all zeros instead of
    blowing up; real sensors can flatline and the pipeline must carry on.
    """
    x = sig.samples
    if not np.isfinite(x).all():
        raise ValueError("signal contains non-finite values")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    out = np.zeros_like(x)
    ok = std >= DEGENERATE_STD
    out[:, ok] = (x[:, ok] - mean[ok]) / std[ok]
    return replace(sig, samples=out)


def split_channels(sig: FixedSignal) -> tuple[SensorChannels, SensorChannels]:
    """Split a 6-column signal into (accelerometer, gyroscope) 3-column halves."""
    accel = SensorChannels(values=sig.samples[:, :3].copy(), sensor_kind=ACCEL)
    gyro = SensorChannels(values=sig.samples[:, 3:].copy(), sensor_kind=GYRO)
    return accel, gyro


def preprocess(
    rec: RawRecording,
    target_len: int = FIXED_LENGTH,
    target_hz: float | None = 62.0,
) -> tuple[SensorChannels, SensorChannels]:
    """
    Full preprocessing chain: resample -> fix_length -> z_normalize -> split_channels.

    target_hz=None skips the resampling stage entirely; otherwise recordings
    already at target_hz pass through unchanged.
    """
    if target_hz is not None and rec.sample_rate_hz != target_hz:
        rec = resample(rec, target_hz)
    return split_channels(z_normalize(fix_length(rec, target_len)))
