"""Time-series to image encodings: SSM, GASF, GADF, and MTF.

Every encoder maps a length-N series to an N x N image. GASF/GADF go through
min-max rescaling to [-1, 1] and a polar-angle transform; MTF goes through
quantile binning and a column-normalized bin-transition matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SensorChannels

SSM = "ssm"
GASF = "gasf"
GADF = "gadf"
MTF = "mtf"
METHODS = (SSM, GASF, GADF, MTF)

DEFAULT_Q = 8

# Min-max range below this counts as a constant series (degenerate rules apply).
DEGENERATE_RANGE = 1e-12

_RANGES = {SSM: (0.0, np.inf), GASF: (-1.0, 1.0), GADF: (-1.0, 1.0), MTF: (0.0, 1.0)}


@dataclass
class EncodedImage:
    pixels: np.ndarray
    method: str

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.pixels.ndim != 2 or self.pixels.shape[0] != self.pixels.shape[1]:
            raise ValueError(f"image must be square, got shape {self.pixels.shape}")
        if not np.isfinite(self.pixels).all():
            raise ValueError("image contains non-finite pixels")
        lo, hi = _RANGES[self.method]
        if self.pixels.min() < lo - 1e-12 or self.pixels.max() > hi + 1e-12:
            raise ValueError(f"{self.method} pixels outside [{lo}, {hi}]")

    @property
    def size(self) -> int:
        return self.pixels.shape[0]


@dataclass
class ImageStack:
    """Three same-method EncodedImages, one per sensor axis."""

    channels: tuple[EncodedImage, EncodedImage, EncodedImage]
    sensor_kind: str

    def __post_init__(self):
        if len(self.channels) != 3:
            raise ValueError("stack must have exactly 3 channels")
        methods = {c.method for c in self.channels}
        sizes = {c.size for c in self.channels}
        if len(methods) != 1 or len(sizes) != 1:
            raise ValueError("stack channels must share one method and one size")

    @property
    def method(self) -> str:
        return self.channels[0].method

    @property
    def size(self) -> int:
        return self.channels[0].size

    def as_array(self) -> np.ndarray:
        """Channel-major (3, N, N) pixel array."""
        return np.stack([c.pixels for c in self.channels])


@dataclass
class PolarSeries:
    """Angles arccos(v_i) in [0, pi] and radii i/N for 1-based i.

    The radii regularize the polar span but are not consumed by any encoder;
    they are kept so the polar representation is complete and invertible.
    """

    theta: np.ndarray
    r: np.ndarray


@dataclass
class BinAssignment:
    bin_of: np.ndarray  # 1-based bin index per sample
    boundaries: np.ndarray  # Q-1 non-decreasing thresholds

    @property
    def n_bins(self) -> int:
        return len(self.boundaries) + 1


@dataclass
class TransitionMatrix:
    """Column-stochastic bin transitions: w[i, j] = P(next bin = i | current bin = j)."""

    w: np.ndarray
    counts: np.ndarray


def _check_series(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a non-empty 1-D series")
    if not np.isfinite(v).all():
        raise ValueError("series contains non-finite values")
    return v


def ssm_encode(v) -> EncodedImage:
    """Self-similarity matrix: pixel (i, j) is the distance |v_i - v_j|."""
    v = _check_series(v)
    pixels = np.abs(v[:, None] - v[None, :])
    return EncodedImage(pixels=pixels, method=SSM)


def rescale_minmax(v) -> np.ndarray:
    """
    Rescale a series to [-1, 1]: ((v - max) + (v - min)) / (max - min).

    The exact minimum maps to -1 and the exact maximum to +1. A constant
    series (range < DEGENERATE_RANGE) maps to all zeros. Outputs are clipped
    to absorb last-ulp rounding.
    """
    v = _check_series(v)
    lo, hi = v.min(), v.max()
    if hi - lo < DEGENERATE_RANGE:
        return np.zeros_like(v)
    return np.clip(((v - hi) + (v - lo)) / (hi - lo), -1.0, 1.0)


def to_polar(v_rescaled) -> PolarSeries:
    """Map a [-1, 1] series to polar form: theta = arccos(v), r_i = i / N (1-based i)."""
    v = np.asarray(v_rescaled, dtype=float)
    n = v.size
    theta = np.arccos(np.clip(v, -1.0, 1.0))
    r = np.arange(1, n + 1) / n
    return PolarSeries(theta=theta, r=r)


def gasf_encode(v) -> EncodedImage:
    """Gramian angular summation field: pixel (i, j) = cos(theta_i + theta_j)."""
    theta = to_polar(rescale_minmax(v)).theta
    pixels = np.cos(theta[:, None] + theta[None, :])
    return EncodedImage(pixels=pixels, method=GASF)


def gadf_encode(v) -> EncodedImage:
    """Gramian angular difference field: pixel (i, j) = sin(theta_i - theta_j)."""
    theta = to_polar(rescale_minmax(v)).theta
    pixels = np.sin(theta[:, None] - theta[None, :])
    return EncodedImage(pixels=pixels, method=GADF)


def assign_bins(v, n_bins: int = DEFAULT_Q) -> BinAssignment:
    """
    Assign each sample to one of n_bins quantile bins.

    Boundaries are the empirical quantiles at levels k/Q (k = 1..Q-1, linear
    interpolation). Sample v_i lands in the smallest bin b with
    v_i <= boundary_b, else bin Q; boundary ties resolve to the lower bin.
    """
    v = _check_series(v)
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    if v.size < 2:
        raise ValueError("binning needs at least 2 samples")
    levels = np.arange(1, n_bins) / n_bins
    boundaries = np.quantile(v, levels)
    bin_of = np.searchsorted(boundaries, v, side="left") + 1
    return BinAssignment(bin_of=bin_of.astype(np.int64), boundaries=boundaries)


def transition_matrix(bins: BinAssignment, n_bins: int | None = None) -> TransitionMatrix:
    """
    Count consecutive bin transitions and column-normalize them.

    counts[i, j] is the number of times a sample in bin j+1 is immediately
    followed by a sample in bin i+1. Columns with at least one outgoing
    transition are normalized to sum 1; never-visited source bins stay zero.
    """
    if n_bins is None:
        n_bins = bins.n_bins
    elif n_bins != bins.n_bins:
        raise ValueError(f"n_bins {n_bins} does not match assignment ({bins.n_bins})")
    b = bins.bin_of
    if b.size < 2:
        raise ValueError("need at least 2 samples to count transitions")
    counts = np.zeros((n_bins, n_bins), dtype=np.int64)
    np.add.at(counts, (b[1:] - 1, b[:-1] - 1), 1)
    col_sums = counts.sum(axis=0)
    w = np.zeros((n_bins, n_bins))
    active = col_sums > 0
    w[:, active] = counts[:, active] / col_sums[active]
    return TransitionMatrix(w=w, counts=counts)


def mtf_encode(v, n_bins: int = DEFAULT_Q) -> EncodedImage:
    """Markov transition field: pixel (k, l) = w[bin(v_k), bin(v_l)]."""
    bins = assign_bins(v, n_bins)
    w = transition_matrix(bins).w
    idx = bins.bin_of - 1
    pixels = w[idx[:, None], idx[None, :]]
    return EncodedImage(pixels=pixels, method=MTF)


def encode_series(v, method: str, n_bins: int = DEFAULT_Q) -> EncodedImage:
    if method == SSM:
        return ssm_encode(v)
    if method == GASF:
        return gasf_encode(v)
    if method == GADF:
        return gadf_encode(v)
    if method == MTF:
        return mtf_encode(v, n_bins)
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def encode_stack(ch: SensorChannels, method: str, n_bins: int = DEFAULT_Q) -> ImageStack:
    """Encode each of the 3 sensor axes into one channel of an image stack."""
    images = tuple(encode_series(ch.values[:, c], method, n_bins) for c in range(3))
    return ImageStack(channels=images, sensor_kind=ch.sensor_kind)
