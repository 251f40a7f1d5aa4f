"""Encoded-image file formats.

Raw format (bit-exact round trip):
  bytes 0-7   magic "IMAIR1\\0\\0"
  bytes 8-11  image size N, uint32 little-endian
  bytes 12-15 channel count, uint32 little-endian
  then channel-major, row-major float64 little-endian pixel values

PNG export is 8-bit grayscale with a linear [min, max] -> [0, 255] map
(round half up); a text sidecar records min/max/method so the export is
reversible up to quantization.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .datasets import DataError
from .encoders import EncodedImage, ImageStack

MAGIC = b"IMAIR1\x00\x00"
_HEADER = struct.Struct("<8sII")


def _as_channel_array(img) -> np.ndarray:
    if isinstance(img, ImageStack):
        return img.as_array()
    if isinstance(img, EncodedImage):
        return img.pixels[None, :, :]
    arr = np.asarray(img, dtype=float)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected square image(s), got shape {arr.shape}")
    return arr


def export_image_raw(img, path) -> None:
    """Write an EncodedImage or ImageStack in the raw binary format."""
    arr = _as_channel_array(img)
    n_channels, n, _ = arr.shape
    payload = np.ascontiguousarray(arr, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, n_channels))
        fh.write(payload)


def import_image_raw(path) -> np.ndarray:
    """Read a raw image file back as a (channels, N, N) float64 array."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise DataError(f"{path}: not an IMAIR file (truncated header)")
    magic, n, n_channels = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"{path}: not an IMAIR file (bad magic)")
    expected = _HEADER.size + n_channels * n * n * 8
    if len(blob) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(blob)}")
    data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    return data.reshape(n_channels, n, n).copy()


def export_image_png(img: EncodedImage, path) -> None:
    """
    Write an 8-bit grayscale PNG plus a `<path>.txt` sidecar.

    Pixels map linearly from [min, max] to [0, 255], rounding half up;
    a constant image maps to all zeros.
    """
    pixels = img.pixels
    lo, hi = float(pixels.min()), float(pixels.max())
    if hi > lo:
        quant = np.floor((pixels - lo) / (hi - lo) * 255.0 + 0.5)
    else:
        quant = np.zeros_like(pixels)
    Image.fromarray(quant.astype(np.uint8), mode="L").save(path, format="PNG")
    sidecar = Path(str(path) + ".txt")
    sidecar.write_text(f"min={lo!r}\nmax={hi!r}\nmethod={img.method}\n")


def import_image_png(path) -> tuple[np.ndarray, str]:
    """Reconstruct (pixels, method) from a PNG and its sidecar, up to quantization."""
    path = Path(path)
    sidecar = Path(str(path) + ".txt")
    if not sidecar.is_file():
        raise DataError(f"sidecar missing: {sidecar}")
    meta = {}
    for line in sidecar.read_text().splitlines():
        key, _, value = line.partition("=")
        meta[key] = value
    try:
        lo, hi = float(meta["min"]), float(meta["max"])
        method = meta["method"]
    except KeyError as exc:
        raise DataError(f"{sidecar}: missing {exc} line") from exc
    quant = np.asarray(Image.open(path).convert("L"), dtype=float)
    pixels = lo + quant / 255.0 * (hi - lo)
    return pixels, method
