"""Text serialization for trained models.

Layout: a first line `airwriting-model v1`, then `key=value` header lines,
then one `array <name> <rows> <cols>` section per parameter matrix with one
row of space-separated C99 hexfloats per line, then `end`. Hexfloats make
the round trip bit-faithful.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

FORMAT_LINE = "airwriting-model v1"


def _write_array(lines: list[str], name: str, arr: np.ndarray) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    lines.append(f"array {name} {arr.shape[0]} {arr.shape[1]}")
    for row in arr:
        lines.append(" ".join(float.hex(float(v)) for v in row))


def save_model(model, path) -> None:
    from .classify import CentroidModel, LogisticModel

    lines = [FORMAT_LINE, f"kind={model.kind}"]
    lines.append(f"pool_factor={model.pool_factor}")
    lines.append(f"pool_method={model.pool_method}")
    lines.append(f"dim={model.dim}")
    if isinstance(model, CentroidModel):
        lines.append(f"temperature={model.temperature!r}")
    elif isinstance(model, LogisticModel):
        cfg = model.config
        lines.append(f"step={cfg.step!r}")
        lines.append(f"l2={cfg.l2!r}")
        lines.append(f"max_epochs={cfg.max_epochs}")
        lines.append(f"patience={cfg.patience}")
        lines.append(f"seed={cfg.seed}")
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    _write_array(lines, "mean", model.mean)
    _write_array(lines, "scale", model.scale)
    if isinstance(model, CentroidModel):
        _write_array(lines, "centroids", model.centroids)
    else:
        _write_array(lines, "bias", model.bias)
        _write_array(lines, "weights", model.weights)
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path):
    from .classify import CentroidModel, LogisticConfig, LogisticModel
    from .datasets import DataError

    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != FORMAT_LINE:
        raise DataError(f"{path}: not an airwriting model file")
    header: dict[str, str] = {}
    arrays: dict[str, np.ndarray] = {}
    i = 1
    while i < len(lines) and lines[i] != "end":
        line = lines[i]
        if line.startswith("array "):
            _, name, rows_s, cols_s = line.split()
            rows, cols = int(rows_s), int(cols_s)
            data = [
                [float.fromhex(tok) for tok in lines[i + 1 + r].split()]
                for r in range(rows)
            ]
            arr = np.array(data, dtype=float)
            if arr.shape != (rows, cols):
                raise DataError(f"{path}: array {name} shape mismatch")
            arrays[name] = arr
            i += 1 + rows
        else:
            key, _, value = line.partition("=")
            header[key] = value
            i += 1
    try:
        kind = header["kind"]
        factor = int(header["pool_factor"])
        method = header["pool_method"]
        mean = arrays["mean"][0]
        scale = arrays["scale"][0]
        if kind == "centroid":
            return CentroidModel(
                centroids=arrays["centroids"],
                temperature=float(header["temperature"]),
                mean=mean,
                scale=scale,
                pool_factor=factor,
                pool_method=method,
            )
        if kind == "logistic":
            config = LogisticConfig(
                step=float(header["step"]),
                l2=float(header["l2"]),
                max_epochs=int(header["max_epochs"]),
                patience=int(header["patience"]),
                seed=int(header["seed"]),
            )
            return LogisticModel(
                weights=arrays["weights"],
                bias=arrays["bias"][0],
                mean=mean,
                scale=scale,
                pool_factor=factor,
                config=config,
                pool_method=method,
            )
    except KeyError as exc:
        raise DataError(f"{path}: missing field {exc}") from exc
    raise DataError(f"{path}: unknown model kind {kind!r}")
