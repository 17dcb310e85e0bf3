"""Field snapshot files: one-line JSON header + raw little-endian float64."""

from __future__ import annotations

import json

import numpy as np

from .errors import HeaderMismatch
from .grid import Field, SpectralGrid

__all__ = ["write_snapshot", "read_snapshot"]

FORMAT_VERSION = 1


def write_snapshot(field: Field, path, t: float = 0.0, model_name: str = "",
                   extra: dict = None) -> None:
    """Write a field to disk; payload round-trips all finite doubles exactly."""
    g = field.grid
    header = {
        "format_version": FORMAT_VERSION,
        "dim": g.dim,
        "n": list(g.n),
        "length": list(g.length),
        "t": float(t),
        "model_name": model_name,
        "byte_order": "little",
        "scalar": "f64",
    }
    if extra:
        header.update(extra)
    payload = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload.tobytes())


def read_snapshot(path, expect_grid: SpectralGrid = None):
    """Read a snapshot; returns the Field (header available as field.header)."""
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise HeaderMismatch(f"unreadable snapshot header: {exc}") from exc
        payload = fh.read()
    for key in ("format_version", "dim", "n", "length", "byte_order", "scalar"):
        if key not in header:
            raise HeaderMismatch(f"snapshot header missing key {key!r}")
    if header["byte_order"] != "little" or header["scalar"] != "f64":
        raise HeaderMismatch("unsupported snapshot payload encoding")
    n = tuple(int(m) for m in header["n"])
    if len(n) != int(header["dim"]):
        raise HeaderMismatch(
            f"header dim {header['dim']} does not match n of length {len(n)}"
        )
    count = int(np.prod(n))
    if len(payload) != 8 * count:
        raise HeaderMismatch(
            f"payload holds {len(payload)} bytes, expected {8 * count}"
        )
    if expect_grid is not None:
        grid = expect_grid
        if tuple(grid.n) != n or any(
            abs(a - b) > 1e-12 * max(1.0, abs(b))
            for a, b in zip(grid.length, header["length"])
        ):
            raise HeaderMismatch("snapshot grid does not match the expected grid")
    else:
        grid = SpectralGrid.create(n, tuple(float(L) for L in header["length"]))
    values = np.frombuffer(payload, dtype="<f8").reshape(n).copy()
    field = Field(grid, values)
    field.header = header
    return field
