"""CSV and sidecar-metadata writers.

Floats are written in shortest round-trip form (``repr``), lines end in a
single LF, files are UTF-8. The grid hash is 64-bit FNV-1a over the data
rows of the long-format CSV exactly as emitted (header excluded).
"""
from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from os import PathLike
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

from . import __version__
from ._core import fnv1a64
from .errors import NumericalError, ValidationError

HASH_ALGORITHM = "fnv1a-64"

Destination = Union[str, PathLike, IO]


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"refusing to write non-finite value {x!r}")
    return repr(x)


def format_float17(x: float) -> str:
    """Fixed 17-significant-digit form used for trajectory tables."""
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"refusing to write non-finite value {x!r}")
    return format(x, ".17g")


def _lines(rows: Iterable[Sequence[float]], fmt=format_float) -> Iterable[str]:
    for row in rows:
        yield ",".join(fmt(v) for v in row) + "\n"


def canonical_rows(result) -> bytes:
    """Data rows of the long-format CSV as bytes."""
    return "".join(_lines(result.data.tolist())).encode("utf-8")


def grid_hash(result) -> str:
    return f"{fnv1a64(canonical_rows(result)):016x}"


def _emit(payload: bytes, destination: Destination) -> int:
    if destination == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    elif isinstance(destination, (str, PathLike)):
        Path(destination).write_bytes(payload)
    elif isinstance(destination, io.TextIOBase):
        destination.write(payload.decode("utf-8"))
    else:
        destination.write(payload)
    return len(payload)


def write_table(header: Sequence[str], rows, destination: Destination, fmt=format_float) -> int:
    """Header plus comma-separated rows; returns the byte count."""
    text = ",".join(header) + "\n" + "".join(_lines(rows, fmt))
    return _emit(text.encode("utf-8"), destination)


def write_long_csv(result, destination: Destination) -> int:
    """One row per grid point: axis values, then the observable."""
    if not np.all(np.isfinite(result.data)):
        raise NumericalError("refusing to write non-finite values")
    header = (",".join(result.columns) + "\n").encode("utf-8")
    return _emit(header + canonical_rows(result), destination)


def write_matrix(result, destination: Destination) -> int:
    """Gnuplot-style matrix of a 2-axis result.

    First line is an empty corner cell followed by the second axis values;
    every other line starts with a first-axis value.
    """
    if len(result.axes) != 2:
        raise ValidationError(f"matrix output needs exactly 2 axes, got {len(result.axes)}", field="format")
    rows_axis, cols_axis = (ax.values() for ax in result.axes)
    grid = result.as_array()
    lines = ["," + ",".join(format_float(v) for v in cols_axis) + "\n"]
    for r, line in zip(rows_axis, grid):
        lines.append(format_float(r) + "," + ",".join(format_float(v) for v in line) + "\n")
    return _emit("".join(lines).encode("utf-8"), destination)


def read_long_csv(source: str | PathLike | IO) -> tuple[tuple[str, ...], np.ndarray]:
    """Inverse of :func:`write_long_csv`."""
    if isinstance(source, (str, PathLike)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    lines = text.split("\n")
    if lines[-1] != "":
        raise ValidationError("CSV must end with a single LF")
    header = tuple(lines[0].split(","))
    body = [[float(v) for v in line.split(",")] for line in lines[1:-1]]
    data = np.array(body, dtype=np.float64).reshape(len(body), len(header))
    return header, data


@dataclass
class RunMetadata:
    grid: dict
    params: dict
    initial: dict
    version: str = __version__
    hash_algorithm: str = HASH_ALGORITHM
    grid_hash: str = ""
    rows: int = 0
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_result(cls, result) -> "RunMetadata":
        meta = dict(result.metadata)
        grid = {k: meta.pop(k) for k in ("preset", "observable", "axes") if k in meta}
        params = meta.pop("fixed", {})
        initial = meta.pop("initial", {})
        meta.pop("version", None)
        meta.pop("hash_algorithm", None)
        meta.pop("grid_hash", None)
        meta.pop("rows", None)
        return cls(grid=grid, params=params, initial=initial, grid_hash=grid_hash(result), rows=len(result),
                   extra=meta)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def write_metadata(result, destination: Destination) -> int:
    return _emit(RunMetadata.from_result(result).to_json().encode("utf-8"), destination)
