import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsync._core import fnv1a64
from qsync.errors import NumericalError, ValidationError
from qsync.export import (
    HASH_ALGORITHM,
    RunMetadata,
    format_float,
    grid_hash,
    read_long_csv,
    write_long_csv,
    write_matrix,
    write_metadata,
)
from qsync.sweep import AxisSpec, GridResult, SweepGrid, figure_preset, run_sweep


def _small(count=3):
    grid = SweepGrid(axes=[AxisSpec("delta", -1, 1, count)], fixed={"lambda": 0.1, "gamma": 1, "t": 5}, observable="s_max")
    return run_sweep(grid)


def test_empty_result_is_header_only():
    res = GridResult(columns=("delta", "s_max"), data=np.empty((0, 2)), axes=())
    buf = io.BytesIO()
    n = write_long_csv(res, buf)
    assert buf.getvalue() == b"delta,s_max\n" and n == len(buf.getvalue())


def test_one_row_gives_two_lines(tmp_path):
    grid = SweepGrid(axes=[AxisSpec("t", 500, 500, 1)], fixed={"lambda": 0.01, "delta": 1, "gamma": 1}, observable="s_max")
    path = tmp_path / "one.csv"
    write_long_csv(run_sweep(grid), path)
    raw = path.read_bytes()
    assert raw.count(b"\n") == 2 and raw.endswith(b"\n") and not raw.endswith(b"\n\n")
    assert b"\r" not in raw


def test_fig3b_round_trip(tmp_path):
    res = run_sweep(figure_preset("fig3b"))
    path = tmp_path / "fig3b.csv"
    write_long_csv(res, path)
    header, data = read_long_csv(path)
    assert header == res.columns
    assert data.tobytes() == res.data.tobytes()


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    text = format_float(x)
    assert float(text) == x
    assert len(text.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_non_finite_refused():
    res = _small()
    res.data[1, -1] = math.nan
    with pytest.raises(NumericalError):
        write_long_csv(res, io.BytesIO())
    with pytest.raises(NumericalError):
        format_float(math.inf)


def test_matrix_small_grid():
    grid = SweepGrid(
        axes=[AxisSpec("gamma", 0.5, 1.0, 2), AxisSpec("delta", 0.0, 1.0, 2)],
        fixed={"lambda": 0.1, "t": 5.0},
        observable="s_max",
    )
    res = run_sweep(grid)
    buf = io.StringIO()
    write_matrix(res, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 3 and all(len(line.split(",")) == 3 for line in lines)
    assert lines[0] == ",0.0,1.0"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.5", "1.0"]
    body = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
    assert body.tobytes() == res.as_array().tobytes()


def test_matrix_fig5a_shape():
    buf = io.BytesIO()
    write_matrix(run_sweep(figure_preset("fig5a")), buf)
    lines = buf.getvalue().decode().splitlines()
    assert len(lines) == 101
    assert {len(line.split(",")) for line in lines} == {102}


def test_matrix_requires_two_axes():
    with pytest.raises(ValidationError):
        write_matrix(_small(), io.BytesIO())


def test_stdout_destination(capsysbinary):
    write_long_csv(_small(), "-")
    out = capsysbinary.readouterr().out
    assert out.startswith(b"delta,s_max\n") and out.count(b"\n") == 4


def test_hash_matches_emitted_rows(tmp_path):
    res = _small(5)
    path = tmp_path / "a.csv"
    write_long_csv(res, path)
    rows = path.read_bytes().split(b"\n", 1)[1]
    assert f"{fnv1a64(rows):016x}" == grid_hash(res) == res.metadata["grid_hash"]
    assert grid_hash(_small(5)) == grid_hash(res)
    assert grid_hash(_small(4)) != grid_hash(res)


def test_metadata_contents(tmp_path):
    res = run_sweep(figure_preset("fig1d"))
    path = tmp_path / "fig1d.meta.json"
    write_metadata(res, path)
    meta = json.loads(path.read_text())
    assert meta["grid"]["preset"] == "fig1d"
    assert meta["params"] == {"lambda": 0.01, "delta": 1.0, "gamma": 1.0, "t": 500.0}
    assert meta["hash_algorithm"] == HASH_ALGORITHM
    assert meta["grid_hash"] == grid_hash(res)
    assert meta["rows"] == len(res)
    assert meta["timestamp"].endswith("+00:00")
    assert meta["initial"] == {"rho11": 0.5, "re_rho10": 0.5, "im_rho10": 0.0}


def test_metadata_dataclass_serialises_sorted():
    text = RunMetadata(grid={}, params={"b": 1, "a": 2}, initial={}).to_json()
    assert text.endswith("}\n")
    assert list(json.loads(text)) == sorted(json.loads(text))
