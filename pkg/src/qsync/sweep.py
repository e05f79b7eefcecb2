"""Parameter-grid evaluation of the phase-space observables.

Grids are evaluated in fixed contiguous chunks of the row-major point
ordering, so the result is bitwise identical whatever the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import __version__
from ._core import BACKEND
from .bath import BathParams
from .dynamics import PLUS_STATE, InitialState, count_revivals, evolve_arrays, h_values
from .errors import BudgetError, NumericalError, ValidationError
from .phasespace import q_values, s_values, summary_values

MAX_POINTS = 10**8
AXIS_NAMES = ("delta", "gamma", "lambda", "t", "phi", "theta")
BATH_KEYS = ("lambda", "delta", "gamma", "t")
OBSERVABLES = {
    "abs_rho10": (),
    "q": ("theta", "phi"),
    "s": ("phi",),
    "s_max": (),
    "phi_star": (),
    "revivals": (),
}
_FLAT_CHUNK = 4096


@dataclass(frozen=True)
class AxisSpec:
    """One grid axis. ``count == 1`` with ``min == max`` is a single-point axis."""

    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValidationError(f"unknown axis {self.name!r}; expected one of {', '.join(AXIS_NAMES)}", field="axis")
        lo, hi = float(self.min), float(self.max)
        if int(self.count) != self.count or self.count < 1:
            raise ValidationError(f"axis {self.name}: count must be a positive integer", field="axis")
        point = self.count == 1
        if not (math.isfinite(lo) and math.isfinite(hi)) or (lo != hi if point else lo >= hi):
            raise ValidationError(
                f"axis {self.name}: need finite min < max (or min == max with count 1), got {lo}, {hi}", field="axis"
            )
        if self.scale not in ("linear", "log"):
            raise ValidationError(f"axis {self.name}: scale must be linear or log", field="axis")
        if self.scale == "log" and lo <= 0:
            raise ValidationError(f"axis {self.name}: log scale needs min > 0", field="axis")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        object.__setattr__(self, "count", int(self.count))

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max, "count": self.count, "scale": self.scale}

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """Parse ``name:min:max:count[:log]``."""
        parts = text.split(":")
        if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] not in ("log", "linear")):
            raise ValidationError(f"bad axis spec {text!r}; expected name:min:max:count[:log]", field="axis")
        try:
            lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise ValidationError(f"bad axis spec {text!r}; numbers expected", field="axis") from None
        return cls(parts[0], lo, hi, count, parts[4] if len(parts) == 5 else "linear")


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple[AxisSpec, ...]
    fixed: Mapping[str, float]
    observable: str
    initial: InitialState = PLUS_STATE
    preset: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "fixed", {k: float(v) for k, v in dict(self.fixed).items()})
        if self.observable not in OBSERVABLES:
            raise ValidationError(
                f"unknown observable {self.observable!r}; expected one of {', '.join(OBSERVABLES)}", field="observable"
            )
        if not 1 <= len(self.axes) <= 3:
            raise ValidationError("a grid needs 1 to 3 axes", field="axis")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate axis names {names}", field="axis")
        for key in self.fixed:
            if key not in AXIS_NAMES:
                raise ValidationError(f"unknown fixed parameter {key!r}", field="fixed")
            if key in names:
                raise ValidationError(f"{key!r} is both an axis and fixed", field="fixed")
        needed = set(BATH_KEYS) | set(OBSERVABLES[self.observable])
        provided = set(names) | set(self.fixed)
        missing = needed - provided
        if missing:
            raise ValidationError(
                f"observable {self.observable} needs {', '.join(sorted(missing))}", field=sorted(missing)[0]
            )
        extra = provided - needed
        if extra:
            raise ValidationError(
                f"observable {self.observable} does not use {', '.join(sorted(extra))}", field=sorted(extra)[0]
            )
        for ax in self.axes:
            _check_range(ax.name, ax.min, ax.max)
        for key, value in self.fixed.items():
            if not math.isfinite(value):
                raise ValidationError(f"{key} must be finite", field=key)
            _check_range(key, value, value)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.count for ax in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(ax.name for ax in self.axes) + (self.observable,)

    def describe(self) -> dict:
        return {
            "preset": self.preset,
            "observable": self.observable,
            "axes": [ax.to_dict() for ax in self.axes],
            "fixed": dict(sorted(self.fixed.items())),
            "initial": {"rho11": self.initial.rho11_0, "re_rho10": self.initial.rho10_0.real,
                        "im_rho10": self.initial.rho10_0.imag},
        }


def _check_range(name: str, lo: float, hi: float) -> None:
    if name in ("lambda", "gamma") and lo <= 0:
        raise ValidationError(f"{name} must be > 0", field=name)
    if name == "t" and lo < 0:
        raise ValidationError("t must be >= 0", field="t")
    if name == "theta" and (lo < 0 or hi > math.pi + 1e-12):
        raise ValidationError("theta must lie in [0, pi]", field="theta")


@dataclass
class GridResult:
    """Long-format table: one row per grid point, axis values then the observable."""

    columns: tuple[str, ...]
    data: np.ndarray
    axes: tuple[AxisSpec, ...] = ()
    metadata: dict = field(default_factory=dict)

    @property
    def observable(self) -> str:
        return self.columns[-1]

    def __len__(self) -> int:
        return self.data.shape[0]

    def grid_hash(self) -> str:
        from .export import grid_hash

        return grid_hash(self)

    def as_array(self) -> np.ndarray:
        """Observable reshaped to the grid shape (row-major in axis order)."""
        return self.data[:, -1].reshape(tuple(ax.count for ax in self.axes))


def _chunks(grid: SweepGrid) -> list[tuple[int, int]]:
    if len(grid.axes) >= 2:
        step = math.prod(grid.shape[1:])
    else:
        step = _FLAT_CHUNK
    return [(start, min(start + step, grid.size)) for start in range(0, grid.size, step)]


def _evaluate_chunk(args) -> tuple[np.ndarray, float, float]:
    grid, start, stop = args
    flat = np.arange(start, stop)
    coords = np.unravel_index(flat, grid.shape)
    block = np.empty((stop - start, len(grid.axes) + 1), dtype=np.float64)
    params = {}
    for i, (ax, idx) in enumerate(zip(grid.axes, coords)):
        block[:, i] = ax.values()[idx]
        params[ax.name] = block[:, i]
    n = stop - start
    for key, value in grid.fixed.items():
        params[key] = np.full(n, value)

    h = h_values(params["lambda"], params["delta"], params["gamma"], params["t"])
    rho11, rho10 = evolve_arrays(grid.initial, h)
    margin = rho11 * (1.0 - rho11) - np.abs(rho10) ** 2
    obs = grid.observable
    if obs == "abs_rho10":
        values = np.abs(rho10)
    elif obs == "q":
        values = q_values(rho11, rho10, params["theta"], params["phi"])
    elif obs == "s":
        values = s_values(rho10, params["phi"])
    elif obs == "s_max":
        values = summary_values(rho10)[0]
    elif obs == "phi_star":
        values = summary_values(rho10)[1]
    else:
        values = np.array(
            [
                count_revivals(BathParams(gamma=g, lam=lam, delta=d), t, grid.initial)
                for lam, d, g, t in zip(params["lambda"], params["delta"], params["gamma"], params["t"])
            ],
            dtype=np.float64,
        )
    block[:, -1] = values
    return block, float(margin.min()), float(np.abs(h).max())


def run_sweep(grid: SweepGrid, jobs: int = 1) -> GridResult:
    """Evaluate ``grid.observable`` at every grid point.

    Rows come out in row-major order of the declared axes. ``jobs > 1``
    spreads the fixed chunks over worker processes without changing a bit of
    the output.
    """
    if grid.size > MAX_POINTS:
        raise BudgetError(f"{grid.size} grid points exceeds the budget of {MAX_POINTS}", field="axis")
    if jobs < 1:
        raise ValidationError("jobs must be >= 1", field="jobs")
    tasks = [(grid, a, b) for a, b in _chunks(grid)]
    if jobs == 1 or len(tasks) == 1:
        parts = [_evaluate_chunk(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_evaluate_chunk, tasks))
    data = np.concatenate([p[0] for p in parts]) if parts else np.empty((0, len(grid.columns)))
    if not np.all(np.isfinite(data)):
        raise NumericalError("sweep produced non-finite values")
    metadata = grid.describe()
    metadata.update(
        {
            "rows": int(data.shape[0]),
            "version": __version__,
            "backend": BACKEND,
            "min_positivity_margin": min(p[1] for p in parts),
            "max_abs_h": max(p[2] for p in parts),
        }
    )
    result = GridResult(columns=grid.columns, data=data, axes=grid.axes, metadata=metadata)
    result.metadata["hash_algorithm"] = "fnv1a-64"
    result.metadata["grid_hash"] = result.grid_hash()
    return result


# --- figure presets -------------------------------------------------------

DELTA_AXIS = AxisSpec("delta", -2.0, 2.0, 101)
GAMMA_AXIS = AxisSpec("gamma", 0.02, 2.0, 100)
LAMBDA_AXIS = AxisSpec("lambda", 0.001, 0.5, 100, "log")
PHI_AXIS = AxisSpec("phi", -math.pi, math.pi, 181)
THETA_AXIS = AxisSpec("theta", 0.0, math.pi, 91)

MARKOV_WIDTH = 5.0
NON_MARKOV_WIDTH = 0.01


def _sphere(lam, delta, t):
    return dict(axes=(THETA_AXIS, PHI_AXIS), fixed={"lambda": lam, "delta": delta, "gamma": 1.0, "t": t},
                observable="q")


def _detuning_phase(lam, t):
    return dict(axes=(DELTA_AXIS, PHI_AXIS), fixed={"lambda": lam, "gamma": 1.0, "t": t}, observable="s")


def _detuning_coupling(lam):
    return dict(axes=(GAMMA_AXIS, DELTA_AXIS), fixed={"lambda": lam, "t": 500.0}, observable="s_max")


def _detuning_width(t):
    return dict(axes=(LAMBDA_AXIS, DELTA_AXIS), fixed={"gamma": 1.0, "t": t}, observable="s_max")


def _trajectories(lam, t_max, count):
    return dict(axes=(AxisSpec("delta", 0.0, 1.0, 2), AxisSpec("t", 0.0, t_max, count)),
                fixed={"lambda": lam, "gamma": 1.0}, observable="abs_rho10")


def _q_movie(lam, t_max):
    return dict(axes=(AxisSpec("delta", 0.0, 1.0, 2), AxisSpec("t", 0.0, t_max, 6), PHI_AXIS),
                fixed={"lambda": lam, "gamma": 1.0, "theta": math.pi / 2}, observable="q")


PRESETS = {
    "fig1a": _sphere(MARKOV_WIDTH, 0.0, 0.0),
    "fig1b": _sphere(MARKOV_WIDTH, 0.0, 10.0),
    "fig1c": _sphere(NON_MARKOV_WIDTH, 0.0, 10.0),
    "fig1d": _sphere(NON_MARKOV_WIDTH, 1.0, 500.0),
    "fig2a": _trajectories(MARKOV_WIDTH, 10.0, 1001),
    "fig2b": _trajectories(NON_MARKOV_WIDTH, 500.0, 50001),
    "fig3a": _detuning_phase(MARKOV_WIDTH, 1.0),
    "fig3b": _detuning_phase(MARKOV_WIDTH, 2.0),
    "fig3c": _detuning_phase(MARKOV_WIDTH, 5.0),
    "fig3d": _detuning_phase(MARKOV_WIDTH, 30.0),
    "fig4a": _detuning_phase(NON_MARKOV_WIDTH, 1.0),
    "fig4b": _detuning_phase(NON_MARKOV_WIDTH, 20.0),
    "fig4c": _detuning_phase(NON_MARKOV_WIDTH, 100.0),
    "fig4d": _detuning_phase(NON_MARKOV_WIDTH, 500.0),
    "fig5a": _detuning_coupling(0.01),
    "fig5b": _detuning_coupling(0.1),
    "fig6a": _detuning_width(10.0),
    "fig6b": _detuning_width(100.0),
    "sfig1": _q_movie(MARKOV_WIDTH, 10.0),
    "sfig2": _q_movie(NON_MARKOV_WIDTH, 500.0),
    "sfig3a": _detuning_coupling(0.01),
    "sfig3b": _detuning_coupling(0.05),
    "sfig3c": _detuning_coupling(0.1),
    "sfig3d": _detuning_coupling(0.2),
}


def figure_preset(preset_id: str) -> SweepGrid:
    """Grid reproducing one figure panel, e.g. ``figure_preset("fig5a")``."""
    try:
        spec = PRESETS[preset_id]
    except KeyError:
        raise ValidationError(f"unknown figure id {preset_id!r}; known: {', '.join(PRESETS)}", field="id") from None
    return SweepGrid(preset=preset_id, **spec)


# --- tongue extraction ----------------------------------------------------


@dataclass(frozen=True)
class TongueRow:
    """Threshold crossings on one row; ``None`` where none was found on that side."""

    row: float
    left: float | None
    right: float | None

    @property
    def width(self) -> float | None:
        if self.left is None or self.right is None:
            return None
        return self.right - self.left


def _crossing(x: np.ndarray, y: np.ndarray, start: int, step: int, threshold: float):
    above = y[start] >= threshold
    j = start + step
    while 0 <= j < len(y):
        if (y[j] >= threshold) != above:
            i = j - step
            return float(x[i] + (threshold - y[i]) * (x[j] - x[i]) / (y[j] - y[i]))
        j += step
    return None


def tongue_boundary(result: GridResult, threshold: float) -> list[TongueRow]:
    """Detuning values where the observable first crosses ``threshold``, per row.

    Starting at the grid node nearest zero detuning, walk outward in each
    direction and linearly interpolate the first crossing. Rows with no
    crossing on either side are omitted.
    """
    names = [ax.name for ax in result.axes]
    if len(names) != 2 or "delta" not in names:
        raise ValidationError("tongue_boundary needs a 2-D result with a delta axis", field="axis")
    field_ = result.as_array()
    d_index = names.index("delta")
    if d_index == 0:
        field_ = field_.T
    delta = result.axes[d_index].values()
    rows = result.axes[1 - d_index].values()
    centre = int(np.argmin(np.abs(delta)))
    out = []
    for row_value, line in zip(rows, field_):
        left = _crossing(delta, line, centre, -1, threshold)
        right = _crossing(delta, line, centre, +1, threshold)
        if left is not None or right is not None:
            out.append(TongueRow(float(row_value), left, right))
    return out


def band_widths(result: GridResult, threshold: float) -> dict[float, float]:
    """Width of the below-threshold band around zero detuning, per row.

    Rows whose centre is at or above ``threshold`` have width 0. A side with
    no crossing inside the window is censored at the window edge, so the
    width is then a lower bound.
    """
    names = [ax.name for ax in result.axes]
    if len(names) != 2 or "delta" not in names:
        raise ValidationError("band_widths needs a 2-D result with a delta axis", field="axis")
    d_index = names.index("delta")
    field_ = result.as_array() if d_index == 1 else result.as_array().T
    delta = result.axes[d_index].values()
    rows = result.axes[1 - d_index].values()
    centre = int(np.argmin(np.abs(delta)))
    out = {}
    for row_value, line in zip(rows, field_):
        if line[centre] >= threshold:
            out[float(row_value)] = 0.0
            continue
        left = _crossing(delta, line, centre, -1, threshold)
        right = _crossing(delta, line, centre, +1, threshold)
        out[float(row_value)] = (delta[-1] if right is None else right) - (delta[0] if left is None else left)
    return out
