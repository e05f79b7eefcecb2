"""Exact qubit dynamics in a Lorentzian bath and its phase-synchronization observables."""

__version__ = "0.1.0"

from ._core import BACKEND  # noqa: E402
from .bath import BathParams, Regime, classify_regime, correlation_kernel, spectral_density  # noqa: E402
from .dynamics import (  # noqa: E402
    PLUS_STATE,
    EvolutionAmplitude,
    InitialState,
    QubitDensityMatrix,
    coherence_trajectory,
    detect_backflow,
    evolve,
    h_closed_form,
    volterra_solve,
)
from .errors import BudgetError, NumericalError, QsyncError, ValidationError  # noqa: E402
from .phasespace import PhaseSummary, husimi_q, phase_summary, shifted_phase_distribution  # noqa: E402
from .sweep import AxisSpec, GridResult, SweepGrid, figure_preset, run_sweep, tongue_boundary  # noqa: E402

__all__ = [
    "BACKEND",
    "AxisSpec",
    "BathParams",
    "BudgetError",
    "EvolutionAmplitude",
    "GridResult",
    "InitialState",
    "NumericalError",
    "PLUS_STATE",
    "PhaseSummary",
    "QsyncError",
    "QubitDensityMatrix",
    "Regime",
    "SweepGrid",
    "ValidationError",
    "classify_regime",
    "coherence_trajectory",
    "correlation_kernel",
    "detect_backflow",
    "evolve",
    "figure_preset",
    "h_closed_form",
    "husimi_q",
    "phase_summary",
    "run_sweep",
    "shifted_phase_distribution",
    "spectral_density",
    "tongue_boundary",
    "volterra_solve",
]
