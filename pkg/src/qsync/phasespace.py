"""Husimi Q-function and phase-distribution observables of a qubit state.

Spin-coherent states are ``|theta, phi> = cos(theta/2)|1> + sin(theta/2) e^{i phi}|0>``,
so ``theta = 0`` is the excited state. Angles are in radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import QubitDensityMatrix
from .errors import ValidationError

TWO_PI = 2.0 * math.pi
_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class PhaseSummary:
    """Maximum of the shifted phase distribution and where it sits.

    ``phi_star`` is 0 by convention when the coherence ``r`` vanishes; keep
    ``r`` around to mask that region.
    """

    s_max: float
    phi_star: float
    r: float


def wrap_angle(phi):
    """Map angles to ``[-pi, pi)``."""
    return (np.asarray(phi, dtype=np.float64) + math.pi) % TWO_PI - math.pi


def q_values(rho11, rho10, theta, phi):
    """Vectorised Q-function from raw matrix elements (broadcasting)."""
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta < -_ANGLE_TOL) or np.any(theta > math.pi + _ANGLE_TOL):
        raise ValidationError("theta must lie in [0, pi]", field="theta")
    rho11 = np.asarray(rho11, dtype=np.float64)
    rho10 = np.asarray(rho10, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.float64)
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    coherent = rho10.real * np.cos(phi) - rho10.imag * np.sin(phi)
    return (c * c * rho11 + s * s * (1.0 - rho11) + 2.0 * s * c * coherent) / TWO_PI


def husimi_q(state: QubitDensityMatrix, theta, phi):
    """``Q(theta, phi) = <theta, phi| rho |theta, phi> / (2 pi)``.

    Works on scalars or broadcastable arrays of angles; nonnegative and at
    most ``1 / (2 pi)``.
    """
    out = q_values(state.rho11, state.rho10, theta, phi)
    return float(out) if out.ndim == 0 else out


def s_values(rho10, phi):
    """Vectorised shifted phase distribution ``Re(rho10 e^{i phi}) / 4``."""
    rho10 = np.asarray(rho10, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.float64)
    return 0.25 * (rho10.real * np.cos(phi) - rho10.imag * np.sin(phi))


def shifted_phase_distribution(state: QubitDensityMatrix, phi):
    """Phase marginal of Q minus the uniform value ``1/(2 pi)``.

    The theta integral is done analytically, leaving
    ``S(phi) = Re(rho10 e^{i phi}) / 4``, bounded by ``1/8`` in magnitude.
    """
    out = s_values(state.rho10, phi)
    return float(out) if out.ndim == 0 else out


def phase_summary(state: QubitDensityMatrix) -> PhaseSummary:
    r = abs(state.rho10)
    if r == 0.0:
        return PhaseSummary(s_max=0.0, phi_star=0.0, r=0.0)
    phi_star = float(wrap_angle(-np.angle(state.rho10)))
    return PhaseSummary(s_max=0.25 * r, phi_star=phi_star, r=r)


def summary_values(rho10):
    """Vectorised :func:`phase_summary`: returns ``(s_max, phi_star)`` arrays."""
    rho10 = np.asarray(rho10, dtype=np.complex128)
    r = np.abs(rho10)
    phi_star = np.where(r == 0.0, 0.0, wrap_angle(-np.angle(rho10)))
    return 0.25 * r, phi_star
