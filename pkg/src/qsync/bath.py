"""Lorentzian bath parameters, spectral density and correlation kernel.

All rates are measured in units of the reference coupling ``gamma0`` and all
times are the dimensionless product ``gamma0 * t``; ``gamma0`` is therefore
exactly 1.0 inside the library.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Mapping

from .errors import ValidationError

#: Half-width of the band around ``lam == 2 * gamma`` labelled as the boundary.
REGIME_TOL = 1e-12


class Regime(str, enum.Enum):
    MARKOVIAN = "Markovian"
    NON_MARKOVIAN = "NonMarkovian"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class BathParams:
    """Qubit + Lorentzian bath parameters in units of ``gamma0``.

    Parameters
    ----------
    gamma : float
        System-bath coupling strength (the value swept as "coupling" in the
        tongue diagrams). Must be > 0.
    lam : float
        Spectral width of the Lorentzian. Must be > 0.
    delta : float
        Detuning between the qubit frequency and the centre of the bath
        spectrum. Any finite value.
    gamma0 : float
        Reference rate; fixed to 1.0.
    """

    gamma: float = 1.0
    lam: float = 1.0
    delta: float = 0.0
    gamma0: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "lam", "delta", "gamma0"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"{_public(name)} must be a real number, got {value!r}", field=_public(name))
            if not math.isfinite(value):
                raise ValidationError(f"{_public(name)} must be finite, got {value!r}", field=_public(name))
            object.__setattr__(self, name, value)
        if self.gamma <= 0.0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma!r}", field="gamma")
        if self.lam <= 0.0:
            raise ValidationError(f"lambda must be > 0, got {self.lam!r}", field="lambda")
        if self.gamma0 != 1.0:
            raise ValidationError("gamma0 is the unit of rates and must be 1.0; rescale inputs", field="gamma0")

    @classmethod
    def uncoupled(cls, lam: float = 1.0, delta: float = 0.0) -> "BathParams":
        """Zero-coupling parameter set (vanishing kernel); for solver tests only."""
        self = cls.__new__(cls)
        object.__setattr__(self, "gamma", 0.0)
        object.__setattr__(self, "lam", float(lam))
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "gamma0", 1.0)
        return self

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "BathParams":
        """Build from a mapping using the external names ``gamma``, ``lambda``, ``delta``."""
        kwargs = {}
        for key, attr in (("gamma", "gamma"), ("lambda", "lam"), ("delta", "delta")):
            if key in values:
                kwargs[attr] = values[key]
        return cls(**kwargs)

    @property
    def alpha(self) -> complex:
        """Complex decay constant ``lam - i*delta`` of the correlation kernel."""
        return complex(self.lam, -self.delta)

    @property
    def omega(self) -> complex:
        """Principal square root of ``alpha**2 - 2*gamma*lam``."""
        return cmath.sqrt(self.alpha * self.alpha - 2.0 * self.gamma * self.lam)

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "lambda": self.lam, "delta": self.delta}


def _public(name: str) -> str:
    return "lambda" if name == "lam" else name


def spectral_density(params: BathParams, omega_shift: float) -> float:
    """Lorentzian ``J`` as a function of ``u = omega0 - omega``.

    ``J(u) = gamma * lam**2 / (2*pi * ((u - delta)**2 + lam**2))``, peaked at
    ``u = delta`` with total weight ``gamma * lam / 2``.
    """
    x = omega_shift - params.delta
    return params.gamma * params.lam**2 / (2.0 * math.pi * (x * x + params.lam**2))


def correlation_kernel(params: BathParams, dt: float) -> complex:
    """Bath two-time correlation ``f(dt) = (gamma*lam/2) * exp(-(lam - i*delta)*dt)``.

    This is the Fourier transform of :func:`spectral_density` with the phase
    convention ``exp(+i*u*dt)``; with it the memory equation
    ``h' = -int_0^t f(t - s) h(s) ds`` reproduces the closed-form amplitude.
    """
    if dt < 0:
        raise ValidationError(f"dt must be >= 0, got {dt!r}", field="dt")
    return 0.5 * params.gamma * params.lam * cmath.exp(-params.alpha * dt)


def classify_regime(params: BathParams) -> Regime:
    """Markovian iff ``lam > 2*gamma``; non-Markovian iff ``lam < 2*gamma``."""
    gap = params.lam - 2.0 * params.gamma
    if abs(gap) <= REGIME_TOL:
        return Regime.BOUNDARY
    return Regime.MARKOVIAN if gap > 0 else Regime.NON_MARKOVIAN
