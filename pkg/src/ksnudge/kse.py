"""Kuramoto-Sivashinsky model ``u_t + u u_x + lam u_xx + u_xxxx = 0``.

Time stepping is first-order exponential time differencing (ETD1): the
linear part is propagated exactly and the nonlinear term, plus any external
forcing, is treated explicitly with the phi_1 weight.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralGrid,
    dealias,
    project_mean_free,
    spectral_derivative,
    to_physical,
    to_spectral,
)

__all__ = [
    "DEFAULT_DT",
    "BlowUpError",
    "KseParams",
    "EtdCoefficients",
    "ScalingResult",
    "linear_symbol",
    "phi1",
    "precompute_etd",
    "nonlinear_term",
    "etd1_step",
    "initial_condition",
    "nondimensionalize",
]

DEFAULT_DT = 2.0**-13
_TAYLOR_RADIUS = 1e-5


class BlowUpError(FloatingPointError):
    """A non-finite coefficient appeared during time stepping."""

    def __init__(self, t, trajectory=None):
        self.t = t
        self.trajectory = trajectory
        where = f" in trajectory {trajectory!r}" if trajectory is not None else ""
        super().__init__(f"non-finite state at t={t}{where}")


@dataclass(frozen=True)
class KseParams:
    lam: float = 2.0
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")


@dataclass(frozen=True)
class EtdCoefficients:
    """Per-mode ETD1 factors ``exp(L dt)`` and ``dt * phi1(L dt)``."""

    propagator: np.ndarray
    phi_weight: np.ndarray
    dt: float


@dataclass(frozen=True)
class ScalingResult:
    lam: float
    time_scale: float
    velocity_scale: float
    intrinsic_length: float


def linear_symbol(g: SpectralGrid, lam: float) -> np.ndarray:
    """Fourier symbol ``lam k^2 - k^4`` of ``-lam d_xx - d_xxxx``."""
    k2 = g.k**2
    return lam * k2 - k2 * k2


def phi1(z):
    """``(exp(z) - 1) / z`` with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < _TAYLOR_RADIUS
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 + z / 2.0 + z * z / 6.0 + z**3 / 24.0, np.expm1(safe) / safe)
    return out[()] if out.ndim == 0 else out


def precompute_etd(g: SpectralGrid, p: KseParams) -> EtdCoefficients:
    z = linear_symbol(g, p.lam) * p.dt
    propagator = np.exp(z)
    phi_weight = p.dt * phi1(z)
    for arr in (propagator, phi_weight):
        arr.setflags(write=False)
    return EtdCoefficients(propagator, phi_weight, p.dt)


def nonlinear_term(s, g: SpectralGrid) -> np.ndarray:
    """Dealiased spectrum of ``-u u_x``; products formed in physical space."""
    u = to_physical(s, g)
    ux = to_physical(spectral_derivative(s, g, 1), g)
    return -dealias(to_spectral(u * ux, g), g)


def etd1_step(s, c: EtdCoefficients, g: SpectralGrid, forcing=None, *, t=None,
              nonlinear=True) -> np.ndarray:
    """Advance one ETD1 step.

    ``forcing`` is an extra explicit right-hand side (the assimilation
    feedback) sharing the phi_1 weight of the nonlinear term. ``t`` is only
    used to label a :class:`BlowUpError`. ``nonlinear=False`` drops the
    advective term, leaving the exactly integrated linear dynamics.
    """
    # overflow is reported below as BlowUpError rather than as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        rhs = nonlinear_term(s, g) if nonlinear else np.zeros_like(s, dtype=complex)
        if forcing is not None:
            rhs = rhs + forcing
        out = c.propagator * s + c.phi_weight * rhs
    out[..., 0] = 0.0
    if not np.isfinite(out).all():
        raise BlowUpError(t)
    return out


def initial_condition(g: SpectralGrid) -> np.ndarray:
    """Spectrum of ``cos(x/16) (1 + sin(x/16))``, the standard 32*pi test datum."""
    if not math.isclose(g.length, 32 * math.pi, rel_tol=1e-12):
        warnings.warn(
            f"initial condition is meant for L = 32*pi, grid has L = {g.length}",
            stacklevel=2,
        )
    x = g.x
    u0 = np.cos(x / 16) * (1 + np.sin(x / 16))
    return project_mean_free(dealias(to_spectral(u0, g), g))


def nondimensionalize(a: float, b: float, length: float) -> ScalingResult:
    """Scales for ``u_t + u u_x + a u_xx + b u_xxxx = 0`` on a domain of ``length``.

    Returns ``lam = a L^2 / b`` with time and velocity scales ``L^4/b`` and
    ``b/L^3``, plus the intrinsic length ``sqrt(b/a)`` of the alternative
    scaling.
    """
    for name, val in (("a", a), ("b", b), ("length", length)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val!r}")
    return ScalingResult(
        lam=a * length**2 / b,
        time_scale=length**4 / b,
        velocity_scale=b / length**3,
        intrinsic_length=math.sqrt(b / a),
    )
