"""Periodic 1D Fourier discretization.

Fields live either in physical space (``N`` real samples at
``x_j = -L/2 + j*dx``) or as the Hermitian half-spectrum of Fourier-series
coefficients ``u_hat[m]``, ``m = 0..N/2``, normalized so that

    u(x) = sum_m u_hat[m] * exp(i k_m x),   k_m = 2*pi*m/L

(the sum running over negative modes through conjugate symmetry). With this
convention ``cos(k x)`` has coefficient 1/2 and the mean-square norm is a
plain weighted sum of squared coefficients.

All functions accept arrays with extra leading axes; the transform axis is
always the last one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralGrid",
    "make_grid",
    "to_spectral",
    "to_physical",
    "spectral_derivative",
    "dealias",
    "l2_norm",
    "h1_norm",
    "project_mean_free",
]


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid on ``[-L/2, L/2)`` with ``n_points`` samples.

    Use :func:`make_grid` to build one; it validates the inputs.
    """

    n_points: int
    length: float
    k: np.ndarray = field(init=False, repr=False, compare=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)
    _shift: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.arange(self.n_points // 2 + 1)
        k = 2.0 * np.pi * m / self.length
        x = -0.5 * self.length + np.arange(self.n_points) * self.dx
        # exp(-i k_m L/2) = (-1)^m: phase between grid-origin and x=0 coefficients
        shift = np.where(m % 2 == 0, 1.0, -1.0)
        for name, arr in (("k", k), ("x", x), ("_shift", shift)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def n_modes(self) -> int:
        """Number of stored coefficients, ``N/2 + 1``."""
        return self.n_points // 2 + 1

    @property
    def dealias_cutoff(self) -> int:
        """Highest mode index kept by the 2/3 rule, ``floor(N/3)``."""
        return self.n_points // 3

    def wavenumber(self, m):
        return 2.0 * np.pi * np.asarray(m) / self.length

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n_modes, dtype=complex)


def make_grid(n_points: int, length: float) -> SpectralGrid:
    if int(n_points) != n_points or n_points < 8 or n_points % 2:
        raise ValueError(f"n_points must be an even integer >= 8, got {n_points!r}")
    if not (np.isfinite(length) and length > 0):
        raise ValueError(f"length must be positive, got {length!r}")
    return SpectralGrid(int(n_points), float(length))


def _check_size(arr: np.ndarray, expected: int, what: str) -> None:
    if arr.shape[-1] != expected:
        raise ValueError(f"{what} has {arr.shape[-1]} entries along the last axis, grid expects {expected}")


def to_spectral(f, g: SpectralGrid) -> np.ndarray:
    """Physical samples -> Fourier-series coefficients (forward scaled by 1/N)."""
    f = np.asarray(f, dtype=float)
    _check_size(f, g.n_points, "physical field")
    return np.fft.rfft(f, axis=-1) * (g._shift / g.n_points)


def to_physical(s, g: SpectralGrid) -> np.ndarray:
    """Fourier-series coefficients -> real physical samples."""
    s = np.asarray(s)
    _check_size(s, g.n_modes, "spectral field")
    return np.fft.irfft(s * (g._shift * g.n_points), n=g.n_points, axis=-1)


def spectral_derivative(s, g: SpectralGrid, order: int = 1) -> np.ndarray:
    """Multiply mode ``m`` by ``(i k_m)**order``."""
    s = np.asarray(s)
    _check_size(s, g.n_modes, "spectral field")
    if order < 1 or int(order) != order:
        raise ValueError(f"order must be a positive integer, got {order!r}")
    return s * (1j * g.k) ** int(order)


def dealias(s, g: SpectralGrid) -> np.ndarray:
    """Zero every mode with index above ``floor(N/3)``, Nyquist included."""
    s = np.asarray(s)
    _check_size(s, g.n_modes, "spectral field")
    out = s.copy()
    out[..., g.dealias_cutoff + 1:] = 0.0
    return out


def l2_norm(s) -> np.ndarray | float:
    """Root-mean-square of the field, from its coefficients (Parseval).

    The Nyquist coefficient of an even-length real transform is its own
    conjugate partner, so it is counted once.
    """
    s = np.asarray(s)
    a2 = np.abs(s) ** 2
    total = a2[..., 0] + 2.0 * a2[..., 1:-1].sum(axis=-1) + a2[..., -1]
    return np.sqrt(total)


def h1_norm(s, g: SpectralGrid):
    return l2_norm(spectral_derivative(s, g, 1))


def project_mean_free(s) -> np.ndarray:
    out = np.array(s, dtype=complex)
    out[..., 0] = 0.0
    return out
