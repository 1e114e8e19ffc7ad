"""Continuous data assimilation by (possibly nonlinear) feedback nudging.

The assimilated state ``v`` obeys the model equation plus the forcing
``mu * N(I_h u - I_h v)``, where ``I_h`` keeps the lowest Fourier modes of
the reference ``u`` and ``N`` is one of the feedback laws below, applied
pointwise in physical space.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .kse import BlowUpError, EtdCoefficients, etd1_step
from .spectral import SpectralGrid, dealias, to_physical, to_spectral

__all__ = [
    "LawKind",
    "FeedbackLaw",
    "Observer",
    "observe",
    "apply_law",
    "feedback_term",
    "coupled_step",
    "StabilityResult",
    "stability_check",
]


class LawKind(str, enum.Enum):
    LINEAR = "linear"
    POWER = "power"
    HYBRID = "hybrid"
    CONCAVE_CONVEX = "cc"

    @classmethod
    def parse(cls, name: str) -> "LawKind":
        aliases = {"concave_convex": cls.CONCAVE_CONVEX, "concave-convex": cls.CONCAVE_CONVEX}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            known = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown feedback law {name!r} (expected one of {known})") from None


@dataclass(frozen=True)
class FeedbackLaw:
    """Feedback nonlinearity with exponent ``gamma`` and gain ``mu``.

    ``power``: ``x |x|^-gamma`` everywhere.
    ``hybrid``: linear for ``|x| >= 1``, power below.
    ``cc`` (concave-convex): ``x |x|^gamma`` for ``|x| >= 1``, power below.
    """

    kind: LawKind = LawKind.LINEAR
    gamma: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LawKind.parse(self.kind) if isinstance(self.kind, str) else self.kind)
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma!r}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu!r}")

    @property
    def label(self) -> str:
        if self.kind is LawKind.LINEAR:
            return "linear"
        return f"{self.kind.value}_g{self.gamma:g}"

    def __call__(self, x):
        return apply_law(self, x)


@dataclass(frozen=True)
class Observer:
    """Projection onto Fourier modes ``1..mode_cutoff``."""

    mode_cutoff: int = 32

    def __post_init__(self):
        if int(self.mode_cutoff) != self.mode_cutoff or self.mode_cutoff < 1:
            raise ValueError(f"mode_cutoff must be a positive integer, got {self.mode_cutoff!r}")

    def check(self, g: SpectralGrid) -> None:
        if self.mode_cutoff > g.dealias_cutoff:
            raise ValueError(
                f"mode_cutoff {self.mode_cutoff} exceeds the dealiased band "
                f"(floor(N/3) = {g.dealias_cutoff} for N = {g.n_points})"
            )


def observe(s, o: Observer, g: SpectralGrid | None = None) -> np.ndarray:
    s = np.asarray(s)
    if g is not None:
        o.check(g)
    elif o.mode_cutoff > (s.shape[-1] - 1) * 2 // 3:
        raise ValueError(f"mode_cutoff {o.mode_cutoff} exceeds the dealiased band")
    out = np.zeros_like(s, dtype=complex)
    out[..., 1:o.mode_cutoff + 1] = s[..., 1:o.mode_cutoff + 1]
    return out


def _signed_power(x, p):
    # |0|**p is never formed with p < 0 here, and sign(0) = 0 pins N(0) = 0
    return np.sign(x) * np.abs(x) ** p


def apply_law(law: FeedbackLaw, x):
    """Evaluate the feedback nonlinearity elementwise (without the gain)."""
    x = np.asarray(x, dtype=float)
    kind, gamma = law.kind, law.gamma
    if kind is LawKind.LINEAR:
        out = x.copy()
    elif kind is LawKind.POWER:
        out = _signed_power(x, 1.0 - gamma)
    else:
        ax = np.abs(x)
        big = ax >= 1.0
        small = _signed_power(x, 1.0 - gamma)
        if kind is LawKind.HYBRID:
            out = np.where(big, x, small)
        else:
            out = np.where(big, _signed_power(x, 1.0 + gamma), small)
    return out[()] if out.ndim == 0 else out


def feedback_term(u_hat, v_hat, o: Observer, law: FeedbackLaw, g: SpectralGrid) -> np.ndarray:
    """Spectral forcing ``mu * N(I_h u - I_h v)``, dealiased and mean-free."""
    diff = observe(np.asarray(u_hat) - np.asarray(v_hat), o, g)
    if law.kind is LawKind.LINEAR or law.gamma == 0.0:
        # every law reduces to the identity at gamma = 0
        out = law.mu * diff
    else:
        d = to_physical(diff, g)
        out = law.mu * dealias(to_spectral(apply_law(law, d), g), g)
    out[..., 0] = 0.0
    return out


def coupled_step(u_hat, v_hat, c: EtdCoefficients, o: Observer, law: FeedbackLaw,
                 g: SpectralGrid, *, t=None):
    """Advance reference and assimilated states together by one step.

    The feedback uses both states as they are at the start of the step.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        forcing = feedback_term(u_hat, v_hat, o, law, g)
    try:
        u_new = etd1_step(u_hat, c, g, t=t)
    except BlowUpError as exc:
        raise BlowUpError(t, "reference") from exc
    try:
        v_new = etd1_step(v_hat, c, g, forcing, t=t)
    except BlowUpError as exc:
        raise BlowUpError(t, law.label) from exc
    return u_new, v_new


@dataclass(frozen=True)
class StabilityResult:
    ok: bool
    bound: float
    message: str

    def __bool__(self):
        return self.ok


def stability_check(mu: float, dt: float) -> StabilityResult:
    """Explicit Euler treatment of the feedback requires ``dt < 2/mu``."""
    if mu <= 0:
        return StabilityResult(True, float("inf"), "no feedback, no step restriction")
    bound = 2.0 / mu
    if dt < bound:
        return StabilityResult(True, bound, f"dt = {dt:g} < 2/mu = {bound:g}")
    return StabilityResult(False, bound, f"time step violates dt < 2/mu: dt = {dt:g}, 2/mu = {bound:g}")
