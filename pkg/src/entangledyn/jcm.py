"""Closed-form single-mode Jaynes-Cummings dynamics from the vacuum field.

Detuning convention: ``delta = omega_atom - omega_mode``. The multimode
module uses ``delta_k = omega_k - omega_atom``, so a single-mode
:class:`~entangledyn.multimode.ModeSet` with detuning ``d`` corresponds to
``JcmParams(delta=-d)``. All entanglement measures are even in ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from . import core
from .core import BlochVector, TruncatedState
from .errors import ValidationError


@dataclass(frozen=True)
class JcmParams:
    """Single-mode parameters.

    Parameters
    ----------
    g : float
        Atom-field coupling (angular frequency), nonnegative.
    delta : float
        Atomic minus mode frequency.
    omega : float
        Mode frequency; only enters the global phase of ``u``.
    """

    g: float = 1.0
    delta: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.g >= 0:
            raise ValidationError(f"coupling g={self.g} must be nonnegative")
        if not self.omega > 0:
            raise ValidationError(f"mode frequency omega={self.omega} must be positive")
        if not np.isfinite(self.delta):
            raise ValidationError("detuning must be finite")

    @property
    def rabi(self) -> float:
        """Splitting ``sqrt(delta^2 + 4 g^2)`` of the dressed doublet."""
        return float(np.hypot(self.delta, 2.0 * self.g))

    @property
    def odd_minimum_depth(self) -> float:
        """``m = delta^2 / (delta^2 + 4 g^2)``, the value of ``|u|^2`` at rabi*t = pi."""
        r2 = self.delta**2 + 4.0 * self.g**2
        return float(self.delta**2 / r2) if r2 > 0 else 1.0


def _check_times(t: ArrayLike) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("times must be nonnegative")
    return t


def _doublet(t: np.ndarray, p: JcmParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``cos(rabi t / 2)``, ``sin(rabi t / 2)`` and ``delta / rabi``."""
    rabi = p.rabi
    half = 0.5 * rabi * t
    ratio = p.delta / rabi if rabi > 0 else 0.0
    return np.cos(half), np.sin(half), ratio


def jcm_u(t: ArrayLike, p: JcmParams) -> np.ndarray | complex:
    """Amplitude ``<e,0|psi(t)>`` for an atom starting excited in the vacuum.

    ``u(t) = exp(-i(omega + delta/2) t) [cos(rabi t/2) - i (delta/rabi) sin(rabi t/2)]``,
    which is the two-exponential form with weights ``(rabi +/- delta)/(2 rabi)``.
    """
    t = _check_times(t)
    c, s, ratio = _doublet(t, p)
    u = np.exp(-1j * (p.omega + 0.5 * p.delta) * t) * (c - 1j * ratio * s)
    return u if u.ndim else complex(u)


def field_population(t: ArrayLike, p: JcmParams) -> np.ndarray | float:
    """Photon probability ``1 - |u|^2 = (2g/rabi)^2 sin^2(rabi t / 2)``."""
    t = _check_times(t)
    rabi = p.rabi
    if rabi == 0:
        out = np.zeros_like(t)
    else:
        out = (2.0 * p.g / rabi) ** 2 * np.sin(0.5 * rabi * t) ** 2
    return out if out.ndim else float(out)


def jcm_pure_series(
    grid: ArrayLike, theta: float, p: JcmParams, measure: str = "LN"
) -> np.ndarray:
    """Entanglement of a pure initial atom over a time grid.

    Parameters
    ----------
    grid : array_like
        Sorted nonnegative times.
    theta : float
        Polar angle of the initial atomic state. The azimuth drops out.
    measure : {"LN", "EOE"}
    """
    t = _check_times(grid)
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise ValidationError("time grid must be sorted")
    u = np.abs(jcm_u(t, p))
    q = field_population(t, p)
    key = measure.upper()
    if key == "LN":
        return np.asarray(core.ln_from_u(u, theta, q), dtype=float)
    if key == "EOE":
        return np.asarray(core.eoe_from_u(u, theta, q), dtype=float)
    raise ValidationError(f"unknown measure {measure!r}")


def dressed_propagator(t: float, p: JcmParams) -> np.ndarray:
    """Interaction-picture propagator on ``(|g,0>, |e,0>, |g,1>)``.

    The one-excitation block is ``[[0, g], [g, -delta]]`` (photon energy
    relative to the atom), exponentiated in closed form via its dressed
    states; ``|g,0>`` is an invariant zero-energy level.
    """
    c, s, ratio = _doublet(np.asarray(float(t)), p)
    c, s = float(c), float(s)
    rabi = p.rabi
    mix = 2.0 * p.g / rabi if rabi > 0 else 0.0
    # block = -delta/2 * I + (rabi/2) n.sigma with n = (2g, 0, delta)/rabi
    phase = np.exp(0.5j * p.delta * t)
    u = np.eye(3, dtype=complex)
    u[1, 1] = phase * (c - 1j * ratio * s)
    u[2, 2] = phase * (c + 1j * ratio * s)
    u[1, 2] = u[2, 1] = -1j * phase * mix * s
    return u


def jcm_mixed_evolution(t: float, b: BlochVector, p: JcmParams) -> TruncatedState:
    """Exact ``chi(t)`` for an arbitrary initial atom and vacuum field (M = 1)."""
    if t < 0:
        raise ValidationError("time must be nonnegative")
    rho = core.bloch_to_density(b)
    # reachable basis (g0, e0, g1); e0 <-> rho[0,0], g0 <-> rho[1,1]
    chi3 = np.array(
        [[rho[1, 1], rho[1, 0], 0], [rho[0, 1], rho[0, 0], 0], [0, 0, 0]], dtype=complex
    )
    u = dressed_propagator(t, p)
    chi3 = u @ chi3 @ u.conj().T
    slots = [
        core.index("g", 0, 1),
        core.index("e", 0, 1),
        core.index("g", 1, 1),
    ]
    full = np.zeros((4, 4), dtype=complex)
    full[np.ix_(slots, slots)] = chi3
    return TruncatedState(1, full)


def bloch_precession_axis(p: JcmParams) -> np.ndarray:
    """Hamiltonian vector ``(g, 0, -delta/2)`` on the one-excitation Bloch sphere."""
    return np.array([p.g, 0.0, -0.5 * p.delta])
