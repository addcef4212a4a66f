"""Atom inside a perfect planar cavity: continuum field, memory kernel and poles.

Units have ``c = 1``, so the mode spacing along one transverse branch is
``pi / L``. The transverse continuum turns every longitudinal index ``n``
into a branch of modes starting at ``b_n = pi |n| / L``. The high-frequency
regulator ``exp(-k epsilon)`` is a model parameter and is never sent to zero.

In the Laplace variable ``z`` the survival amplitude is
``1 / (z + i omega0 + mu(z))``. Its dominant pole ``z_p = -gamma - i Omega``
fixes the long-time decay of atomic coherence and of the entanglement.
``mu`` is evaluated on the sheet reached from ``Re z > 0``. In the variable
``x = L z / (i pi)`` its cuts are the upward rays at ``x = 0, -1, -2, ...``,
which in the ``z`` plane are the horizontal rays ``Im z = -b_n``,
``Re z <= 0``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from . import core
from .errors import (
    BranchCutError,
    ConvergenceError,
    CutCrossingError,
    DegenerateRootsError,
    NearResonanceError,
    PoleSearchError,
    SinglePoleError,
    ValidationError,
)
from .special import EULER_GAMMA, _digamma, _ln_up, _log_gamma, distance_to_cuts

RESONANCE_GUARD = 0.05
NEWTON_TOL = 1e-9
NEWTON_MAX_ITER = 200
MAX_HALVINGS = 60
MAX_STEP = 0.25


@dataclass(frozen=True)
class CavityParams:
    """Continuum cavity parameters.

    Parameters
    ----------
    lam : float
        Dimensionless overall coupling.
    L : float
        Mirror separation (``c = 1``).
    epsilon : float
        Cutoff time of the regulator ``exp(-k epsilon)``.
    omega0 : float
        Bare atomic frequency. The frequency appearing in the pole equation
        is ``omega_tilde = omega0 - lam^2 / (pi^2 epsilon)``, which must be positive.
    """

    lam: float
    L: float
    epsilon: float
    omega0: float = 1.0

    def __post_init__(self):
        for name in ("lam", "L", "epsilon", "omega0"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.lam < 0:
            raise ValidationError("coupling lam must be nonnegative")
        if self.L <= 0 or self.epsilon <= 0 or self.omega0 <= 0:
            raise ValidationError("L, epsilon and omega0 must be positive")
        if self.omega_tilde <= 0:
            raise ValidationError(
                "renormalized frequency omega0 - lam^2/(pi^2 epsilon) must be positive"
            )
        if self.epsilon * self.omega0 >= 0.1:
            warnings.warn(
                f"epsilon*omega0 = {self.epsilon * self.omega0:g} is not small; "
                "the Laplace-domain kernel drops O(epsilon) terms",
                stacklevel=2,
            )

    @classmethod
    def from_ratios(
        cls,
        lam: float,
        eps_omega0: float,
        resonance: float,
        omega0: float = 1.0,
        renormalized: bool = False,
    ) -> "CavityParams":
        """Build from ``lam``, ``epsilon * omega`` and ``L Omega_inf / pi``.

        With ``renormalized=True`` the given ``omega0`` is taken as
        ``omega_tilde`` and ``eps_omega0`` as ``epsilon * omega_tilde``.
        """
        if resonance <= 0:
            raise ValidationError("L Omega_inf / pi must be positive")
        eps = eps_omega0 / omega0
        bare = omega0 + lam**2 / (math.pi**2 * eps) if renormalized else omega0
        probe = cls(lam, 1.0, eps, bare)
        L = resonance * math.pi / omega_infinity(probe)
        return cls(lam, L, eps, bare)

    @property
    def omega_tilde(self) -> float:
        return self.omega0 - self.lam**2 / (math.pi**2 * self.epsilon)

    @property
    def fsr(self) -> float:
        """Mode spacing ``pi / L``."""
        return math.pi / self.L

    @property
    def prefactor(self) -> float:
        """Kernel normalization ``lam^2 / (2 pi L)``."""
        return self.lam**2 / (2.0 * math.pi * self.L)

    @property
    def resonance(self) -> float:
        """``L Omega_inf / pi``: dressed frequency in units of the mode spacing."""
        return self.L * omega_infinity(self) / math.pi

    @property
    def decay_estimate(self) -> float:
        """Leading-order decay rate ``(lam^2/L)(floor(L Omega_inf/pi) + 1/2)``."""
        return self.lam**2 / self.L * (math.floor(self.resonance) + 0.5)


@dataclass(frozen=True)
class CavityPole:
    """A root ``z_p`` of ``z + i omega0 + mu(z)`` with its residue."""

    z_p: complex
    residue: complex
    method: str
    residual: float = field(default=float("nan"), compare=False)

    @property
    def gamma(self) -> float:
        return -self.z_p.real

    @property
    def Omega(self) -> float:
        return -self.z_p.imag


def _x_of(z: complex, cp: CavityParams) -> complex:
    return -1j * cp.L * z / math.pi


def mu_time(s: ArrayLike, cp: CavityParams) -> np.ndarray | complex:
    """Regularized memory kernel ``mu(s)``.

    ``P / (epsilon + i s) * (1 + q) / (1 - q)`` with
    ``q = exp(-i pi (s - i epsilon) / L)`` and ``P = lam^2 / (2 pi L)``,
    the resummed form of ``P sum_n int_{b_n}^inf exp(-i k s - k epsilon) dk``
    over the branches ``n``.
    """
    s = np.asarray(s, dtype=complex)
    a = cp.epsilon + 1j * s
    if np.any(np.abs(a) == 0):
        raise ValidationError("kernel singular at s = i epsilon")
    if np.any(s.imag >= cp.epsilon):
        raise ValidationError("branch sum diverges for Im s >= epsilon")
    q = np.exp(-math.pi * a / cp.L)
    out = cp.prefactor / a * (1 + q) / (1 - q)
    return out if out.ndim else complex(out)


def _bracket(x: complex, cp: CavityParams) -> complex:
    h = cp.epsilon * math.pi / cp.L
    return (
        _log_gamma(x)
        + 0.5 * _ln_up(x / (2.0 * math.pi))
        + x * (1.0 + EULER_GAMMA + math.log(h))
    )


def mu_remainder(z: complex, cp: CavityParams) -> complex:
    """``mu(z)`` minus its cutoff-dominated constant ``-i lam^2 / (pi^2 epsilon)``."""
    if cp.lam == 0:
        return 0j
    z = complex(z)
    return -1j * cp.lam**2 / (math.pi * cp.L) * _bracket(_x_of(z, cp), cp)


def mu_laplace(z: ArrayLike, cp: CavityParams) -> np.ndarray | complex:
    """Small-cutoff Laplace transform of the memory kernel.

    With ``x = L z / (i pi)`` and ``h = epsilon pi / L``::

        mu(z) = -i lam^2 / (pi^2 eps)
                - (i lam^2 / (pi L)) [lnG(x) + ln(x / 2 pi) / 2 + x (1 + gamma_e + ln h)]

    which is the same as ``-(lam^2/pi^2) z ln(-i e^gamma_e eps z)`` plus the
    Gamma-function correction, once the ``x ln x`` pieces of the two are
    combined. The discarded terms are ``O(epsilon)``.

    Raises
    ------
    BranchCutError
        If ``x`` lies on one of the cut rays.
    """
    if np.ndim(z):
        return np.array([mu_laplace(complex(v), cp) for v in np.ravel(z)]).reshape(np.shape(z))
    if cp.lam == 0:
        return 0j
    return -1j * cp.lam**2 / (math.pi**2 * cp.epsilon) + mu_remainder(z, cp)


def mu_laplace_derivative(z: complex, cp: CavityParams) -> complex:
    """Analytic ``d mu / dz = -(lam^2/pi^2)[psi(x) + 1/(2x) + 1 + gamma_e + ln h]``."""
    if cp.lam == 0:
        return 0j
    x = _x_of(complex(z), cp)
    if distance_to_cuts(x) <= 1e-12:
        raise BranchCutError(f"derivative requested on a branch cut at z={z}")
    h = cp.epsilon * math.pi / cp.L
    return -(cp.lam**2 / math.pi**2) * (
        _digamma(x) + 0.5 / x + 1.0 + EULER_GAMMA + math.log(h)
    )


def characteristic(z: complex, cp: CavityParams) -> complex:
    """``z + i omega0 + mu(z)``, evaluated as ``z + i omega_tilde + remainder``."""
    return complex(z) + 1j * cp.omega_tilde + mu_remainder(z, cp)


def omega_infinity(cp: CavityParams) -> float:
    """Dressed frequency ``w + (lam^2 w / pi^2) ln(e^gamma_e eps w)``, ``w = omega_tilde``.

    Examples
    --------
    >>> cp = CavityParams(0.0, 1.0, 1e-3, 1.0)
    >>> omega_infinity(cp)
    1.0
    """
    w = cp.omega_tilde
    if w <= 0:
        raise ValidationError("omega_tilde must be positive")
    return w + cp.lam**2 * w / math.pi**2 * (EULER_GAMMA + math.log(cp.epsilon * w))


def resonance_offset(cp: CavityParams) -> tuple[int, float]:
    """Nearest branch index ``n`` and signed offset ``L Omega_inf / pi - n``."""
    r = cp.resonance
    n = max(0, int(round(r)))
    return n, r - n


def residue_at(z_p: complex | CavityPole, cp: CavityParams) -> complex:
    """Residue ``1 / (1 + mu'(z_p))`` of the survival amplitude."""
    z = z_p.z_p if isinstance(z_p, CavityPole) else complex(z_p)
    d = 1.0 + mu_laplace_derivative(z, cp)
    if abs(d) <= 1e-8:
        raise DegenerateRootsError(f"near-double root at z={z}: 1 + mu'(z) = {d}")
    return 1.0 / d


def dominant_pole_perturbative(cp: CavityParams) -> CavityPole:
    """Order-``lam^2`` dominant pole.

    ``z_p = -i W + (i lam^2 / (pi L)) [lnG(x) - x ln(-x) + x + ln(x / 2 pi) / 2]``
    with ``W = Omega_inf`` and ``x = -L W / pi``. Its real part is
    ``-(lam^2 / L)(floor(L W / pi) + 1/2)``.

    Raises
    ------
    NearResonanceError
        If ``L W / pi`` is within 0.05 of an integer: a mode branch starts
        at the atomic frequency and the expansion breaks down. Use
        :func:`near_resonance_poles`.
    """
    w = omega_infinity(cp)
    if cp.lam == 0:
        return CavityPole(complex(0.0, -cp.omega0), 1.0 + 0j, "perturbative", 0.0)
    n, off = resonance_offset(cp)
    if abs(off) < RESONANCE_GUARD:
        raise NearResonanceError(
            f"L*Omega_inf/pi = {n + off:.6f} is within {RESONANCE_GUARD} of {n}; "
            "use near_resonance_poles"
        )
    x = complex(-cp.L * w / math.pi, 0.0)
    corr = _log_gamma(x) - x * math.log(-x.real) + x + 0.5 * _ln_up(x / (2 * math.pi))
    z = complex(0.0, -w) + 1j * cp.lam**2 / (math.pi * cp.L) * corr
    return CavityPole(z, residue_at(z, cp), "perturbative", abs(characteristic(z, cp)))


def crosses_cut(z1: complex, z2: complex, cp: CavityParams) -> bool:
    """True if the segment ``z1 -> z2`` meets a cut ray ``Im z = -b_n, Re z <= 0``."""
    x1, x2 = z1.real, z2.real
    if x1 > 0 and x2 > 0:
        return False
    # part of the segment with Re z <= 0, as an interval of Im z
    if x1 <= 0 and x2 <= 0:
        ya, yb = z1.imag, z2.imag
    else:
        s = x1 / (x1 - x2)
        ym = z1.imag + s * (z2.imag - z1.imag)
        ya, yb = (z1.imag, ym) if x1 <= 0 else (ym, z2.imag)
    ya, yb = min(ya, yb), max(ya, yb)
    n_lo = max(0, math.ceil(-yb / cp.fsr))
    return n_lo <= math.floor(-ya / cp.fsr)


def _on_cut(z: complex, cp: CavityParams) -> bool:
    return distance_to_cuts(_x_of(z, cp)) <= 1e-12


def _guarded_newton(
    cp: CavityParams,
    z0: complex,
    known: Sequence[complex] = (),
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> tuple[complex, float]:
    """Damped Newton on ``characteristic`` deflated by ``known`` roots.

    Steps that would cross a cut ray, land on one, or fail to decrease the
    deflated residual are halved. Returns the root and ``|f(root)|``.
    """
    scale = tol * cp.omega0

    def merit(z: complex, fz: complex) -> float:
        m = abs(fz)
        for k in known:
            m /= abs(z - k)
        return m

    z = complex(z0)
    if _on_cut(z, cp):
        raise BranchCutError(f"seed {z} lies on a branch cut")
    fz = characteristic(z, cp)
    for _ in range(max_iter):
        if abs(fz) < scale:
            break
        dfz = 1.0 + mu_laplace_derivative(z, cp)
        ratio = dfz / fz - sum(1.0 / (z - k) for k in known)
        if ratio == 0:
            raise ConvergenceError(f"zero Newton denominator at z={z}")
        step = -1.0 / ratio
        if abs(step) > MAX_STEP * cp.omega0:
            step *= MAX_STEP * cp.omega0 / abs(step)
        current = merit(z, fz)
        blocked = False
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = z + t * step
            if crosses_cut(z, trial, cp) or _on_cut(trial, cp):
                blocked = True
            else:
                ft = characteristic(trial, cp)
                if merit(trial, ft) < current:
                    z, fz = trial, ft
                    break
            t *= 0.5
        else:
            if blocked:
                raise CutCrossingError(
                    f"every Newton step from z={z} crosses a branch cut"
                )
            raise ConvergenceError(f"Newton stagnated at z={z}, |f|={abs(fz):.3e}")
    else:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations (z={z}, |f|={abs(fz):.3e})"
        )
    # polish on the undeflated function while it keeps improving
    for _ in range(8):
        dfz = 1.0 + mu_laplace_derivative(z, cp)
        trial = z - fz / dfz
        if trial == z or crosses_cut(z, trial, cp) or _on_cut(trial, cp):
            break
        ft = characteristic(trial, cp)
        if abs(ft) >= abs(fz):
            break
        z, fz = trial, ft
    return z, abs(fz)


def dominant_pole_numeric(cp: CavityParams, seed: complex | None = None) -> CavityPole:
    """Root of ``z + i omega0 + mu(z)`` by damped, cut-aware Newton iteration.

    Parameters
    ----------
    seed : complex, optional
        Starting point, default ``-i Omega_inf``.

    Raises
    ------
    ConvergenceError, CutCrossingError
        On failure to converge to ``|f| < 1e-9 omega0``.
    PoleSearchError
        If the root has a positive real part.
    """
    if seed is None:
        seed = complex(0.0, -omega_infinity(cp))
    z, res = _guarded_newton(cp, complex(seed))
    return _make_pole(z, res, cp)


def _make_pole(z: complex, res: float, cp: CavityParams) -> CavityPole:
    if z.real > 1e-12 * cp.omega0:
        raise PoleSearchError(f"root z={z} has positive real part")
    return CavityPole(z, residue_at(z, cp), "numeric", res)


def find_poles(
    cp: CavityParams,
    seeds: Iterable[complex],
    center: complex,
    radius: float,
    distinct: float = 1e-8,
    max_iter: int = 40,
) -> list[CavityPole]:
    """All roots reachable from ``seeds`` inside a disc, using deflation.

    Each seed is iterated on the characteristic function divided by the
    roots already found, so known roots repel the iteration. Failures from
    individual seeds are skipped. Results are sorted by decay rate.
    """
    found: list[complex] = []
    residuals: list[float] = []
    for seed in seeds:
        try:
            z, res = _guarded_newton(
                cp, complex(seed), known=tuple(found), max_iter=max_iter
            )
        except (PoleSearchError, BranchCutError):
            continue
        if abs(z - center) > radius or z.real > 1e-12 * cp.omega0:
            continue
        if all(abs(z - k) > distinct * cp.omega0 for k in found):
            found.append(z)
            residuals.append(res)
    poles = [_make_pole(z, r, cp) for z, r in zip(found, residuals)]
    return sorted(poles, key=lambda p: (p.gamma, -p.Omega))


def _resonance_seeds(cp: CavityParams, n: int, radius: float) -> list[complex]:
    w = omega_infinity(cp)
    branch = complex(0.0, -n * cp.fsr)
    split = cp.lam / cp.L * math.sqrt(2.0 / (math.pi * w))
    seeds = [complex(0.0, -w), complex(0.0, -(w + split)), complex(0.0, -(w - split))]
    for d in np.geomspace(1e-5 * radius, 0.5 * radius, 6):
        for a in (0.6, 0.95, -0.6, -0.95):
            seeds.append(branch + d * cmath.exp(1j * math.pi * a))
    return seeds


def near_resonance_poles(cp: CavityParams) -> list[CavityPole]:
    """Poles near a branch point when ``L Omega_inf / pi`` is close to an integer.

    Seeds around ``-i Omega_inf`` and around the branch point
    ``-i pi n / L`` (above and below its cut) are iterated with deflation
    inside a disc of radius a quarter mode spacing.

    Raises
    ------
    ValidationError
        If the parameters are not near resonance.
    SinglePoleError
        If only one root exists in the disc; the root is attached.
    PoleSearchError
        If no root is found at all.
    """
    n, off = resonance_offset(cp)
    if abs(off) >= RESONANCE_GUARD:
        raise ValidationError(
            f"L*Omega_inf/pi = {n + off:.6f} is not within {RESONANCE_GUARD} of an integer"
        )
    radius = 0.25 * cp.fsr
    center = complex(0.0, -n * cp.fsr)
    found = find_poles(cp, _resonance_seeds(cp, n, radius), center, radius)
    if not found:
        raise PoleSearchError("no pole found near resonance")
    if len(found) == 1:
        raise SinglePoleError(
            f"only one pole near the branch point at L*Omega_inf/pi = {n + off:.6f}",
            pole=found[0],
        )
    return found


def long_time_u(t: ArrayLike, pole: CavityPole) -> np.ndarray | complex:
    """Dominant-pole amplitude ``residue * exp(z_p t)``."""
    out = pole.residue * np.exp(pole.z_p * np.asarray(t, dtype=float))
    return out if np.ndim(out) else complex(out)


def cavity_ln_series(grid: ArrayLike, theta: float, pole: CavityPole) -> np.ndarray:
    """LN of a pure initial atom in the dominant-pole approximation."""
    u = np.minimum(1.0, np.abs(long_time_u(grid, pole)))
    return np.asarray(core.ln_from_u(u, theta), dtype=float)


def cavity_eoe_series(grid: ArrayLike, theta: float, pole: CavityPole) -> np.ndarray:
    """Entropy of entanglement in the dominant-pole approximation."""
    u = np.minimum(1.0, np.abs(long_time_u(grid, pole)))
    return np.asarray(core.eoe_from_u(u, theta), dtype=float)
