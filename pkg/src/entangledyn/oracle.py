"""Brute-force reference computations used to check the analytic machinery.

Nothing here reuses the spectral code of :mod:`entangledyn.multimode` or the
pole machinery of :mod:`entangledyn.cavity`. Hamiltonians are assembled from
operator definitions, time stepping is classical RK4, exact evolution uses
a separate full-space eigendecomposition, and the cavity continuum is
replaced by a finite set of modes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, special

from .cavity import CavityParams, mu_time, omega_infinity
from .core import TruncatedState
from .errors import OracleError, ValidationError
from .multimode import ModeSet

RK4_STABILITY = 0.1
RK4_DEFAULT_FRACTION = 0.005


@dataclass
class EvolutionResult:
    """Sampled evolution.

    Attributes
    ----------
    times : ndarray
    states : ndarray or list
        Amplitude vectors (rows) or :class:`TruncatedState` objects.
    norm_drift : float
        ``max |<psi|psi> - 1|`` (or trace drift for density matrices).
    """

    times: np.ndarray
    states: object
    norm_drift: float


def one_excitation_hamiltonian(ms: ModeSet) -> np.ndarray:
    """``H_I`` on ``(|e,0>, |g,1_1>, ..., |g,1_M>)`` assembled entry by entry."""
    n = ms.M + 1
    h = np.zeros((n, n), dtype=complex)
    for k, (d, g) in enumerate(zip(ms.deltas, ms.couplings), start=1):
        h[k, k] = d
        h[0, k] = g
        h[k, 0] = g
    return h


def full_hamiltonian(ms: ModeSet) -> np.ndarray:
    """``H_I`` on the truncated product space from atom and mode operators.

    ``sum_k delta_k b_k^+ b_k + g_k (S^+ b_k + S^- b_k^+)`` with
    ``b_k |1_k> = |vac>`` and the atomic basis ``(e, g)``.
    """
    n = ms.M + 1
    raise_atom = np.array([[0.0, 1.0], [0.0, 0.0]])
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    for k, (d, g) in enumerate(zip(ms.deltas, ms.couplings), start=1):
        b = np.zeros((n, n))
        b[0, k] = 1.0
        h += d * np.kron(np.eye(2), b.T @ b)
        h += g * (np.kron(raise_atom, b) + np.kron(raise_atom.T, b.T))
    return h


def _gershgorin(h: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(h), axis=1)))


def _rk4_step_matrix(a: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for ``y' = a y``, applied to every basis vector."""
    y = np.eye(a.shape[0], dtype=complex)
    k1 = a @ y
    k2 = a @ (y + 0.5 * dt * k1)
    k3 = a @ (y + 0.5 * dt * k2)
    k4 = a @ (y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_evolve(
    ms: ModeSet, psi0: ArrayLike, grid: ArrayLike, dt_max: float | None = None
) -> EvolutionResult:
    """Integrate ``i dpsi/dt = H_I psi`` with fixed-step RK4.

    Parameters
    ----------
    psi0 : array_like
        Initial amplitudes on ``(|e,0>, |g,1_k>)``, length ``M + 1``.
    grid : array_like
        Sorted sample times, ``>= 0``. Integration starts at ``t = 0``.
    dt_max : float, optional
        Largest step. Defaults to ``0.005 / ||H||`` (Gershgorin bound).

    Raises
    ------
    OracleError
        If ``dt_max ||H|| >= 0.1``.
    """
    h = one_excitation_hamiltonian(ms)
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.shape != (ms.M + 1,):
        raise ValidationError(f"psi0 must have length {ms.M + 1}")
    t = np.asarray(grid, dtype=float)
    if np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValidationError("grid must be sorted and nonnegative")
    bound = _gershgorin(h)
    if dt_max is None:
        dt_max = RK4_DEFAULT_FRACTION / bound if bound > 0 else max(float(t[-1]), 1.0)
    if dt_max * bound >= RK4_STABILITY:
        raise OracleError(
            f"dt_max * ||H|| = {dt_max * bound:.3g} violates the RK4 stability bound "
            f"{RK4_STABILITY}"
        )
    a = -1j * h
    cache: dict[int, np.ndarray] = {}
    norm0 = np.vdot(psi, psi).real
    out = np.empty((t.size, psi.size), dtype=complex)
    now = 0.0
    for i, target in enumerate(t):
        span = target - now
        if span > 0:
            steps = max(1, math.ceil(span / dt_max - 1e-12))
            key = (steps, span)
            if key not in cache:
                cache = {key: _rk4_step_matrix(a, span / steps)}
            step = cache[key]
            for _ in range(steps):
                psi = step @ psi
            now = target
        out[i] = psi
    drift = float(np.max(np.abs(np.sum(np.abs(out) ** 2, axis=1) - norm0))) if t.size else 0.0
    return EvolutionResult(t, out, drift)


def expm_evolve(ms: ModeSet, chi0: TruncatedState, t: float) -> TruncatedState:
    """Exact ``U chi0 U^+`` with ``U = exp(-i H_I t)`` on the full truncated space."""
    return expm_evolve_series(ms, chi0, [t]).states[0]


def expm_evolve_series(
    ms: ModeSet, chi0: TruncatedState, grid: ArrayLike
) -> EvolutionResult:
    """Exact evolution on a time grid from one eigendecomposition."""
    if chi0.mode_count != ms.M:
        raise ValidationError("state and mode set disagree on the number of modes")
    e, v = np.linalg.eigh(full_hamiltonian(ms))
    rot = v.conj().T @ chi0.matrix @ v
    tr0 = np.trace(chi0.matrix).real
    states = []
    drift = 0.0
    for t in np.asarray(grid, dtype=float):
        ph = np.exp(-1j * e * t)
        chi = v @ (ph[:, None] * rot * ph.conj()[None, :]) @ v.conj().T
        drift = max(drift, abs(np.trace(chi).real - tr0))
        states.append(TruncatedState(ms.M, chi))
    return EvolutionResult(np.asarray(grid, dtype=float), states, drift)


def _graded_edges(
    n_cells: int, k_max: float, center: float, half_width: float
) -> np.ndarray:
    """Cell edges on ``[0, k_max]``: uniform core, geometric flanks."""
    lo = max(0.0, center - half_width)
    hi = min(k_max, center + half_width)
    n_core = n_cells // 2
    n_low = (n_cells - n_core) // 4 if lo > 0 else 0
    n_high = n_cells - n_core - n_low
    core = np.linspace(lo, hi, n_core + 1)
    h = (hi - lo) / n_core
    pieces = [core]
    if n_low:
        d = np.geomspace(h, lo, n_low)
        pieces.insert(0, (lo - d)[::-1])
    if n_high and hi < k_max:
        d = np.geomspace(h, k_max - hi, n_high)
        pieces.append(hi + d)
    return np.unique(np.concatenate(pieces))


def _cell_weights(edges: np.ndarray, cp: CavityParams) -> np.ndarray:
    """Exact ``int J(k) dk`` per cell with ``J = P e^{-k eps} (1 + 2 floor(k L / pi))``."""
    eps = cp.epsilon
    a, b = edges[:-1], edges[1:]
    ea, eb = np.exp(-eps * a), np.exp(-eps * b)
    n_max = int(math.floor(edges[-1] / cp.fsr))
    starts = cp.fsr * np.arange(1, n_max + 1)
    # branches open over the whole cell, and those opening inside it
    i0 = np.searchsorted(starts, a, side="right")
    i1 = np.searchsorted(starts, b, side="left")
    out = (1 + 2 * i0) * (ea - eb)
    cum = np.concatenate([[0.0], np.cumsum(np.exp(-eps * starts))])
    out += 2 * ((cum[i1] - cum[i0]) - (i1 - i0) * eb)
    return cp.prefactor * out / eps


def discretize_continuum(
    cp: CavityParams,
    n_per_branch: int = 2000,
    k_max: float | None = None,
    grid: str = "graded",
    merge: bool = True,
    center: float | None = None,
    half_width: float | None = None,
) -> ModeSet:
    """Finite mode set whose kernel approximates the regularized continuum.

    Parameters
    ----------
    n_per_branch : int
        Number of frequency cells. With ``merge=True`` (default) the
        degenerate modes of all branches sharing a cell are merged into a
        single mode carrying their total coupling, so this is the total mode
        count; otherwise each branch gets its own uniform grid of this size.
    k_max : float, optional
        Highest mode frequency, default ``8 / epsilon``.
    grid : {"graded", "uniform"}
        ``graded`` puts half of the cells uniformly within ``half_width``
        (default ``40 gamma``, or ``center / 100`` without coupling) of ``center`` (default ``Omega_inf``) and
        spaces the rest geometrically; ``uniform`` uses equal cells.

    Notes
    -----
    Each cell's squared coupling is the exact integral of the spectral
    density over the cell, placed at the cell midpoint, so the sum of the
    squared couplings reproduces ``mu_time(0)`` up to the tail beyond ``k_max``.
    """
    if n_per_branch < 100:
        raise ValidationError("n_per_branch must be at least 100")
    if k_max is None:
        k_max = 8.0 / cp.epsilon
    if k_max * cp.epsilon < 5:
        raise ValidationError("k_max * epsilon must be at least 5 to resolve the cutoff")
    gamma = max(cp.decay_estimate, 1e-300)
    if center is None:
        center = omega_infinity(cp)
    if half_width is None:
        half_width = 40.0 * gamma if cp.lam > 0 else 0.01 * center
    if merge:
        if grid == "graded":
            edges = _graded_edges(n_per_branch, k_max, center, half_width)
        elif grid == "uniform":
            edges = np.linspace(0.0, k_max, n_per_branch + 1)
        else:
            raise ValidationError(f"unknown grid {grid!r}")
        weights = _cell_weights(edges, cp)
        freqs = 0.5 * (edges[:-1] + edges[1:])
        spacing = np.diff(edges)[np.searchsorted(edges, center) - 1]
    else:
        if grid != "uniform":
            raise ValidationError("per-branch discretization supports the uniform grid only")
        n_max = int(math.floor(k_max / cp.fsr))
        freqs_l, weights_l = [], []
        for n in range(-n_max, n_max + 1):
            e = np.linspace(abs(n) * cp.fsr, k_max, n_per_branch + 1)
            w = cp.prefactor * (np.exp(-cp.epsilon * e[:-1]) - np.exp(-cp.epsilon * e[1:]))
            freqs_l.append(0.5 * (e[:-1] + e[1:]))
            weights_l.append(w / cp.epsilon)
        freqs = np.concatenate(freqs_l)
        weights = np.concatenate(weights_l)
        spacing = (k_max - 0.0) / n_per_branch
    if cp.lam > 0 and spacing > gamma / 10:
        warnings.warn(
            f"frequency spacing {spacing:.3g} near the atom exceeds gamma/10 = {gamma / 10:.3g}",
            stacklevel=2,
        )
    return ModeSet(cp.omega0, freqs - cp.omega0, np.sqrt(weights))


def continuum_u(ms: ModeSet, grid: ArrayLike) -> np.ndarray:
    """Survival amplitude of a (large) discretized mode set, by dense eigh."""
    e, v = np.linalg.eigh(one_excitation_hamiltonian(ms).real)
    w = v[0, :] ** 2
    t = np.asarray(grid, dtype=float)
    return np.exp(-1j * np.outer(t, e)) @ w


def fit_decay_rate(times: ArrayLike, u_abs: ArrayLike) -> float:
    """Least-squares slope ``-d log|u| / dt``."""
    slope, _ = np.polyfit(np.asarray(times, float), np.log(np.asarray(u_abs, float)), 1)
    return float(-slope)


def laplace_quadrature(z: complex, cp: CavityParams, rtol: float = 1e-10) -> complex:
    """``int_0^inf exp(-z s) mu(s) ds`` by adaptive quadrature, ``Re z > 0``.

    The kernel has revival peaks of width ``epsilon`` at ``s = 2 L m``; they
    are isolated as separate panels. The integral is truncated where
    ``exp(-Re(z) s) < 1e-14``.
    """
    z = complex(z)
    if z.real <= 0:
        raise ValidationError("quadrature Laplace transform needs Re z > 0")
    s_max = 32.0 * math.log(10) / z.real
    pad = min(50.0 * cp.epsilon, 0.25 * cp.L)
    marks = [0.0, pad, s_max]
    m = 1
    while 2 * cp.L * m - pad < s_max:
        marks += [2 * cp.L * m - pad, 2 * cp.L * m, 2 * cp.L * m + pad]
        m += 1
    marks = sorted(set(p for p in marks if p <= s_max))

    def part(fn, a, b):
        return integrate.quad(fn, a, b, epsrel=rtol, epsabs=0.0, limit=400)[0]

    def re(s):
        return (np.exp(-z * s) * mu_time(s, cp)).real

    def im(s):
        return (np.exp(-z * s) * mu_time(s, cp)).imag

    total = 0j
    for a, b in zip(marks[:-1], marks[1:]):
        total += part(re, a, b) + 1j * part(im, a, b)
    return total


def laplace_series(z: complex, cp: CavityParams) -> complex:
    """Branch-sum closed form of the exact kernel transform, ``Re z > 0``.

    ``-i P e^{-i eps z} [2 sum_{n>=0} E1(h(n + x)) - E1(h x)]`` with
    ``x = L z / (i pi)``, ``h = eps pi / L``. Summed until the terms fall
    below ``1e-18`` of the total.
    """
    z = complex(z)
    if z.real <= 0:
        raise ValidationError("series form needs Re z > 0")
    h = cp.epsilon * cp.fsr
    x = -1j * z / cp.fsr
    n_terms = int(45.0 / h) + 10
    n = np.arange(n_terms)
    tail = special.exp1(h * (n + x))
    bracket = 2.0 * tail.sum() - special.exp1(h * x)
    return -1j * cp.prefactor * np.exp(-1j * cp.epsilon * z) * bracket
