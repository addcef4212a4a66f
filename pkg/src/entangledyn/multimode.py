"""Exact dynamics of one atom coupled to M discrete field modes.

From the vacuum the dynamics stays in ``{|g,0>}`` plus the one-excitation
manifold ``{|e,0>, |g,1_1>, ..., |g,1_M>}``. In the interaction picture the
one-excitation Hamiltonian is an arrow matrix with diagonal
``(0, delta_1, ..., delta_M)`` and first row/column ``g_k``, where
``delta_k = omega_k - omega_0``. Its eigenvalues ``x_j`` give the poles
``z_j = -i x_j`` of the Laplace-domain survival amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from . import core
from .core import BlochVector, TruncatedState
from .errors import DegenerateRootsError, ValidationError

SIMPLE_ROOT_SEPARATION = 1e-8


@dataclass(frozen=True)
class ModeSet:
    """Atomic frequency plus per-mode detunings and couplings.

    Parameters
    ----------
    omega0 : float
        Atomic transition frequency.
    deltas : sequence of float
        Mode detunings ``omega_k - omega0``.
    couplings : sequence of float
        Real nonnegative couplings ``g_k``.
    """

    omega0: float
    deltas: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.deltas, dtype=float)).copy()
        g = np.atleast_1d(np.asarray(self.couplings, dtype=float)).copy()
        if d.ndim != 1 or d.shape != g.shape:
            raise ValidationError("deltas and couplings must be 1-d of equal length")
        if d.size < 1:
            raise ValidationError("a ModeSet needs at least one mode")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(g))):
            raise ValidationError("detunings and couplings must be finite")
        if np.any(g < 0):
            raise ValidationError("couplings must be real and nonnegative")
        d.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "couplings", g)
        object.__setattr__(self, "omega0", float(self.omega0))

    @property
    def M(self) -> int:
        return int(self.deltas.size)

    @property
    def mode_frequencies(self) -> np.ndarray:
        return self.omega0 + self.deltas


@dataclass(frozen=True)
class PoleSet:
    """Poles ``z_j = -i x_j`` and residue weights of the survival amplitude.

    ``vectors`` holds the normalized eigenvectors (columns) of the
    interaction matrix and is used for amplitudes beyond ``<e,0|psi>``.
    """

    roots: np.ndarray
    weights: np.ndarray
    secular_roots: np.ndarray
    vectors: np.ndarray | None = field(default=None, repr=False, compare=False)


def build_interaction_matrix(ms: ModeSet) -> np.ndarray:
    """Arrow matrix on ``(|e,0>, |g,1_1>, ..., |g,1_M>)``."""
    h = np.diag(np.concatenate([[0.0], ms.deltas]))
    h[0, 1:] = ms.couplings
    h[1:, 0] = ms.couplings
    return h


def poles(ms: ModeSet) -> PoleSet:
    """Spectral poles and weights ``c_j = |<e,0|v_j>|^2``.

    Examples
    --------
    >>> ps = poles(ModeSet(1.0, [0.0], [1.0]))
    >>> ps.secular_roots
    array([-1.,  1.])
    >>> ps.weights.real
    array([0.5, 0.5])
    """
    x, v = scipy.linalg.eigh(build_interaction_matrix(ms))
    w = np.abs(v[0, :]) ** 2
    return PoleSet(roots=-1j * x, weights=w.astype(complex), secular_roots=x, vectors=v)


def secular_residual(x: ArrayLike, ms: ModeSet) -> np.ndarray:
    """Relative residual of ``x prod(x - d_k) - sum_k g_k^2 prod_{l!=k}(x - d_l)``.

    Normalized by the sum of the magnitudes of the individual terms, so
    values near machine precision mean ``x`` is a root. Intended for moderate
    ``M``; the products are not rescaled.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x[:, None] - ms.deltas[None, :]
    lead = x * np.prod(diff, axis=1)
    terms = np.empty((x.size, ms.M))
    for k in range(ms.M):
        others = np.delete(diff, k, axis=1)
        terms[:, k] = ms.couplings[k] ** 2 * np.prod(others, axis=1)
    scale = np.abs(lead) + np.sum(np.abs(terms), axis=1)
    scale = np.where(scale > 0, scale, 1.0)
    return np.abs(lead - terms.sum(axis=1)) / scale


def u_residue(t: ArrayLike, ps: PoleSet) -> np.ndarray | complex:
    """Survival amplitude ``u(t) = sum_j c_j exp(z_j t)``."""
    t = np.asarray(t, dtype=float)
    u = np.exp(np.multiply.outer(t, ps.roots)) @ ps.weights
    return u if u.ndim else complex(u)


def amplitudes(t: ArrayLike, ps: PoleSet) -> np.ndarray:
    """One-excitation amplitudes ``psi(t)`` from ``|e,0>``, shape ``(..., M+1)``."""
    if ps.vectors is None:
        raise ValidationError("PoleSet carries no eigenvectors")
    t = np.asarray(t, dtype=float)
    v = ps.vectors
    phases = np.exp(np.multiply.outer(t, ps.roots))
    return (phases * v[0, :].conj()) @ v.T


def field_population(t: ArrayLike, ps: PoleSet) -> np.ndarray | float:
    """Photon probability ``sum_k |<g,1_k|psi(t)>|^2`` computed from the modes."""
    psi = amplitudes(t, ps)
    out = np.sum(np.abs(psi[..., 1:]) ** 2, axis=-1)
    return out if out.ndim else float(out)


def pure_series(
    grid: ArrayLike, theta: float, ms: ModeSet, measure: str = "LN"
) -> np.ndarray:
    """Entanglement of a pure initial atom with ``M`` modes over a time grid."""
    t = np.asarray(grid, dtype=float)
    ps = poles(ms)
    psi = amplitudes(t, ps)
    u = np.minimum(np.abs(psi[..., 0]), 1.0)
    q = np.sum(np.abs(psi[..., 1:]) ** 2, axis=-1)
    key = measure.upper()
    if key == "LN":
        return np.asarray(core.ln_from_u(u, theta, q), dtype=float)
    if key == "EOE":
        return np.asarray(core.eoe_from_u(u, theta, q), dtype=float)
    if key == "ABS_U":
        return u
    raise ValidationError(f"unknown measure {measure!r}")


def product_formula_weights(ps: PoleSet, ms: ModeSet) -> np.ndarray:
    """Weights ``prod_k(z_j + i d_k) / prod_{l!=j}(z_j - z_l)``.

    Raises
    ------
    DegenerateRootsError
        If two roots are closer than ``1e-8 max|z|``; use ``ps.weights``.
    """
    x = np.asarray(ps.secular_roots, dtype=float)
    scale = max(np.max(np.abs(x)), np.finfo(float).tiny)
    gaps = np.abs(np.subtract.outer(x, x))
    np.fill_diagonal(gaps, np.inf)
    if np.min(gaps) <= SIMPLE_ROOT_SEPARATION * scale:
        raise DegenerateRootsError(
            "near-degenerate roots: product formula refused, use spectral weights"
        )
    # (z_j + i d) / (z_j - z_l) = (x_j - d) / (x_j - x_l); M factors each, paired
    out = np.empty(x.size)
    for j in range(x.size):
        num = x[j] - ms.deltas
        den = x[j] - np.delete(x, j)
        out[j] = np.prod(num / den)
    return out.astype(complex)


class _Propagator:
    """Cached eigendecomposition of the reachable space for mixed evolution."""

    def __init__(self, ms: ModeSet):
        self.M = ms.M
        self.x, self.v = scipy.linalg.eigh(build_interaction_matrix(ms))
        n = ms.M + 1
        # reachable order: g0, e0, g1_1..g1_M
        self.slots = [core.index("g", 0, ms.M)] + [core.index("e", 0, ms.M)] + [
            core.index("g", k, ms.M) for k in range(1, n)
        ]

    def unitary(self, t: float) -> np.ndarray:
        n = self.M + 1
        u = np.zeros((n + 1, n + 1), dtype=complex)
        u[0, 0] = 1.0
        u[1:, 1:] = (self.v * np.exp(-1j * self.x * t)) @ self.v.T
        return u

    def evolve(self, rho: np.ndarray, t: float) -> TruncatedState:
        n = self.M + 1
        chi = np.zeros((n + 1, n + 1), dtype=complex)
        chi[0, 0] = rho[1, 1]
        chi[1, 1] = rho[0, 0]
        chi[1, 0] = rho[0, 1]
        chi[0, 1] = rho[1, 0]
        u = self.unitary(t)
        chi = u @ chi @ u.conj().T
        full = np.zeros((2 * n, 2 * n), dtype=complex)
        full[np.ix_(self.slots, self.slots)] = chi
        return TruncatedState(self.M, full)


def mixed_evolution(t: float, b: BlochVector, ms: ModeSet) -> TruncatedState:
    """Exact ``chi(t)`` for initial ``rho_A (x) |vac><vac|``."""
    if t < 0:
        raise ValidationError("time must be nonnegative")
    return _Propagator(ms).evolve(core.bloch_to_density(b), t)


def mixed_ln_series(grid: ArrayLike, b: BlochVector, ms: ModeSet) -> np.ndarray:
    """Logarithmic negativity of ``chi(t)`` on a grid, for any Bloch radius."""
    prop = _Propagator(ms)
    rho = core.bloch_to_density(b)
    return np.array([core.log_negativity(prop.evolve(rho, float(t))) for t in grid])


def cavity_ladder(
    Q: int, g: float, delta: float, Delta: float, omega0: float
) -> ModeSet:
    """``2Q+1`` equally spaced modes around a near-resonant one.

    Mode ``k`` (``-Q..Q``) has detuning ``delta + k Delta`` and coupling
    ``g sqrt((omega0 + delta) / (omega0 + delta + k Delta))``.
    """
    Q = int(Q)
    if Q < 0:
        raise ValidationError("Q must be a nonnegative integer")
    if Q > 0 and Delta == 0:
        raise ValidationError("free spectral range must be nonzero when Q > 0")
    k = np.arange(-Q, Q + 1)
    freqs = omega0 + delta + k * Delta
    if np.any(freqs <= 0):
        raise ValidationError("all ladder mode frequencies must be positive")
    couplings = g * np.sqrt((omega0 + delta) / freqs)
    return ModeSet(omega0, delta + k * Delta, couplings)


def perturbative_poles(
    Q: int, g: float, delta: float, Delta: float, omega0: float
) -> np.ndarray:
    """Weak-coupling ladder poles in the atom frame, ordered like :func:`poles`.

    Near-resonant pair ``-i(delta +/- sqrt(delta^2 + 4g^2))/2``; side modes
    ``-i(delta + k Delta + g^2/(k Delta))`` for ``k = +/-1..+/-Q``.
    ``omega0`` only enters the exact problem; it is accepted for symmetry.
    """
    Q = int(Q)
    if Q > 0 and Delta == 0:
        raise ValidationError("free spectral range must be nonzero when Q > 0")
    root = np.hypot(delta, 2.0 * g)
    x = [0.5 * (delta - root), 0.5 * (delta + root)]
    for k in range(1, Q + 1):
        for kk in (k, -k):
            x.append(delta + kk * Delta + g * g / (kk * Delta))
    return -1j * np.sort(np.array(x))


def u_shifted(
    t: ArrayLike, Q: int, g: float, delta: float, Delta: float, omega0: float
) -> np.ndarray | float:
    """``|u(t)|`` for a cavity ladder, from its spectral poles."""
    u = np.abs(u_residue(t, poles(cavity_ladder(Q, g, delta, Delta, omega0))))
    return u if np.ndim(u) else float(u)


def shifted_roots(Q: int, g: float, delta: float, Delta: float, omega0: float) -> np.ndarray:
    """Ladder poles in the near-mode frame, ``w_j = z_j + i delta``."""
    return poles(cavity_ladder(Q, g, delta, Delta, omega0)).roots + 1j * delta


def u_shifted_wform(
    t: ArrayLike,
    Q: int,
    g: float,
    delta: float,
    Delta: float,
    omega0: float,
    roots: Sequence[complex] | None = None,
) -> np.ndarray | float:
    """``|u(t)|`` from the product form in the near-mode frame.

    ``|sum_j w_j prod_n (w_j^2 + n^2 Delta^2) / prod_{l!=j} (w_j - w_l) e^{w_j t}|``
    with ``n = 1..Q``. Requires simple roots.
    """
    w = np.asarray(
        shifted_roots(Q, g, delta, Delta, omega0) if roots is None else roots, dtype=complex
    )
    n = np.arange(1, Q + 1)
    c = np.empty(w.size, dtype=complex)
    for j in range(w.size):
        num = w[j] * np.prod(w[j] ** 2 + (n * Delta) ** 2)
        den = np.prod(w[j] - np.delete(w, j))
        c[j] = num / den
    u = np.abs(np.exp(np.multiply.outer(np.asarray(t, dtype=float), w)) @ c)
    return u if np.ndim(u) else float(u)


def shifted_pole_residual(
    w: ArrayLike, Q: int, g: float, delta: float, Delta: float, omega0: float
) -> np.ndarray:
    """Relative residual of the ladder characteristic polynomial in ``w``.

    The polynomial, with ``W = omega0 + delta``, is::

        (w^2 - i delta w + g^2) prod_n (w^2 + n^2 Delta^2)
          + 2 w g^2 sum_n (1 - n^2 Delta^2 / W^2)^-1 (w + i n^2 Delta^2 / W)
                          prod_{m != n} (w^2 + m^2 Delta^2)

    obtained by pairing the modes ``+n`` and ``-n``.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    big = omega0 + delta
    n = np.arange(1, Q + 1)
    sq = w[:, None] ** 2 + (n[None, :] * Delta) ** 2
    first = (w**2 - 1j * delta * w + g * g) * np.prod(sq, axis=1)
    terms = [first]
    for i, nn in enumerate(n):
        weight = 1.0 / (1.0 - (nn * Delta / big) ** 2)
        rest = np.prod(np.delete(sq, i, axis=1), axis=1)
        terms.append(2 * w * g * g * weight * (w + 1j * nn**2 * Delta**2 / big) * rest)
    terms = np.array(terms)
    scale = np.sum(np.abs(terms), axis=0)
    return np.abs(terms.sum(axis=0)) / np.where(scale > 0, scale, 1.0)
