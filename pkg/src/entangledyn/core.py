"""State construction and entanglement measures for the atom-field system.

Conventions
-----------
The atomic basis is ordered ``(|e>, |g>)`` with the excited state at the north
pole of the Bloch sphere. A truncated atom-field state lives on
``{|e>, |g>} x {|vac>, |1_1>, ..., |1_M>}`` with flat index
``a * (M + 1) + f`` where ``a = 0`` for ``|e>`` and ``f = 0`` for the vacuum.
All entropies and negativities are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
CLIP_TOL = 1e-10


@dataclass(frozen=True)
class BlochVector:
    """Atomic state in spherical coordinates on or inside the Bloch sphere.

    Parameters
    ----------
    r : float
        Radius in ``[0, 1]``; ``r = 1`` is a pure state.
    theta : float
        Polar angle in ``[0, pi]``; ``theta = 0`` is the excited state.
    phi : float
        Azimuthal angle, stored modulo ``2 pi``.
    """

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        r, theta, phi = float(self.r), float(self.theta), float(self.phi)
        if not (np.isfinite(r) and np.isfinite(theta) and np.isfinite(phi)):
            raise ValidationError("Bloch vector components must be finite")
        if r < 0.0 or r > 1.0 + 1e-12:
            raise ValidationError(f"Bloch radius r={r} outside [0, 1]")
        if theta < 0.0 or theta > np.pi:
            raise ValidationError(f"polar angle theta={theta} outside [0, pi]")
        object.__setattr__(self, "r", min(r, 1.0))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", float(np.mod(phi, 2 * np.pi)))

    @property
    def is_pure(self) -> bool:
        return self.r == 1.0

    def cartesian(self) -> np.ndarray:
        """Return ``r * (sin t cos p, sin t sin p, cos t)``."""
        st = np.sin(self.theta)
        return self.r * np.array(
            [st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)]
        )


@dataclass(frozen=True)
class TruncatedState:
    """Density matrix on the zero/one-excitation atom-field truncation.

    Parameters
    ----------
    mode_count : int
        Number of field modes ``M``.
    matrix : ndarray
        Complex Hermitian matrix of shape ``(2(M+1), 2(M+1))``.
    """

    mode_count: int
    matrix: np.ndarray

    def __post_init__(self):
        m = int(self.mode_count)
        if m < 1:
            raise ValidationError(f"mode_count must be positive, got {m}")
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (2 * (m + 1), 2 * (m + 1)):
            raise ValidationError(
                f"matrix shape {mat.shape} does not match mode_count={m}"
            )
        object.__setattr__(self, "mode_count", m)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return 2 * (self.mode_count + 1)

    @classmethod
    def product_vacuum(cls, rho_atom: ArrayLike, mode_count: int) -> "TruncatedState":
        """Return ``rho_atom (x) |vac><vac|``."""
        vac = np.zeros((mode_count + 1, mode_count + 1))
        vac[0, 0] = 1.0
        return cls(mode_count, np.kron(np.asarray(rho_atom, dtype=complex), vac))

    def validate(self) -> "TruncatedState":
        """Check the density-operator invariants; return ``self``."""
        validate_density(self.matrix)
        return self

    def atom_reduced(self) -> np.ndarray:
        """Partial trace over the field."""
        n = self.mode_count + 1
        return np.einsum("afbf->ab", self.matrix.reshape(2, n, 2, n))


def index(atom: str, field: int, mode_count: int) -> int:
    """Flat basis index of ``|atom> (x) |field>``; ``field = 0`` is the vacuum."""
    a = {"e": 0, "g": 1}[atom]
    if not 0 <= field <= mode_count:
        raise ValidationError(f"field index {field} outside [0, {mode_count}]")
    return a * (mode_count + 1) + field


def validate_density(matrix: ArrayLike) -> np.ndarray:
    """Raise :class:`ValidationError` unless ``matrix`` is a density operator."""
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"density matrix must be square, got {mat.shape}")
    herm = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if herm > HERMITIAN_TOL:
        raise ValidationError(f"matrix not Hermitian (deviation {herm:.3e})")
    tr = np.trace(mat).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh(mat).min()
    if lo < -POSITIVITY_TOL:
        raise ValidationError(f"negative eigenvalue {lo:.3e}")
    return mat


def bloch_to_density(b: BlochVector) -> np.ndarray:
    """Atomic density matrix ``(I + r n . sigma) / 2`` in the ``(e, g)`` basis.

    Examples
    --------
    >>> bloch_to_density(BlochVector(1.0, 0.0)).real
    array([[1., 0.],
           [0., 0.]])
    """
    x, y, z = b.cartesian()
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=complex)


def _clip_probabilities(p: np.ndarray) -> np.ndarray:
    if np.any(p < -CLIP_TOL) or np.any(p > 1 + CLIP_TOL):
        raise ValidationError(f"eigenvalues {p} outside [0, 1] beyond tolerance")
    return np.clip(p, 0.0, 1.0)


def entropy_bits(p: ArrayLike) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = _clip_probabilities(np.asarray(p, dtype=float))
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)) + 0.0)


def eoe(rho: ArrayLike) -> float:
    """Entropy of entanglement: von Neumann entropy of a reduced state in bits.

    Parameters
    ----------
    rho : array_like
        Reduced density matrix (usually the 2x2 atomic state).
    """
    mat = validate_density(rho)
    return entropy_bits(np.linalg.eigvalsh(mat))


def partial_transpose(chi: TruncatedState) -> np.ndarray:
    """Transpose the field indices of ``chi`` in the product basis."""
    n = chi.mode_count + 1
    t = chi.matrix.reshape(2, n, 2, n).transpose(0, 3, 2, 1)
    return t.reshape(2 * n, 2 * n)


def trace_norm(a: ArrayLike) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a)))))


def log_negativity(chi: TruncatedState) -> float:
    """Logarithmic negativity ``log2 ||chi^{T_B}||_1`` in bits.

    Rounding can push the trace norm of a separable state a few ulps below 1;
    the result is floored at 0.
    """
    return max(0.0, float(np.log2(trace_norm(partial_transpose(chi)))))


def coherence_product(u_abs: ArrayLike, field_pop: ArrayLike | None = None) -> np.ndarray:
    """Return ``|u|^2 - |u|^4`` evaluated as ``|u|^2 (1 - |u|^2)``.

    Parameters
    ----------
    u_abs : array_like
        Survival amplitude modulus ``|u|`` in ``[0, 1]``.
    field_pop : array_like, optional
        Independently computed ``1 - |u|^2``. Near revivals ``1 - |u|^2`` from
        a rounded ``|u|`` carries absolute error ~1e-16 which the square root
        in the measures turns into ~1e-8; supply this to avoid that.
    """
    u = np.asarray(u_abs, dtype=float)
    if np.any(u < 0) or np.any(u > 1 + 1e-12):
        raise ValidationError("|u| must lie in [0, 1]")
    u = np.minimum(u, 1.0)
    p_e = u * u
    if field_pop is None:
        p_f = 1.0 - p_e
    else:
        p_f = np.clip(np.asarray(field_pop, dtype=float), 0.0, 1.0)
    return p_e * p_f


def reduced_eigs_from_u(
    u_abs: ArrayLike, theta: float, field_pop: ArrayLike | None = None
) -> np.ndarray:
    """Eigenvalues ``p+ >= p-`` of the reduced atomic state for a pure start.

    ``p(+/-) = (1 +/- sqrt(1 - 4 cos^4(theta/2) (|u|^2 - |u|^4))) / 2``.
    Returns an array of shape ``(..., 2)``.

    Examples
    --------
    >>> reduced_eigs_from_u(1.0, 0.0)
    array([1., 0.])
    """
    s = coherence_product(u_abs, field_pop)
    c4 = np.cos(theta / 2.0) ** 4
    q = 4.0 * c4 * s
    root = np.sqrt(np.clip(1.0 - q, 0.0, None))
    p_minus = 0.5 * q / (1.0 + root)  # cancellation-free form of (1 - root)/2
    return np.stack([1.0 - p_minus, p_minus], axis=-1)


def ln_pure_from_spectrum(s: ArrayLike) -> np.ndarray | float:
    """Pure-state LN ``log2((sum_j sqrt(p_j))^2)`` from a Schmidt spectrum."""
    p = _clip_probabilities(np.asarray(s, dtype=float))
    out = np.log2(np.sum(np.sqrt(p), axis=-1) ** 2)
    return np.maximum(out, 0.0) if np.ndim(out) else max(float(out), 0.0)


def eoe_from_spectrum(s: ArrayLike) -> np.ndarray | float:
    """Entropy in bits along the last axis of a spectrum array."""
    p = _clip_probabilities(np.asarray(s, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    out = np.sum(terms, axis=-1) + 0.0
    return out if np.ndim(out) else float(out)


def ln_from_u(
    u_abs: ArrayLike, theta: float, field_pop: ArrayLike | None = None
) -> np.ndarray | float:
    """Pure-state LN ``log2(1 + 2 cos^2(theta/2) sqrt(|u|^2 - |u|^4))``.

    Examples
    --------
    >>> round(float(ln_from_u(np.sqrt(0.5), 0.0)), 12)
    1.0
    """
    s = coherence_product(u_abs, field_pop)
    out = np.log1p(2.0 * np.cos(theta / 2.0) ** 2 * np.sqrt(s)) / np.log(2.0)
    return out if np.ndim(out) else float(out)


def eoe_from_u(
    u_abs: ArrayLike, theta: float, field_pop: ArrayLike | None = None
) -> np.ndarray | float:
    """Entropy of entanglement for a pure start from ``|u|``."""
    return eoe_from_spectrum(reduced_eigs_from_u(u_abs, theta, field_pop))
