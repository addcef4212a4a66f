"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EntangledynError(Exception):
    """Base class for library errors."""


class ValidationError(EntangledynError, ValueError):
    """An input violates a documented invariant."""


class BranchCutError(EntangledynError, ValueError):
    """A complex function was evaluated on (or numerically at) a branch cut."""


class DegenerateRootsError(EntangledynError, ValueError):
    """Roots are too close for a formula that assumes simple poles."""


class NearResonanceError(EntangledynError, ValueError):
    """The perturbative cavity pole is invalid because a mode branch is resonant."""


class PoleSearchError(EntangledynError, RuntimeError):
    """Base class for numerical pole-search failures."""


class ConvergenceError(PoleSearchError):
    """Newton iteration did not converge within the iteration budget."""


class CutCrossingError(PoleSearchError):
    """Every admissible Newton step would cross a branch cut."""


class SinglePoleError(PoleSearchError):
    """Only one pole was found where two were requested.

    The pole that was found is kept in ``pole`` so callers can still use it.
    """

    def __init__(self, message: str, pole=None):
        super().__init__(message)
        self.pole = pole


class OracleError(EntangledynError, ValueError):
    """Oracle precondition (for example time-step stability) violated."""
