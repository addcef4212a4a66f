"""Exact atom-field entanglement dynamics from a vacuum field.

Modules
-------
core       states and the entropy / log-negativity measures
jcm        closed-form single-mode solutions
multimode  one-excitation spectral dynamics for M modes and cavity ladders
cavity     continuum intracavity field: kernel, poles, long-time decay
oracle     brute-force evolution and continuum discretization for verification
"""

from .core import BlochVector, TruncatedState, eoe, log_negativity
from .errors import EntangledynError, ValidationError
from .jcm import JcmParams
from .multimode import ModeSet, PoleSet
from .cavity import CavityParams, CavityPole

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "TruncatedState",
    "eoe",
    "log_negativity",
    "EntangledynError",
    "ValidationError",
    "JcmParams",
    "ModeSet",
    "PoleSet",
    "CavityParams",
    "CavityPole",
    "__version__",
]
