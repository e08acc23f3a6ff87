"""Driven three-level atom ultrastrongly coupled to a cavity mode.

Modules
-------
hilbert
    Truncated ``{b, g, e} x Fock`` space and elementary operators.
rabi
    Quantum Rabi spectrum and the dressed basis of the undriven system.
effective
    Far-detuned two-level and resonant Lambda reductions.
dynamics
    Closed-system propagation under the bichromatic drive.
lindblad
    Dressed-state master equation, photon flux, ``G2`` and steady states.
cli
    YAML scenarios to CSV.
"""

from .errors import AdiabaticEliminationError, NumericalError, ValidationError
from .hilbert import TruncatedSpace, build_space
from .lindblad import DampingRates
from .rabi import SystemParams, rabi_spectrum

__all__ = [
    "AdiabaticEliminationError",
    "DampingRates",
    "NumericalError",
    "SystemParams",
    "TruncatedSpace",
    "ValidationError",
    "build_space",
    "rabi_spectrum",
]

__version__ = "0.1.0"
