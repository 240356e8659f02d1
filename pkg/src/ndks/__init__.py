"""Nonlinear displaced Kerr states in a truncated Fock space.

The state is built as D(beta) U_K(gamma) |alpha^p>, a photon-added coherent
state sent through a Kerr medium and then displaced. Every closed-form
quantity has an independent operator-matrix route next to it so the two can
be checked against each other.
"""

from ndks.errors import (
    CutoffTooSmall,
    DimensionMismatch,
    GridEvaluationError,
    NdksError,
    NonConvergence,
    NotHermitian,
    VacuumState,
)
from ndks.fock import NdksParams, build_ndks, choose_cutoff

__version__ = "0.1.0"

__all__ = [
    "CutoffTooSmall",
    "DimensionMismatch",
    "GridEvaluationError",
    "NdksError",
    "NdksParams",
    "NonConvergence",
    "NotHermitian",
    "VacuumState",
    "build_ndks",
    "choose_cutoff",
    "__version__",
]
