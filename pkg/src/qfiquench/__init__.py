"""Quantum Fisher information after quenches of the transverse-field Ising chain."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceFailureError,
    InvalidArgumentError,
    NumericalFailureError,
    QfiQuenchError,
    ResourceError,
    SingularModeError,
    TailNotConvergedError,
)
from .ising_fermion import INFINITY, THERMODYNAMIC_LIMIT, Boundary, QuenchProtocol  # noqa: E402
