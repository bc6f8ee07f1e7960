"""Single-particle data of the transverse-field Ising chain.

Conventions (J = 1)::

    H = -1/2 sum_j (sx_j sx_{j+1} + g sz_j)
    E_k(g) = sqrt(1 + g^2 - 2 g cos k)
    cos(theta_k) = (g - cos k) / E_k,   sin(theta_k) = sin k / E_k

A field equal to ``INFINITY`` is treated through its analytic limit
(theta_k = 0), never as a large float.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, SingularModeError

INFINITY = math.inf
THERMODYNAMIC_LIMIT = None


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


def _check_field(g, name="g"):
    if not (g >= 0):
        raise InvalidArgumentError(f"{name} must be >= 0 (got {g!r})")


@dataclass(frozen=True)
class QuenchProtocol:
    """Sudden quench g0 -> gf on a chain of length L (None = thermodynamic limit)."""

    g0: float
    gf: float
    L: Optional[int] = THERMODYNAMIC_LIMIT
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        _check_field(self.g0, "g0")
        _check_field(self.gf, "gf")
        if math.isinf(self.gf):
            raise InvalidArgumentError("gf must be finite")
        if self.L is not None:
            if int(self.L) != self.L or self.L < 2 or self.L % 2:
                raise InvalidArgumentError(f"L must be an even integer >= 2 (got {self.L!r})")
            object.__setattr__(self, "L", int(self.L))
        boundary = Boundary(self.boundary)
        if boundary is Boundary.OPEN:
            # only translation-invariant (NS sector) results are implemented
            raise InvalidArgumentError("open boundary conditions are not supported")
        object.__setattr__(self, "boundary", boundary)

    @property
    def is_quench(self) -> bool:
        return self.g0 != self.gf

    @property
    def thermodynamic(self) -> bool:
        return self.L is None


def mode_grid(L: int) -> np.ndarray:
    """Positive NS momenta k_m = pi (2m + 1) / L, m = 0 .. L/2 - 1."""
    if int(L) != L or L < 2 or L % 2:
        raise InvalidArgumentError(f"L must be an even integer >= 2 (got {L!r})")
    L = int(L)
    return np.pi * (2 * np.arange(L // 2) + 1) / L


def dispersion(g, k):
    """Quasiparticle energy E_k(g). Works elementwise on arrays of k."""
    _check_field(g)
    if math.isinf(g):
        return np.full_like(np.asarray(k, dtype=float), np.inf)[()]
    k = np.asarray(k, dtype=float)
    return np.sqrt(np.maximum(1.0 + g * g - 2.0 * g * np.cos(k), 0.0))[()]


def bogoliubov_angle(g, k):
    """Return (cos theta_k, sin theta_k) for field g."""
    _check_field(g)
    k = np.asarray(k, dtype=float)
    if math.isinf(g):
        return np.ones_like(k)[()], np.zeros_like(k)[()]
    e = dispersion(g, k)
    if np.any(e == 0.0):
        raise SingularModeError("zero-energy mode (g = 1, k = 0) has no Bogoliubov angle")
    return ((g - np.cos(k)) / e)[()], (np.sin(k) / e)[()]


def quench_angle_cos(g0, gf, k):
    """cos(Delta_k) = cos(theta_k(g0) - theta_k(gf))."""
    _check_field(g0, "g0")
    _check_field(gf, "gf")
    k = np.asarray(k, dtype=float)
    if math.isinf(g0) and math.isinf(gf):
        return np.ones_like(k)[()]
    if math.isinf(g0) or math.isinf(gf):
        g = gf if math.isinf(g0) else g0
        return bogoliubov_angle(g, k)[0]
    if g0 == gf:
        if np.any(dispersion(g0, k) == 0.0):
            raise SingularModeError("zero-energy mode (g = 1, k = 0)")
        return np.ones_like(k)[()]
    e0, ef = dispersion(g0, k), dispersion(gf, k)
    if np.any(e0 * ef == 0.0):
        raise SingularModeError("zero-energy mode (g = 1, k = 0)")
    c = (g0 * gf - (g0 + gf) * np.cos(k) + 1.0) / (e0 * ef)
    return np.clip(c, -1.0, 1.0)[()]


def gge_occupation(g0, gf, k):
    """Post-quench quasiparticle occupation n_k = (1 - cos Delta_k) / 2."""
    return (0.5 * (1.0 - np.asarray(quench_angle_cos(g0, gf, k))))[()]


@dataclass(frozen=True)
class ModeTable:
    momenta: np.ndarray
    eps0: np.ndarray
    epsf: np.ndarray
    cos_delta: np.ndarray
    n_gge: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("momenta", "eps0", "epsf", "cos_delta", "n_gge"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def mode_table(q: QuenchProtocol) -> ModeTable:
    """Tabulate the mode data of a finite-L protocol on its NS grid."""
    if q.L is None:
        raise InvalidArgumentError("mode_table needs a finite chain length")
    k = mode_grid(q.L)
    cd = quench_angle_cos(q.g0, q.gf, k)
    return ModeTable(k, dispersion(q.g0, k), dispersion(q.gf, k), cd, 0.5 * (1.0 - cd))
