"""Spin-spin correlators from Majorana contractions.

Under the Jordan-Wigner map used in :mod:`qfiquench.gaussian_state`

    sx_0 sx_n = B_0 A_1 B_1 A_2 ... B_{n-1} A_n
    sy_0 sy_n = (-1)^n A_0 B_1 A_1 B_2 ... A_{n-1} B_n
    sz_0 sz_n = A_0 B_0 A_n B_n

Wick's theorem turns each string into the Pfaffian of its pairwise
contractions.  The strings for n are prefixes of those for n + 1, so one
elimination yields the whole series.  In stationary states <AA> and <BB>
vanish off site and the Pfaffian collapses to a Toeplitz determinant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError
from .gaussian_state import ContractionKernels
from .pfaffian import leading_pfaffians, toeplitz_leading_dets

IMAG_TOL = 1e-10
ALPHAS = ("x", "y", "z")


@dataclass(frozen=True)
class CorrelatorSeries:
    """Connected correlators G_n = <s_0 s_n> - <s>^2 for n = 1 .. n_max.

    ``g_zero`` is the on-site term G_0 = 1 - <s>^2.
    """

    alpha: str
    values: np.ndarray
    time: Union[float, str]
    tail_bound: float
    xi_est: Optional[float] = None
    mean: float = 0.0

    @property
    def n_max(self) -> int:
        return len(self.values)

    @property
    def g_zero(self) -> float:
        return 1.0 - self.mean ** 2


def _contraction(kernels, s1, i, s2, j):
    d = np.asarray(j) - np.asarray(i)
    table = {("A", "A"): kernels.aa, ("B", "B"): kernels.bb,
             ("B", "A"): kernels.ba, ("A", "B"): kernels.ab}[(s1, s2)]
    return table(d)


def string_ops(alpha: str, n: int):
    """(species, site) list of the Majorana string for direction alpha."""
    if alpha == "x":
        ops = [("B", 0)]
        for l in range(1, n):
            ops += [("A", l), ("B", l)]
        return ops + [("A", n)]
    if alpha == "y":
        ops = [("A", 0)]
        for l in range(1, n):
            ops += [("B", l), ("A", l)]
        return ops + [("B", n)]
    if alpha == "z":
        return [("A", 0), ("B", 0), ("A", n), ("B", n)]
    raise InvalidArgumentError(f"alpha must be one of x, y, z (got {alpha!r})")


def string_matrix(kernels: ContractionKernels, ops):
    """Antisymmetric matrix M_ab = <X_a X_b> of a Majorana string."""
    species = np.array([s for s, _ in ops])
    sites = np.array([i for _, i in ops])
    size = len(ops)
    m = np.zeros((size, size), dtype=complex)
    iu, ju = np.triu_indices(size, 1)
    for s1 in ("A", "B"):
        for s2 in ("A", "B"):
            mask = (species[iu] == s1) & (species[ju] == s2)
            if np.any(mask):
                m[iu[mask], ju[mask]] = _contraction(kernels, s1, sites[iu[mask]], s2, sites[ju[mask]])
    return m - m.T


def _as_real(values, what):
    values = np.asarray(values)
    if values.size and np.max(np.abs(np.imag(values))) > IMAG_TOL:
        raise NumericalFailureError(
            f"{what} has an imaginary part above {IMAG_TOL:g}",
            {"max_imag": float(np.max(np.abs(np.imag(values))))})
    return np.real(values)


def _check_n(kernels, n, span):
    if int(n) != n or n < 0:
        raise InvalidArgumentError(f"n must be a non-negative integer (got {n!r})")
    if span > kernels.l_max:
        raise InvalidArgumentError(f"n={n} needs separations up to {span}, kernels stop at {kernels.l_max}")


def pfaffian_series(kernels: ContractionKernels, alpha: str, n_max: int) -> np.ndarray:
    """<s_0 s_n> for n = 1 .. n_max via leading Pfaffians (x, y only)."""
    if alpha not in ("x", "y"):
        raise InvalidArgumentError("Pfaffian series is defined for x and y strings")
    _check_n(kernels, n_max, n_max)
    if n_max == 0:
        return np.zeros(0)
    pf = leading_pfaffians(string_matrix(kernels, string_ops(alpha, n_max)))
    if alpha == "y":
        pf = pf * (-1.0) ** np.arange(1, n_max + 1)
    return _as_real(pf, f"<s{alpha} s{alpha}>")


def toeplitz_series(kernels: ContractionKernels, alpha: str, n_max: int) -> np.ndarray:
    """<s_0 s_n> for n = 1 .. n_max from Toeplitz determinants.

    Valid only when <AA> and <BB> vanish off site (stationary kernels).
    """
    if alpha not in ("x", "y"):
        raise InvalidArgumentError("Toeplitz series is defined for x and y strings")
    _check_n(kernels, n_max, n_max)
    if n_max == 0:
        return np.zeros(0)
    idx = np.arange(n_max)
    f_ba = kernels.f_ba
    if np.max(np.abs(np.imag(f_ba))) <= IMAG_TOL:
        f_ba = np.real(f_ba)
    l0 = kernels.l_max
    if alpha == "x":
        # T_ij = <B_i A_{j+1}> = f_ba(j - i + 1)
        c, r = f_ba[l0 + 1 - idx], f_ba[l0 + 1 + idx]
    else:
        # T_ij = <B_{j+1} A_i> = f_ba(i - j - 1)
        c, r = f_ba[l0 - 1 + idx], f_ba[l0 - 1 - idx]
    return _as_real(toeplitz_leading_dets(c, r), f"<s{alpha} s{alpha}>")


def _full_series(kernels, alpha, n_max, use_toeplitz=None):
    if use_toeplitz is None:
        use_toeplitz = kernels.stationary
    if use_toeplitz:
        return toeplitz_series(kernels, alpha, n_max)
    return pfaffian_series(kernels, alpha, n_max)


def corr_xx(kernels: ContractionKernels, n: int, use_toeplitz=None) -> float:
    """<sx_j sx_{j+n}>."""
    _check_n(kernels, n, n)
    if n == 0:
        return 1.0
    return float(_full_series(kernels, "x", n, use_toeplitz)[-1])


def corr_yy(kernels: ContractionKernels, n: int, use_toeplitz=None) -> float:
    """<sy_j sy_{j+n}>."""
    _check_n(kernels, n, n)
    if n == 0:
        return 1.0
    return float(_full_series(kernels, "y", n, use_toeplitz)[-1])


def magnetization_z(kernels: ContractionKernels) -> float:
    return float(_as_real(kernels.ab(0), "<sz>"))


def zz_series(kernels: ContractionKernels, n_max: int) -> np.ndarray:
    """Connected <sz_0 sz_n> - <sz>^2 for n = 1 .. n_max."""
    _check_n(kernels, n_max, n_max)
    n = np.arange(1, n_max + 1)
    # Pf of the 4x4 string minus the disconnected <A0 B0><An Bn> term
    val = -kernels.aa(n) * kernels.bb(n) + kernels.ab(n) * kernels.ba(n)
    return _as_real(val, "<sz sz>")


def corr_zz_connected(kernels: ContractionKernels, n: int) -> float:
    """<sz_j sz_{j+n}> - <sz>^2 (n = 0 gives 1 - <sz>^2)."""
    _check_n(kernels, n, n)
    if n == 0:
        return 1.0 - magnetization_z(kernels) ** 2
    return float(zz_series(kernels, n)[-1])


def _fit_xi(values):
    """Decay length from a log-linear fit over the last half of the series."""
    v = np.abs(np.asarray(values))
    n = np.arange(1, len(v) + 1)
    sel = (n > len(v) // 2) & (v > 1e-250)
    if sel.sum() < 3:
        return None
    slope = np.polyfit(n[sel], np.log(v[sel]), 1)[0]
    if slope >= 0:
        return None
    return float(-1.0 / slope)


def connected_series(kernels: ContractionKernels, alpha: str, n_max: int,
                     use_toeplitz=None) -> CorrelatorSeries:
    """Connected correlators G^alpha_n, n = 1 .. n_max.

    For x and y the even-parity states used here have <s> = 0, so the
    connected and full correlators coincide.
    """
    if alpha not in ALPHAS:
        raise InvalidArgumentError(f"alpha must be one of x, y, z (got {alpha!r})")
    if alpha == "z":
        values = zz_series(kernels, n_max)
        mean = magnetization_z(kernels)
    else:
        values = _full_series(kernels, alpha, n_max, use_toeplitz) if n_max else np.zeros(0)
        mean = 0.0
    tail = float(abs(values[-1])) if len(values) else 1.0
    xi = _fit_xi(values) if kernels.stationary and len(values) >= 6 else None
    return CorrelatorSeries(alpha, np.asarray(values, dtype=float), kernels.time, tail, xi, mean)


def ensemble_series(components, alpha: str, n_max: int) -> CorrelatorSeries:
    """Connected correlators of a mixture of Gaussian states.

    ``components`` is a list of (weight, ContractionKernels).  Full
    correlators average linearly; the z series is connected with respect to
    the mixture's own magnetization.
    """
    if not components:
        raise InvalidArgumentError("empty mixture")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, atol=1e-12):
        raise InvalidArgumentError("mixture weights must be non-negative and sum to 1")
    if alpha not in ALPHAS:
        raise InvalidArgumentError(f"alpha must be one of x, y, z (got {alpha!r})")
    full = np.zeros(n_max)
    mean = 0.0
    for w, kern in components:
        if alpha == "z":
            m = magnetization_z(kern)
            full += w * (zz_series(kern, n_max) + m * m)
            mean += w * m
        else:
            full += w * _full_series(kern, alpha, n_max)
    values = full - mean ** 2
    tail = float(abs(values[-1])) if n_max else 1.0
    return CorrelatorSeries(alpha, values, components[0][1].time, tail, None, mean)
