"""Gaussian (free-fermion) states of the chain and their Majorana contractions.

Majorana convention: A_j = c_j^dag + c_j, B_j = c_j^dag - c_j, so that
sz_j = A_j B_j and sx_j sx_{j+1} = B_j A_{j+1}.  Every state handled here is
a product over momentum pairs (k, -k) of two-level states.  The pair at
momentum k is described by a real Bloch vector m_k in the basis
{|0>, c_k^dag c_{-k}^dag |0>}; its ground state at field g is
(0, sin theta_k, cos theta_k).  The contractions then read

    <B_j A_{j+l}> = -avg_k [ m_z cos(kl) - m_y sin(kl) ]
    <A_j A_{j+l}> = <B_j B_{j+l}> = i avg_k [ m_x sin(kl) ]      (l != 0)

with avg_k = (2/L) sum over positive NS momenta, or (1/pi) int_0^pi dk.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError
from .ising_fermion import (
    QuenchProtocol,
    bogoliubov_angle,
    dispersion,
    mode_grid,
    quench_angle_cos,
)

ASYMPTOTIC = "asymptotic"

DEFAULT_L_MAX = 200
FFT_TOL = 1e-13
FFT_MAX_POINTS = 1 << 24


@dataclass(frozen=True)
class ContractionKernels:
    """Translation-invariant Majorana two-point functions for |l| <= l_max.

    Arrays are indexed by ``l + l_max``.  ``f_aa`` and ``f_bb`` carry the full
    contraction including l = 0 (<A A> = 1, <B B> = -1).
    """

    f_ba: np.ndarray
    f_aa: np.ndarray
    f_bb: np.ndarray
    m_z: float
    time: Union[float, str]
    l_max: int
    L: Optional[int] = None
    stationary: bool = False
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("f_ba", "f_aa", "f_bb"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (2 * self.l_max + 1,):
                raise InvalidArgumentError(f"{name} must have length 2*l_max+1")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def _lookup(self, arr, l):
        l = np.asarray(l)
        if np.any(np.abs(l) > self.l_max):
            raise InvalidArgumentError(
                f"separation {int(np.max(np.abs(l)))} exceeds kernel range l_max={self.l_max}")
        return arr[l + self.l_max]

    def ba(self, l):
        """<B_j A_{j+l}>."""
        return self._lookup(self.f_ba, l)

    def aa(self, l):
        """<A_j A_{j+l}>."""
        return self._lookup(self.f_aa, l)

    def bb(self, l):
        """<B_j B_{j+l}>."""
        return self._lookup(self.f_bb, l)

    def ab(self, l):
        """<A_j B_{j+l}> = -<B_{j+l} A_j>."""
        return -self.ba(-np.asarray(l))

    def with_tables(self, **changes):
        """Copy with some tables replaced (used for perturbation fixtures)."""
        data = dict(f_ba=self.f_ba, f_aa=self.f_aa, f_bb=self.f_bb, m_z=self.m_z,
                    time=self.time, l_max=self.l_max, L=self.L,
                    stationary=self.stationary, meta=dict(self.meta))
        data.update(changes)
        return ContractionKernels(**data)


@dataclass(frozen=True)
class MajoranaCovariance:
    """Antisymmetric matrix of contractions over a window of sites.

    Rows are interleaved (A_1, B_1, A_2, B_2, ...); entry (a, b) for a < b is
    <w_a w_b>, the lower triangle is its negative and the diagonal is zero.
    """

    matrix: np.ndarray
    n_sites: int

    def index(self, site: int, species: str) -> int:
        if not 0 <= site < self.n_sites or species not in ("A", "B"):
            raise InvalidArgumentError(f"no Majorana {species}_{site} in this window")
        return 2 * site + (species == "B")

    def singular_values(self):
        return np.linalg.svd(self.matrix, compute_uv=False)

    def purity_defect(self) -> float:
        """max |M M^dag - 1|; zero for pure Gaussian states."""
        m = self.matrix
        return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


# ---------------------------------------------------------------- Bloch data


def _pair_angles(g, k):
    c, s = bogoliubov_angle(g, k)
    return np.asarray(c, dtype=float), np.asarray(s, dtype=float)


def bloch_vectors(g0, gf, k, t):
    """Pair Bloch vectors (m_x, m_y, m_z) after evolving for time t.

    ``t`` may be ``ASYMPTOTIC`` for the dephased (GGE) limit.
    """
    k = np.asarray(k, dtype=float)
    c0, s0 = _pair_angles(g0, k)
    if g0 == gf:
        return np.zeros_like(k), s0, c0
    cf, sf = _pair_angles(gf, k)
    cd = c0 * cf + s0 * sf
    if t == ASYMPTOTIC:
        return np.zeros_like(k), cd * sf, cd * cf
    phase = 2.0 * dispersion(gf, k) * t
    cos_p, sin_p = np.cos(phase), np.sin(phase)
    mx = -sin_p * (sf * c0 - cf * s0)
    my = cd * sf + cos_p * (s0 - cd * sf)
    mz = cd * cf + cos_p * (c0 - cd * cf)
    return mx, my, mz


# -------------------------------------------------------------- mode sums


def _ns_fourier(h, L, l_values):
    """sum_{m} h_m exp(i k_m l) over positive NS momenta, for integer l."""
    h = np.asarray(h)
    padded = np.zeros(L, dtype=complex)
    padded[: L // 2] = h
    base = L * np.fft.ifft(padded)
    l_values = np.asarray(l_values)
    # exp(i pi l / L) with the unwrapped l already carries the antiperiodic sign
    return np.exp(1j * np.pi * l_values / L) * base[np.mod(l_values, L)]


def _tables_from_modes(mx, my, mz, L, l_max):
    ls = np.arange(-l_max, l_max + 1)
    norm = 2.0 / L
    sz = _ns_fourier(mz, L, ls)
    sy = _ns_fourier(my, L, ls)
    f_ba = -norm * (sz.real - sy.imag)
    if np.any(mx):
        f_off = 1j * norm * _ns_fourier(mx, L, ls).imag
    else:
        f_off = np.zeros(ls.shape, dtype=complex)
    f_aa = f_off.copy()
    f_bb = f_off.copy()
    f_aa[l_max] = 1.0
    f_bb[l_max] = -1.0
    return f_ba, f_aa, f_bb


# ----------------------------------------------------- thermodynamic limit


def _stationary_tables_fft(g0, gf, l_max):
    """Midpoint rule on the NS grid, doubled until tables stop changing.

    The integrand is smooth and periodic, so the rule converges fast; the
    only error is aliasing from separations l +- M.
    """
    points = max(1 << 12, 1 << int(np.ceil(np.log2(16 * (l_max + 1)))))
    prev = None
    while True:
        k = mode_grid(points)
        _, my, mz = bloch_vectors(g0, gf, k, ASYMPTOTIC)
        cur = _tables_from_modes(np.zeros_like(k), my, mz, points, l_max)
        if prev is not None:
            diff = float(np.max(np.abs(cur[0] - prev[0])))
            if diff < FFT_TOL:
                return cur
        if points * 2 > FFT_MAX_POINTS:
            raise NumericalFailureError(
                "kernel mode sum did not converge",
                {"g0": g0, "gf": gf, "l_max": l_max, "points": points,
                 "last_change": diff if prev is not None else None})
        prev = cur
        points *= 2


_GL_ORDER = 16


def _evolved_tables_tl(g0, gf, t, l_max, tol=1e-11, max_panels=1 << 16):
    """Composite Gauss-Legendre with panel doubling.

    Initial panel width resolves both the time phase 2 E_k t and the
    Fourier factor kl.
    """
    e_max = 1.0 + gf
    width = min(np.pi / (2.0 * e_max * max(t, 1e-12)), np.pi / max(l_max, 1), np.pi / 4)
    panels = int(np.ceil(np.pi / width))
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    ls = np.arange(l_max + 1)
    prev = None
    while True:
        edges = np.linspace(0.0, np.pi, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        k = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        wk = (half[:, None] * w[None, :]).ravel() / np.pi
        mx, my, mz = bloch_vectors(g0, gf, k, t)
        kl = np.outer(ls, k)
        cos_kl, sin_kl = np.cos(kl), np.sin(kl)
        cur = np.stack([cos_kl @ (wk * mz), sin_kl @ (wk * my), sin_kl @ (wk * mx)])
        if prev is not None and np.max(np.abs(cur - prev)) < tol:
            break
        if panels * 2 > max_panels:
            raise NumericalFailureError(
                "evolved kernel quadrature did not converge",
                {"t": t, "l_max": l_max, "panels": panels})
        prev = cur
        panels *= 2
    cz, sy, sx = cur
    cz_full = np.concatenate([cz[:0:-1], cz])
    sy_full = np.concatenate([-sy[:0:-1], sy])
    sx_full = np.concatenate([-sx[:0:-1], sx])
    f_ba = -(cz_full - sy_full)
    f_aa = 1j * sx_full.astype(complex)
    f_bb = f_aa.copy()
    f_aa[l_max] = 1.0
    f_bb[l_max] = -1.0
    return f_ba, f_aa, f_bb


# ------------------------------------------------------------- public ops


def _check_l_max(l_max):
    if int(l_max) != l_max or l_max < 0:
        raise InvalidArgumentError(f"l_max must be a non-negative integer (got {l_max!r})")
    return int(l_max)


def _build(g0, gf, t, L, l_max, stationary):
    l_max = _check_l_max(l_max)
    if L is not None:
        k = mode_grid(L)
        mx, my, mz = bloch_vectors(g0, gf, k, t)
        tables = _tables_from_modes(mx, my, mz, L, l_max)
    elif stationary:
        tables = _stationary_tables_fft(g0, gf, l_max)
    else:
        tables = _evolved_tables_tl(g0, gf, t, l_max)
    f_ba, f_aa, f_bb = tables
    m_z = float(-np.real(f_ba[l_max]))
    return ContractionKernels(f_ba, f_aa, f_bb, m_z, t, l_max, L, stationary,
                              {"g0": g0, "gf": gf})


def ground_kernels(g, l_max=DEFAULT_L_MAX, L=None) -> ContractionKernels:
    """Contractions in the (even-parity) ground state at field g."""
    if not (g >= 0):
        raise InvalidArgumentError(f"g must be >= 0 (got {g!r})")
    return _build(g, g, 0.0, L, l_max, stationary=True)


def evolved_kernels(q: QuenchProtocol, t: float, l_max=DEFAULT_L_MAX) -> ContractionKernels:
    """Contractions at time t after the quench, Heisenberg-evolved per mode."""
    if not (t >= 0) or math.isinf(t):
        raise InvalidArgumentError(f"t must be finite and >= 0 (got {t!r})")
    if not q.is_quench:
        k = ground_kernels(q.g0, l_max, q.L)
        return k.with_tables(time=float(t))
    return _build(q.g0, q.gf, float(t), q.L, l_max, stationary=False)


def gge_kernels(q: QuenchProtocol, l_max=DEFAULT_L_MAX) -> ContractionKernels:
    """Dephased (generalized Gibbs) contractions reached at long times."""
    if not q.is_quench:
        return ground_kernels(q.g0, l_max, q.L).with_tables(time=ASYMPTOTIC)
    return _build(q.g0, q.gf, ASYMPTOTIC, q.L, l_max, stationary=True)


DE_MAX_PAIRS = 12


def diagonal_ensemble_components(q: QuenchProtocol, l_max=DEFAULT_L_MAX):
    """Exact finite-L diagonal ensemble as a mixture of Gaussian states.

    Dephasing leaves every pair in the vacuum or the doubly occupied state of
    H(gf), with probabilities (1 +- cos Delta_k) / 2.  The mixture over the
    2^(L/2) pair configurations is not Gaussian; each term is.  Returns a list
    of (weight, ContractionKernels).
    """
    if q.L is None:
        raise InvalidArgumentError("the exact diagonal ensemble needs a finite L")
    if not q.is_quench:
        return [(1.0, gge_kernels(q, l_max))]
    pairs = q.L // 2
    if pairs > DE_MAX_PAIRS:
        raise InvalidArgumentError(
            f"L={q.L} gives 2^{pairs} configurations; use L <= {2 * DE_MAX_PAIRS}")
    l_max = _check_l_max(l_max)
    k = mode_grid(q.L)
    _, my, mz = bloch_vectors(q.g0, q.gf, k, ASYMPTOTIC)
    cd = quench_angle_cos(q.g0, q.gf, k)
    # unit Bloch vector of the H(gf) vacuum; the pair state is its negative
    cf, sf = _pair_angles(q.gf, k)
    p_plus = 0.5 * (1.0 + cd)
    zeros = np.zeros_like(k)
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=pairs):
        signs = np.array(signs)
        weight = float(np.prod(np.where(signs > 0, p_plus, 1.0 - p_plus)))
        if weight == 0.0:
            continue
        f_ba, f_aa, f_bb = _tables_from_modes(zeros, signs * sf, signs * cf, q.L, l_max)
        out.append((weight, ContractionKernels(
            f_ba, f_aa, f_bb, float(-np.real(f_ba[l_max])), ASYMPTOTIC, l_max, q.L, True,
            {"g0": q.g0, "gf": q.gf})))
    return out


def kernels_to_covariance(kernels: ContractionKernels, n: int) -> MajoranaCovariance:
    """Covariance matrix of the Majoranas on ``n`` consecutive sites."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"window must be a positive integer (got {n!r})")
    n = int(n)
    if n - 1 > kernels.l_max:
        raise InvalidArgumentError(f"window {n} exceeds kernel range l_max={kernels.l_max}")
    sites = np.repeat(np.arange(n), 2)
    species = np.tile([0, 1], n)
    d = sites[None, :] - sites[:, None]
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    for sa in (0, 1):
        for sb in (0, 1):
            mask = (species[:, None] == sa) & (species[None, :] == sb)
            if (sa, sb) == (0, 0):
                vals = kernels.aa(d)
            elif (sa, sb) == (1, 1):
                vals = kernels.bb(d)
            elif (sa, sb) == (1, 0):
                vals = kernels.ba(d)
            else:
                vals = kernels.ab(d)
            m[mask] = vals[mask]
    upper = np.triu(m, 1)
    return MajoranaCovariance(upper - upper.T, n)
