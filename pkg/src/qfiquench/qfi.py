"""Quantum Fisher information densities of the quenched Ising chain.

For a collective spin S^a = 1/2 sum_j s^a_j and a translation-invariant
state, the QFI density of a pure state is

    f_Q(S^a) = G_0 + 2 sum_{n>=1} G^a_n,     G_0 = 1 - <s^a>^2

with G^a_n the connected correlators.  f_Q > k certifies (k+1)-partite
entanglement.

The x and y asymptotic densities are summed from generalized Gibbs
correlators.  The z density is not: S^z is quadratic in the fermions, its
light-cone contributions never dephase, and the long-time limit of the
pure-state variance keeps half of every oscillating term,

    f_Q(S^z, t -> inf) = 2 avg_k [1 - a_k^2 - b_k^2 / 2],
    a_k = cos(Delta_k) cos(theta_k(gf)),   b_k = cos(theta_k(g0)) - a_k.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import integrate

from .errors import (
    ConvergenceFailureError,
    InvalidArgumentError,
    TailNotConvergedError,
)
from .gaussian_state import ASYMPTOTIC, evolved_kernels, gge_kernels
from .ising_fermion import (
    INFINITY,
    QuenchProtocol,
    bogoliubov_angle,
    dispersion,
    mode_grid,
    quench_angle_cos,
)
from .string_correlators import (
    CorrelatorSeries,
    connected_series,
    pfaffian_series,
    toeplitz_series,
)

G0_ZERO = "g0=0"
G0_INF = "g0=inf"
TAIL_TOL = 1e-10
N_START = 64
N_CAP = 1 << 18
L_CAP = 1 << 20
TIE_ORDER = ("x", "z", "y")


@dataclass(frozen=True)
class QfiResult:
    f_x: float
    f_y: float
    f_z: float
    f_opt: float
    opt_direction: str
    depth: int
    time: Union[float, str] = ASYMPTOTIC
    L_used: Optional[int] = None
    converged: bool = True
    residual: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, f_x, f_y, f_z, N=None, **kw):
        f_opt, direction = qfi_optimal(f_x, f_y, f_z)
        return cls(float(f_x), float(f_y), float(f_z), f_opt, direction,
                   witness_bound(f_opt, N), **kw)


@dataclass(frozen=True)
class XiReport:
    xi: float
    xi_perturbative: Optional[float]
    delta_g: float
    divergent: bool = False


# ------------------------------------------------------------ basic pieces


def qfi_direction(series: CorrelatorSeries, tol=TAIL_TOL):
    """Return (f_Q, residual) for a connected series.

    The residual 2 * n_resid * tail_bound uses the fitted decay length as
    n_resid when available.
    """
    n_resid = series.xi_est if series.xi_est else 1.0
    residual = 2.0 * n_resid * series.tail_bound
    value = series.g_zero + 2.0 * float(np.sum(series.values))
    if series.tail_bound > tol:
        raise TailNotConvergedError(
            f"|G_n| = {series.tail_bound:.3g} at n = {series.n_max} exceeds {tol:g}",
            value, residual)
    return value, residual


def qfi_optimal(fx, fy, fz):
    """Largest of the three axis densities; ties go x, then z, then y."""
    vals = {"x": float(fx), "y": float(fy), "z": float(fz)}
    if not all(math.isfinite(v) for v in vals.values()):
        raise InvalidArgumentError("densities must be finite")
    best = max(vals.values())
    for d in TIE_ORDER:
        if vals[d] == best:
            return best, d


def witness_bound(f_opt, N=None) -> int:
    """Certified entanglement depth 1 + max{k : f_opt > k}, clamped to [1, N]."""
    if not (f_opt >= 0):
        raise InvalidArgumentError(f"f_opt must be >= 0 (got {f_opt!r})")
    depth = max(1, int(math.ceil(f_opt)))
    if N is not None:
        if N < 1:
            raise InvalidArgumentError("N must be >= 1")
        depth = min(depth, int(N))
    return depth


def fq_from_xi(xi):
    """Large-xi estimate f_Q ~ 1 + 2 xi."""
    if not (xi >= 0):
        raise InvalidArgumentError(f"xi must be >= 0 (got {xi!r})")
    return 1.0 + 2.0 * xi


def closed_form_fq(limit, alpha, gf):
    """Asymptotic densities for quenches from g0 = 0 or g0 = infinity."""
    if not (gf >= 0) or math.isinf(gf):
        raise InvalidArgumentError(f"gf must be finite and >= 0 (got {gf!r})")
    g = float(gf)
    if limit == G0_INF and alpha == "x":
        return 3.0 / (5.0 - 4.0 * g) if g <= 1 else (2 * g + 1) / (2 * g - 1)
    if limit == G0_INF and alpha == "z":
        return 1.5 if g <= 1 else 1.0 + 1.0 / (2 * g * g)
    if limit == G0_ZERO and alpha == "x":
        if g == 0:
            raise InvalidArgumentError("the g0=0, x form diverges at gf=0")
        return (8 - 5 * g * g) / (g * g) if g <= 1 else 3.0
    if limit == G0_ZERO and alpha == "z":
        return 3 + g ** 4 - 2.5 * g * g if g <= 1 else 1.5
    raise InvalidArgumentError(f"no closed form for limit={limit!r}, alpha={alpha!r}")


# --------------------------------------------------------- correlation length


def _kquad(func, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, 0.0, np.pi, limit=500, epsabs=1e-13, epsrel=1e-11, **kw)
    return val / np.pi


def xi_tilde(g0):
    """Coefficient in xi ~ xi_tilde / dg^2, from the second-order expansion."""
    if not (g0 >= 0) or g0 == 1:
        raise InvalidArgumentError(f"xi_tilde needs g0 >= 0, g0 != 1 (got {g0!r})")
    if math.isinf(g0):
        return math.inf
    inv = 0.5 * _kquad(lambda k: np.sin(k) ** 2 / dispersion(g0, k) ** 4)
    return 1.0 / inv


def correlation_length(g0, gf) -> XiReport:
    """Decay length of the stationary x correlator, 1/xi = -avg_k log|cos Delta_k|."""
    if not (g0 >= 0) or g0 == 1:
        raise InvalidArgumentError(f"g0 must be >= 0 and != 1 (got {g0!r})")
    if not (gf >= 0) or math.isinf(gf):
        raise InvalidArgumentError(f"gf must be finite and >= 0 (got {gf!r})")
    dg = gf - g0
    if dg == 0:
        return XiReport(math.inf, math.inf, 0.0, divergent=True)
    inv = -_kquad(lambda k: np.log(np.abs(quench_angle_cos(g0, gf, k))))
    xi_t = xi_tilde(g0)
    pert = xi_t / dg ** 2 if math.isfinite(xi_t) else None
    if inv <= 0:
        return XiReport(math.inf, pert, dg, divergent=True)
    return XiReport(1.0 / inv, pert, dg)


# --------------------------------------------------------------- z density


def _z_limit_terms(g0, gf, k):
    c0 = np.asarray(bogoliubov_angle(g0, k)[0])
    cf = np.asarray(bogoliubov_angle(gf, k)[0])
    cd = np.asarray(quench_angle_cos(g0, gf, k))
    a = cd * cf
    return a, c0 - a


def fz_long_time(g0, gf, L=None):
    """Long-time limit (time average at finite L) of the pure-state z density."""
    if L is None:
        def integrand(k):
            a, b = _z_limit_terms(g0, gf, k)
            return 1.0 - a * a - 0.5 * b * b
        return 2.0 * _kquad(integrand)
    a, b = _z_limit_terms(g0, gf, mode_grid(L))
    return 2.0 * float(np.mean(1.0 - a * a - 0.5 * b * b))


def fz_at_time(q: QuenchProtocol, t):
    """Exact z density at time t: 2 avg_k (1 - m_z,k(t)^2)."""
    from .gaussian_state import bloch_vectors

    if q.L is None:
        def integrand(k):
            return 1.0 - bloch_vectors(q.g0, q.gf, k, t)[2] ** 2
        # panels resolve the phase 2 E_k t
        return 2.0 * _kquad_fine(integrand, max(64, int(8 * (1.0 + q.gf) * t)))
    mz = bloch_vectors(q.g0, q.gf, mode_grid(q.L), t)[2]
    return 2.0 * float(np.mean(1.0 - mz * mz))


def _kquad_fine(func, panels):
    edges = np.linspace(0.0, np.pi, panels + 1)
    x, w = np.polynomial.legendre.leggauss(16)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    k = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wk = (half[:, None] * w[None, :]).ravel()
    return float(np.sum(wk * func(k))) / np.pi


# ------------------------------------------------------ asymptotic densities


def _tl_series(g0, gf, alpha, n_max):
    kern = gge_kernels(QuenchProtocol(g0, gf), n_max + 1)
    return connected_series(kern, alpha, n_max, use_toeplitz=True)


def asymptotic_density(g0, gf, alpha, tol=TAIL_TOL, n_cap=N_CAP):
    """Thermodynamic-limit f_Q(S^alpha, t -> infinity) and its residual."""
    if alpha == "z":
        return fz_long_time(g0, gf), 0.0
    if alpha not in ("x", "y"):
        raise InvalidArgumentError(f"alpha must be one of x, y, z (got {alpha!r})")
    n_max = N_START
    if g0 != gf and g0 < 1 and gf < 1 and math.isfinite(g0):
        # start near the expected decay length for long-ranged cases
        xi = correlation_length(g0, gf).xi
        n_max = max(n_max, 1 << int(np.ceil(np.log2(min(10 * xi, n_cap)))))
    value = None
    while True:
        series = _tl_series(g0, gf, alpha, n_max)
        try:
            value, residual = qfi_direction(series, tol)
            return value, residual
        except TailNotConvergedError as exc:
            if n_max * 2 > n_cap:
                raise TailNotConvergedError(
                    f"series not converged at n_max={n_max}", exc.partial_value, exc.residual)
            n_max *= 2


def asymptotic_qfi(g0, gf, tol=TAIL_TOL) -> QfiResult:
    vals, res = {}, 0.0
    for a in ("x", "y", "z"):
        vals[a], r = asymptotic_density(g0, gf, a, tol)
        res = max(res, r)
    return QfiResult.build(vals["x"], vals["y"], vals["z"], time=ASYMPTOTIC,
                           L_used=None, converged=True, residual=res,
                           meta={"g0": g0, "gf": gf})


# ------------------------------------------------------------- finite size


def _pbc_sum(g_zero, values, L):
    """4 Var(S) / L on a ring: every separation 0 .. L-1 counted once."""
    half = L // 2
    v = np.asarray(values)[:half]
    return g_zero + 2.0 * float(np.sum(v[: half - 1])) + float(v[half - 1])


def finite_size_density(q: QuenchProtocol, alpha, t=ASYMPTOTIC):
    """f_Q at chain length q.L, at time t or for the dephased Gaussian state.

    x and y use the full ring sum of Gaussian correlators.  For z the
    asymptotic value is the finite-L time average of the pure-state density.
    """
    if q.L is None:
        raise InvalidArgumentError("finite_size_density needs a finite L")
    if alpha == "z":
        return fz_long_time(q.g0, q.gf, q.L) if t == ASYMPTOTIC else fz_at_time(q, t)
    half = q.L // 2
    if t == ASYMPTOTIC:
        kern = gge_kernels(q, half + 1)
        values = toeplitz_series(kern, alpha, half)
    else:
        kern = evolved_kernels(q, t, half + 1)
        values = pfaffian_series(kern, alpha, half)
    return _pbc_sum(1.0, values, q.L)


def _even(x):
    n = int(math.ceil(x))
    return n + (n % 2)


def converge_L(q: QuenchProtocol, alpha="x", tol=1e-6, L_cap=L_CAP) -> QfiResult:
    """Double L until |f_Q(2L) - f_Q(L)| < tol for the asymptotic density."""
    if not (tol > 0):
        raise InvalidArgumentError("tol must be > 0")
    xi = 1.0
    if q.is_quench and q.g0 != 1:
        xi = correlation_length(q.g0, q.gf).xi
    L = max(400, _even(10 * xi)) if math.isfinite(xi) else L_cap
    trace = []
    prev = None
    while L <= L_cap:
        f = finite_size_density(QuenchProtocol(q.g0, q.gf, L), alpha)
        trace.append((L, f))
        if prev is not None and abs(f - prev) < tol:
            # the other axes are reported at the converged length only
            final = QuenchProtocol(q.g0, q.gf, L)
            vals = {a: (f if a == alpha else finite_size_density(final, a)) for a in "xyz"}
            return QfiResult.build(vals["x"], vals["y"], vals["z"], N=L, time=ASYMPTOTIC,
                                   L_used=L, converged=True, residual=abs(f - prev),
                                   meta={"trace": trace, "xi": xi, "alpha": alpha})
        prev = f
        L *= 2
    raise ConvergenceFailureError(f"no convergence below L cap {L_cap}", trace)


# ------------------------------------------------------------------ dynamics


def max_velocity(gf):
    """Largest group velocity max_k dE_k/dk = min(gf, 1)."""
    return min(float(gf), 1.0)


def _light_cone_density(q, t, alpha, buffer=40, flat_tol=1e-10):
    """x/y density at time t from the series inside the light cone.

    Beyond separations 2 v_max t the correlator is flat in n to exponential
    accuracy, so its value there is extended up to L/2.
    """
    half = q.L // 2
    n_lc = min(half, int(math.ceil(2 * max_velocity(q.gf) * t)) + buffer)
    while True:
        kern = evolved_kernels(q, t, n_lc + 1)
        values = pfaffian_series(kern, alpha, n_lc)
        if n_lc == half:
            return _pbc_sum(1.0, values, q.L), 0.0
        tail = values[-buffer // 2:]
        spread = float(np.max(tail) - np.min(tail))
        if spread <= flat_tol * max(1.0, abs(float(tail[-1]))):
            plateau = float(values[-1])
            extended = np.concatenate([values, np.full(half - n_lc, plateau)])
            return _pbc_sum(1.0, extended, q.L), spread * (half - n_lc)
        n_lc = min(half, int(1.5 * n_lc))


def qfi_dynamics(q: QuenchProtocol, t_grid, alpha="x"):
    """f_Q(S^alpha, t) on t_grid for a finite ring. Returns (values, residuals)."""
    if q.L is None:
        raise InvalidArgumentError("qfi_dynamics needs a finite L")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or np.any(t_grid < 0) or not np.all(np.isfinite(t_grid)):
        raise InvalidArgumentError("t_grid must be finite and non-negative")
    t_max = float(np.max(t_grid))
    if q.L <= 2 * max_velocity(q.gf) * t_max:
        raise InvalidArgumentError(
            f"L={q.L} lets quasiparticles wrap before t={t_max:g}; "
            f"use L > {2 * max_velocity(q.gf) * t_max:g}")
    out = np.empty(t_grid.size)
    res = np.zeros(t_grid.size)
    for i, t in enumerate(t_grid):
        if alpha == "z":
            out[i] = fz_at_time(q, t)
        elif alpha in ("x", "y"):
            out[i], res[i] = _light_cone_density(q, t, alpha)
        else:
            raise InvalidArgumentError(f"alpha must be one of x, y, z (got {alpha!r})")
    return out, res


def _window(t_grid, values, t_min):
    t_grid = np.asarray(t_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = t_grid >= t_min
    return t_grid[sel], values[sel]


def dominant_frequency(t_grid, values, asymptote, t_min=0.0):
    """Angular frequency of the largest FFT peak of values - asymptote.

    Points before ``t_min`` are dropped so the early transient does not
    dominate.  Returns (frequency, bin width).
    """
    t_grid, values = _window(t_grid, values, t_min)
    dt = np.diff(t_grid)
    if t_grid.size < 4 or not np.allclose(dt, dt[0]):
        raise InvalidArgumentError("need a uniform time grid with at least 4 points")
    sig = values - asymptote
    sig = sig - sig.mean()
    power = np.abs(np.fft.rfft(sig))
    freqs = 2 * np.pi * np.fft.rfftfreq(sig.size, dt[0])
    i = 1 + int(np.argmax(power[1:]))
    return float(freqs[i]), float(freqs[1])


def decay_exponent(t_grid, values, asymptote, t_min=0.0):
    """Log-log slope of the local maxima of |values - asymptote|."""
    from scipy.signal import find_peaks

    t_grid, values = _window(t_grid, values, t_min)
    dev = np.abs(values - asymptote)
    peaks, _ = find_peaks(dev)
    peaks = peaks[(t_grid[peaks] > 0) & (dev[peaks] > 0)]
    if peaks.size < 3:
        raise InvalidArgumentError("too few oscillation maxima to fit a decay")
    return float(np.polyfit(np.log(t_grid[peaks]), np.log(dev[peaks]), 1)[0])


def gap(gf):
    """Quasiparticle gap 2 |1 - gf| (twice the k = 0 energy)."""
    return 2.0 * abs(1.0 - gf)


__all__ = [
    "G0_INF", "G0_ZERO", "INFINITY", "QfiResult", "XiReport", "asymptotic_density",
    "asymptotic_qfi", "closed_form_fq", "converge_L", "correlation_length",
    "decay_exponent", "dominant_frequency", "finite_size_density", "fq_from_xi", "fz_at_time",
    "fz_long_time", "gap", "qfi_direction", "qfi_dynamics", "qfi_optimal",
    "witness_bound", "xi_tilde",
]
