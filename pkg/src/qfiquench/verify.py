"""Oracle-equivalence and identity checks behind ``qfiquench verify``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import ed_oracle as ed
from .gaussian_state import (
    diagonal_ensemble_components,
    evolved_kernels,
    gge_kernels,
)
from .ising_fermion import QuenchProtocol
from .pfaffian import pfaffian
from .qfi import fz_long_time
from .string_correlators import connected_series, ensemble_series, pfaffian_series, toeplitz_series

QUENCHES = ((0.5, 1.2), (2.0, 0.6))
TIMES = (0.0, 1.0, 5.0)
N_CORR = 6
KERNELS = ("f_ba", "f_aa", "f_bb")


@dataclass
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)

    def as_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def perturb(kernels, which):
    """Flip the sign of one contraction table (off-site part for f_aa, f_bb)."""
    if which is None:
        return kernels
    if which not in KERNELS:
        raise ValueError(f"unknown kernel {which!r}")
    table = np.array(getattr(kernels, which), copy=True)
    if which == "f_ba":
        table = -table
        return kernels.with_tables(f_ba=table, m_z=-kernels.m_z)
    l0 = kernels.l_max
    diag = table[l0]
    table = -table
    table[l0] = diag
    return kernels.with_tables(**{which: table})


def _correlator_checks(L, which):
    out = []
    for g0, gf in QUENCHES:
        q = QuenchProtocol(g0, gf, L)
        h = ed.build_hamiltonian(gf, L)
        dec = ed.spectral_decomposition(h)
        psi0 = ed.ground_state(g0, L)
        for t in TIMES:
            kern = perturb(evolved_kernels(q, t, N_CORR + 1), which)
            psi = dec.evolve(psi0, t)
            worst = 0.0
            for a in "xyz":
                ser = connected_series(kern, a, N_CORR, use_toeplitz=False)
                ref = ed.ed_connected_correlators(psi, a, N_CORR, L)
                worst = max(worst, float(np.max(np.abs(ser.values - ref))))
            out.append(Check(f"correlators L={L} ({g0}->{gf}) t={t:g}", worst, 1e-6))
        comps = [(w, perturb(k, which)) for w, k in diagonal_ensemble_components(q, N_CORR + 1)]
        rho = ed.diagonal_ensemble(psi0, dec)
        worst = 0.0
        for a in "xyz":
            ser = ensemble_series(comps, a, N_CORR)
            ref = ed.ed_connected_correlators(rho, a, N_CORR, L)
            worst = max(worst, float(np.max(np.abs(ser.values - ref))))
        out.append(Check(f"diagonal ensemble L={L} ({g0}->{gf})", worst, 1e-6))
    return out


def _identity_checks(L):
    out = []
    rng = np.random.default_rng(7)
    a = rng.normal(size=(10, 10))
    a = a - a.T
    out.append(Check("pfaffian^2 = det (10x10)", abs(pfaffian(a) ** 2 - np.linalg.det(a))
                     / abs(np.linalg.det(a)), 1e-8))

    kern = gge_kernels(QuenchProtocol(0.5, 1.2), 52)
    diff = 0.0
    for alpha in "xy":
        diff = max(diff, float(np.max(np.abs(pfaffian_series(kern, alpha, 50)
                                             - toeplitz_series(kern, alpha, 50)))))
    out.append(Check("Pfaffian vs Toeplitz path, n <= 50", diff, 1e-10))

    g0, gf = 2.0, 0.6
    h = ed.build_hamiltonian(gf, L)
    dec = ed.spectral_decomposition(h)
    psi0 = ed.ground_state(g0, L)
    sx = ed.total_spin("x", L)
    ident = ed.time_average_identity(psi0, dec, sx)
    out.append(Check(f"time-average identity S^x L={L}", ident["residual"], 1e-10))
    rho_d = ed.diagonal_ensemble(psi0, dec)
    kel = ed.spectrum_integral(ed.keldysh_spectrum(rho_d, sx, dec))
    out.append(Check(f"Keldysh integral = Var_d L={L}",
                     abs(4 * kel - 4 * ed.variance(rho_d, sx)), 1e-10))

    sz = ed.total_spin("z", L)
    identz = ed.time_average_identity(psi0, dec, sz)
    fz = fz_long_time(g0, gf, L)
    out.append(Check(f"long-time S^z density L={L}",
                     abs(fz - 4 * identz["time_averaged_variance"] / L), 1e-10))

    # response identity on a thermal initial state
    Lr, beta = 6, 1.0
    h0 = ed.build_hamiltonian(1.5, Lr)
    hr = ed.build_hamiltonian(0.7, Lr)
    rho0 = ed.thermal_state(h0, beta)
    op = ed.total_spin("x", Lr)
    worst = 0.0
    for t in (0.0, 2.0):
        lhs = ed.qfi_time(rho0, hr, op, t)
        rhs = ed.qfi_from_response(ed.generalized_response(rho0, h0, hr, op, t), beta)
        worst = max(worst, abs(lhs - rhs))
    out.append(Check("response identity L=6, beta=1", worst, 1e-8))
    return out


def run(level="fast", perturb_kernel=None):
    """Run the suite; returns a list of Check."""
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    sizes = (8,) if level == "fast" else (8, 10, 12)
    checks = []
    for L in sizes:
        checks += _correlator_checks(L, perturb_kernel)
    checks += _identity_checks(8)
    return checks


def report(checks, level, perturb_kernel=None):
    return {
        "level": level,
        "perturbed_kernel": perturb_kernel,
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }


def max_residual(checks, prefix=""):
    vals = [c.residual for c in checks if c.name.startswith(prefix)]
    return max(vals) if vals else math.nan
