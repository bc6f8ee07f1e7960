"""Acceptance criteria, one test (or one test per clause) each."""
import math
import time

import numpy as np
import pytest

from qfiquench import cli, ed_oracle as ed, qfi, verify
from qfiquench.ising_fermion import INFINITY, QuenchProtocol

GF_GRID = np.round(np.arange(1, 31) * 0.1, 10)


def _closed_form_errors(alpha):
    worst, where = 0.0, None
    for g0, limit in ((0.0, qfi.G0_ZERO), (INFINITY, qfi.G0_INF)):
        for gf in GF_GRID:
            num, _ = qfi.asymptotic_density(g0, gf, alpha)
            err = abs(num - qfi.closed_form_fq(limit, alpha, gf))
            if err > worst:
                worst, where = err, (g0, float(gf), round(float(num), 6))
    return worst, where


def test_c1_closed_forms_sx(report):
    start = time.time()
    worst, where = _closed_form_errors("x")
    elapsed = time.time() - start
    ok = worst < 1e-3 and elapsed < 120
    report("1 closed forms S^x", ok, f"max error {worst:.2e} at {where}, {elapsed:.1f}s")
    assert ok


def test_c1_closed_forms_sz(report):
    start = time.time()
    worst, where = _closed_form_errors("z")
    elapsed = time.time() - start
    ok = worst < 1e-3 and elapsed < 120
    report("1 closed forms S^z", ok,
           f"max error {worst:.3g} at (g0, gf, numeric) = {where}, {elapsed:.1f}s")
    assert ok


def test_c2_ed_equivalence(report):
    start = time.time()
    checks = []
    for L in (8, 10, 12):
        checks += verify._correlator_checks(L, None)
    elapsed = time.time() - start
    worst = max(c.residual for c in checks)
    ok = worst < 1e-6 and elapsed < 300
    report("2 ED equivalence L=8,10,12", ok,
           f"{len(checks)} checks, max residual {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_c3_response_identity(report):
    L, beta = 6, 1.0
    h0, h = ed.build_hamiltonian(1.5, L), ed.build_hamiltonian(0.7, L)
    rho0 = ed.thermal_state(h0, beta)
    op = ed.total_spin("x", L)
    worst = 0.0
    for t in (0.0, 2.0):
        lhs = ed.qfi_time(rho0, h, op, t)
        rhs = ed.qfi_from_response(ed.generalized_response(rho0, h0, h, op, t), beta)
        worst = max(worst, abs(lhs - rhs))
    ok = worst < 1e-8
    report("3 response-function identity", ok, f"max |F_Q - tanh integral| = {worst:.2e}")
    assert ok


def test_c4_diagonal_ensemble_identity(report):
    L = 8
    psi0 = ed.ground_state(2.0, L)
    dec = ed.spectral_decomposition(ed.build_hamiltonian(0.6, L))
    op = ed.total_spin("x", L)
    ident = ed.time_average_identity(psi0, dec, op)
    rho = ed.diagonal_ensemble(psi0, dec)
    kel = abs(4 * ed.spectrum_integral(ed.keldysh_spectrum(rho, op, dec)) - 4 * ed.variance(rho, op))
    ok = ident["residual"] < 1e-10 and kel < 1e-10
    report("4 diagonal-ensemble identity", ok,
           f"time-average residual {ident['residual']:.2e}, Keldysh residual {kel:.2e}")
    assert ok


@pytest.fixture(scope="module")
def divergence_data():
    start = time.time()
    out = []
    for dg in (0.02, 0.05, 0.1):
        xi = qfi.correlation_length(0.5, 0.5 + dg).xi
        res = qfi.converge_L(QuenchProtocol(0.5, 0.5 + dg), "x", tol=1e-3 * xi)
        out.append((dg, res.f_x, res.L_used))
    return out, time.time() - start


def test_c5_divergence_slope(report, divergence_data):
    data, elapsed = divergence_data
    dg = np.array([d[0] for d in data])
    fq = np.array([d[1] for d in data])
    slope = np.polyfit(np.log(dg), np.log(fq), 1)[0]
    ok = abs(slope + 2.0) <= 0.1 and elapsed < 600
    report("5 divergence slope", ok,
           f"slope {slope:.3f}, L_used {[d[2] for d in data]}, {elapsed:.0f}s")
    assert ok


def test_c5_divergence_prefactor(report, divergence_data):
    data, _ = divergence_data
    scaled = [d[1] * d[0] ** 2 for d in data]
    ok = abs(scaled[0] - 0.5) <= 0.05
    report("5 dg^2 f_Q -> 0.5", ok,
           "dg^2 f_Q = " + ", ".join(f"{s:.3f}" for s in scaled)
           + f" for dg = 0.02, 0.05, 0.1; 2*xi_tilde(0.5) = {2 * qfi.xi_tilde(0.5):.3f}")
    assert ok


@pytest.fixture(scope="module")
def witness_grid():
    gf = np.round(np.arange(0.3, 2.5001, 0.01), 10)
    rows = [qfi.asymptotic_qfi(INFINITY, g) for g in gf]
    return gf, rows


def test_c6_tripartite_window(report, witness_grid):
    gf, rows = witness_grid
    above = np.array([r.f_opt > 2 for r in rows])
    expected = (gf > 7 / 8) & (gf < 1.5)
    near = (np.abs(gf - 7 / 8) <= 0.01) | (np.abs(gf - 1.5) <= 0.01)
    mismatch = gf[(above != expected) & ~near]
    inside = gf[above]
    ok = mismatch.size == 0
    report("6 tripartite window (7/8, 3/2)", ok,
           f"f_opt > 2 on [{inside.min():.2f}, {inside.max():.2f}], mismatches {mismatch.tolist()}")
    assert ok


def test_c6_x_z_crossing(report, witness_grid):
    gf, rows = witness_grid
    diff = np.array([r.f_x - r.f_z for r in rows])
    sel = gf <= 1.0
    sign = np.sign(diff[sel])
    idx = np.flatnonzero(np.diff(sign) != 0)
    crossing = float(gf[sel][idx[0] + 1]) if idx.size else math.nan
    ok = abs(crossing - 0.75) <= 0.01
    report("6 S^x / S^z crossing at 3/4", ok,
           f"crossing at gf = {crossing:.2f}; f_z(gf <= 1) = {rows[0].f_z:.4f}")
    assert ok


def test_c7_dynamics(report):
    start = time.time()
    q = QuenchProtocol(0.0, 2.0, 10_000)
    t = np.round(np.arange(0, 500 + 1) * 0.1, 10)
    vals, _ = qfi.qfi_dynamics(q, t, "x")
    t_min = 10.0
    late = abs(float(np.mean(vals[t >= 40])) - 3.0)
    slope = qfi.decay_exponent(t, vals, 3.0, t_min)
    freq, width = qfi.dominant_frequency(t, vals, 3.0, t_min)
    elapsed = time.time() - start
    ok = late < 0.01 and slope < 0 and abs(freq - qfi.gap(2.0)) <= width
    report("7 dynamics (0 -> 2), L=1e4", ok,
           f"|<f>_(t>=40) - 3| = {late:.1e}, envelope exponent {slope:.2f}, "
           f"frequency {freq:.3f} vs {qfi.gap(2.0)} (bin {width:.3f}), {elapsed:.0f}s")
    assert ok


def test_c8_finite_size_plateau(report):
    lines, ok = [], True
    for gf in (0.67, 0.7):
        res = qfi.converge_L(QuenchProtocol(0.5, gf), "x", tol=1e-4)
        trace = res.meta["trace"]
        steps = [abs(b[1] - a[1]) for a, b in zip(trace, trace[1:])]
        ok &= res.converged and steps[-1] < 1e-4
        lines.append(f"gf={gf}: f={res.f_x:.6f} at L={res.L_used}, last change {steps[-1]:.1e}")
    report("8 convergence in L", ok, "; ".join(lines))
    assert ok


def test_c9_negative_control(report, capsys):
    details, ok = [], True
    for kernel in verify.KERNELS:
        code = cli.main(["verify", "--perturb-kernel", kernel])
        capsys.readouterr()
        checks = verify.run("fast", kernel)
        worst = max(c.residual for c in checks)
        ok &= code == cli.EXIT_VERIFY and worst > 1e-3
        details.append(f"{kernel}: exit {code}, max residual {worst:.2f}")
    report("9 negative control", ok, "; ".join(details))
    assert ok
