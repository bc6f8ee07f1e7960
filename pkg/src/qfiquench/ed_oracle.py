"""Brute-force reference on small chains (full 2^L Hilbert space).

Nothing here imports the fermionic layer; it is the independent side of
every equivalence check.  Site 0 is the most significant bit, spin up
(sz = +1) is bit value 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from .errors import InvalidArgumentError, ResourceError
from .ising_fermion import Boundary

L_CAP = 12
DEGENERACY_TOL = 1e-10
WEIGHT_TOL = 1e-14

_PAULI = {
    "x": sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])),
    "y": sp.csr_matrix(np.array([[0.0, -1.0j], [1.0j, 0.0]])),
    "z": sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]])),
}


@dataclass(frozen=True)
class SpectralDecomposition:
    energies: np.ndarray
    states: np.ndarray  # columns are eigenvectors
    parity: Optional[np.ndarray] = None

    def evolve(self, psi, t):
        """exp(-iHt) psi for a vector or a matrix of column vectors."""
        coeff = self.states.conj().T @ psi
        phase = np.exp(-1j * self.energies * t)
        if coeff.ndim == 2:
            phase = phase[:, None]
        return self.states @ (phase * coeff)

    def blocks(self, tol=DEGENERACY_TOL):
        """Index ranges of degenerate eigenspaces (energies are sorted)."""
        e = self.energies
        cuts = np.flatnonzero(np.diff(e) > tol) + 1
        edges = np.concatenate([[0], cuts, [len(e)]])
        return [np.arange(a, b) for a, b in zip(edges[:-1], edges[1:])]


@dataclass(frozen=True)
class MixedState:
    """rho = sum_a p_a |lambda_a><lambda_a|; states are columns."""

    weights: np.ndarray
    states: np.ndarray
    energies: Optional[np.ndarray] = field(default=None, repr=False)
    beta: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-15) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("weights must be non-negative and sum to 1")
        if self.states.shape[1] != w.size:
            raise InvalidArgumentError("one state per weight required")

    @property
    def dim(self):
        return self.states.shape[0]

    def expect(self, op):
        v = op @ self.states
        return float(np.real(np.sum(self.weights * np.sum(self.states.conj() * v, axis=0))))


# ----------------------------------------------------------------- operators


def _check_L(L):
    if int(L) != L or L < 1:
        raise InvalidArgumentError(f"L must be a positive integer (got {L!r})")
    if L > L_CAP:
        raise ResourceError(f"L={L} exceeds the exact-diagonalization cap {L_CAP}")
    return int(L)


@lru_cache(maxsize=256)
def site_op(alpha: str, j: int, L: int):
    """Pauli matrix alpha acting on site j (sparse CSR)."""
    L = _check_L(L)
    left = sp.identity(2 ** j, format="csr")
    right = sp.identity(2 ** (L - j - 1), format="csr")
    return sp.kron(sp.kron(left, _PAULI[alpha]), right, format="csr")


def total_spin(alpha: str, L: int):
    """S^alpha = 1/2 sum_j sigma^alpha_j."""
    return 0.5 * sum(site_op(alpha, j, L) for j in range(L))


def parity_operator(L: int):
    """prod_j sz_j as a diagonal sparse matrix."""
    L = _check_L(L)
    idx = np.arange(2 ** L)
    bits = np.array([bin(i).count("1") for i in idx])
    return sp.diags(np.where(bits % 2 == 0, 1.0, -1.0))


def build_hamiltonian(g, L, boundary=Boundary.PERIODIC, dense=True):
    """H = -1/2 sum_j (sx_j sx_{j+1} + g sz_j)."""
    L = _check_L(L)
    if not (g >= 0) or math.isinf(g):
        raise InvalidArgumentError(f"g must be finite and >= 0 (got {g!r})")
    boundary = Boundary(boundary)
    bonds = L if boundary is Boundary.PERIODIC else L - 1
    if L == 1:
        bonds = 0
    h = sp.csr_matrix((2 ** L, 2 ** L))
    for j in range(bonds):
        h = h + site_op("x", j, L) @ site_op("x", (j + 1) % L, L)
    for j in range(L):
        h = h + g * site_op("z", j, L)
    h = (-0.5 * h).real
    return h.toarray() if dense else h.tocsr()


def spectral_decomposition(h) -> SpectralDecomposition:
    h = h.toarray() if sp.issparse(h) else np.asarray(h)
    e, v = np.linalg.eigh(h)
    n = int(round(math.log2(h.shape[0])))
    par = None
    if 2 ** n == h.shape[0]:
        p = parity_operator(n).diagonal()
        par = np.sign(np.real(np.sum(v.conj() * (p[:, None] * v), axis=0)))
    return SpectralDecomposition(e, v, par)


def ground_state(g, L, boundary=Boundary.PERIODIC):
    """Lowest eigenvector of H(g) inside the even-parity sector."""
    L = _check_L(L)
    p = parity_operator(L).diagonal()
    even = np.flatnonzero(p > 0)
    h = build_hamiltonian(g, L, boundary)
    e, v = np.linalg.eigh(h[np.ix_(even, even)])
    psi = np.zeros(2 ** L, dtype=complex)
    psi[even] = v[:, 0]
    return psi


def pure_state(psi) -> MixedState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return MixedState(np.array([1.0]), psi[:, None])


def thermal_state(h0, beta) -> MixedState:
    """Gibbs state of h0, built from its spectral decomposition."""
    if not beta > 0:
        raise InvalidArgumentError("beta must be > 0")
    dec = spectral_decomposition(h0)
    w = np.exp(-beta * (dec.energies - dec.energies[0]))
    w /= w.sum()
    return MixedState(w, dec.states.astype(complex), dec.energies, float(beta))


# ------------------------------------------------------------------ QFI


def _pair_qfi(weights, overlaps):
    p = weights[:, None]
    q = weights[None, :]
    s = p + q
    mask = s > 0
    coef = np.zeros_like(s)
    coef[mask] = (p - q)[mask] ** 2 / s[mask]
    return float(2.0 * np.sum(coef * np.abs(overlaps) ** 2))


def qfi_mixed(state: MixedState, op) -> float:
    """F_Q = 2 sum_ab (p_a - p_b)^2 / (p_a + p_b) |<a|O|b>|^2."""
    keep = state.weights > 0
    states = state.states
    w = np.asarray(state.weights)
    # complete the basis: states outside the support carry p = 0
    if states.shape[1] < states.shape[0] or not np.all(keep):
        q, _ = np.linalg.qr(states[:, keep], mode="complete")
        support = int(keep.sum())
        basis = np.hstack([states[:, keep], q[:, support:]])
        w = np.concatenate([w[keep], np.zeros(states.shape[0] - support)])
    else:
        basis = states
    o = basis.conj().T @ (op @ basis)
    return _pair_qfi(w, o)


def variance(state: MixedState, op) -> float:
    mean = state.expect(op)
    return state.expect(op @ op) - mean ** 2


def evolve_state(state: MixedState, dec: SpectralDecomposition, t) -> MixedState:
    return MixedState(state.weights, dec.evolve(state.states, t), state.energies, state.beta)


def qfi_time(state0: MixedState, h_final, op, t) -> float:
    """QFI of the evolved state exp(-iHt) rho exp(iHt)."""
    if t < 0:
        raise InvalidArgumentError("t must be >= 0")
    dec = h_final if isinstance(h_final, SpectralDecomposition) else spectral_decomposition(h_final)
    return qfi_mixed(evolve_state(state0, dec, t), op)


def generalized_response(state0: MixedState, h0, h, op, t):
    """Delta-peak list (omega, weight) of the generalized dissipative response.

    Peaks sit at omega = E0_b - E0_a with weight pi (p_a - p_b) |<a(t)|O|b(t)>|^2.
    Only omega > 0 is returned (the tanh-weighted integral runs over omega > 0).
    """
    if state0.energies is None or state0.beta is None:
        raise InvalidArgumentError("state0 must be a thermal state with energies and beta")
    h0 = h0.toarray() if sp.issparse(h0) else np.asarray(h0)
    e0 = np.asarray(state0.energies)
    resid = h0 @ state0.states - state0.states * e0[None, :]
    gibbs = np.exp(-state0.beta * (e0 - e0.min()))
    gibbs /= gibbs.sum()
    if np.max(np.abs(resid)) > 1e-8 or np.max(np.abs(gibbs - state0.weights)) > 1e-12:
        raise InvalidArgumentError("state0 is not a Gibbs state of h0")
    dec = h if isinstance(h, SpectralDecomposition) else spectral_decomposition(h)
    lam = dec.evolve(state0.states, t)
    o = lam.conj().T @ (op @ lam)
    omega = e0[None, :] - e0[:, None]
    w = np.pi * (state0.weights[:, None] - state0.weights[None, :]) * np.abs(o) ** 2
    mask = (omega > DEGENERACY_TOL) & (np.abs(w) > 0)
    order = np.argsort(omega[mask], kind="stable")
    return np.column_stack([omega[mask][order], w[mask][order]])


def qfi_from_response(spectrum, beta) -> float:
    """(4/pi) int_0^inf d omega tanh(beta omega / 2) chi''(omega)."""
    if not beta > 0:
        raise InvalidArgumentError("beta must be > 0")
    spectrum = np.asarray(spectrum, dtype=float).reshape(-1, 2)
    if spectrum.size == 0:
        return 0.0
    omega, w = spectrum[:, 0], spectrum[:, 1]
    pos = omega > 0
    return float(4.0 / np.pi * np.sum(np.tanh(beta * omega[pos] / 2.0) * w[pos]))


# ------------------------------------------------------- diagonal ensemble


def diagonal_ensemble(psi0, h_final, tol=DEGENERACY_TOL) -> MixedState:
    """Dephased state sum_E P_E |psi0><psi0| P_E.

    Inside a degenerate eigenspace the weight is the squared norm of the
    projection of psi0 and the state is the normalized projection.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    dec = h_final if isinstance(h_final, SpectralDecomposition) else spectral_decomposition(h_final)
    weights, states, energies = [], [], []
    for blk in dec.blocks(tol):
        v = dec.states[:, blk]
        phi = v @ (v.conj().T @ psi0)
        nrm = float(np.real(np.vdot(phi, phi)))
        if nrm > WEIGHT_TOL:
            weights.append(nrm)
            states.append(phi / math.sqrt(nrm))
            energies.append(float(np.mean(dec.energies[blk])))
    w = np.array(weights)
    w /= w.sum()
    return MixedState(w, np.column_stack(states), np.array(energies))


def _frequency_bins(freqs, tol):
    order = np.argsort(freqs, kind="stable")
    f = freqs[order]
    labels = np.empty(len(f), dtype=int)
    if len(f):
        labels[order] = np.concatenate([[0], np.cumsum(np.diff(f) > tol)])
    return labels


def time_average_identity(psi0, h_final, op, tol=DEGENERACY_TOL):
    """Both sides of  avg_t Var(O(t)) = Var_d(O) - avg_t (<O(t)> - avg <O>)^2.

    The left side is assembled from the raw eigenbasis of H by keeping only
    terms whose phase exp(i(E_i - E_j)t) survives the infinite-time average;
    the right side uses the diagonal-ensemble state.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    dec = h_final if isinstance(h_final, SpectralDecomposition) else spectral_decomposition(h_final)
    c = dec.states.conj().T @ psi0
    live = np.flatnonzero(np.abs(c) ** 2 > WEIGHT_TOL)
    # include full degenerate partners of every populated level
    e_all = dec.energies
    near = np.zeros(len(e_all), dtype=bool)
    for i in live:
        near |= np.abs(e_all - e_all[i]) < tol
    idx = np.flatnonzero(near)
    v = dec.states[:, idx]
    e = e_all[idx]
    ci = c[idx]
    o = v.conj().T @ (op @ v)
    o2 = v.conj().T @ (op @ (op @ v))
    amp = np.conj(ci)[:, None] * ci[None, :]
    same = np.abs(e[:, None] - e[None, :]) < tol
    avg_o2 = float(np.real(np.sum(amp[same] * o2[same])))
    # <O(t)> = sum_ij conj(c_i) c_j O_ij exp(i(E_i - E_j)t)
    terms = (amp * o).ravel()
    freqs = (e[:, None] - e[None, :]).ravel()
    labels = _frequency_bins(freqs, tol)
    amps = np.bincount(labels, weights=terms.real) + 1j * np.bincount(labels, weights=terms.imag)
    centers = np.bincount(labels, weights=freqs) / np.bincount(labels)
    zero = np.abs(centers) < tol
    mean_d = float(np.real(np.sum(amps[zero])))
    avg_mean_sq = float(np.sum(np.abs(amps) ** 2))
    time_avg_variance = avg_o2 - avg_mean_sq

    rho_d = diagonal_ensemble(psi0, dec, tol)
    var_d = variance(rho_d, op)
    fluct = avg_mean_sq - rho_d.expect(op) ** 2
    return {
        "time_averaged_variance": time_avg_variance,
        "diagonal_variance": var_d,
        "temporal_fluctuations": fluct,
        "mean_diagonal": mean_d,
        "residual": abs(time_avg_variance - (var_d - fluct)),
    }


def _adapted_basis(rho_d: MixedState, dec: SpectralDecomposition, tol=DEGENERACY_TOL):
    """Eigenbasis of H in which rho_d is diagonal, with matching populations."""
    cols, pops, energies = [], [], []
    for blk in dec.blocks(tol):
        v = dec.states[:, blk]
        eng = float(np.mean(dec.energies[blk]))
        inside = np.abs(rho_d.energies - eng) < tol if rho_d.energies is not None else None
        chosen = []
        if inside is not None:
            for a in np.flatnonzero(inside):
                chosen.append((rho_d.states[:, a], rho_d.weights[a]))
        if chosen:
            sub = np.column_stack([s for s, _ in chosen])
            proj = v.conj().T @ sub
            q, _ = np.linalg.qr(np.hstack([proj, np.eye(len(blk))]))
            comp = v @ q[:, len(chosen): len(blk)]
            for s, p in chosen:
                cols.append(s)
                pops.append(p)
                energies.append(eng)
            for j in range(comp.shape[1]):
                cols.append(comp[:, j])
                pops.append(0.0)
                energies.append(eng)
        else:
            for j in range(len(blk)):
                cols.append(v[:, j])
                pops.append(0.0)
                energies.append(eng)
    return np.column_stack(cols), np.array(pops), np.array(energies)


def keldysh_spectrum(rho_d: MixedState, op, h):
    """Symmetrized (Keldysh) correlation spectrum of delta O in rho_d.

    Returns (omega, weight) rows, each pair of peaks +-(E_j - E_i) listed
    explicitly so the spectrum is symmetric under omega -> -omega.
    """
    dec = h if isinstance(h, SpectralDecomposition) else spectral_decomposition(h)
    hd = dec.states @ (dec.energies[:, None] * dec.states.conj().T)
    e_i = np.real(np.diag(rho_d.states.conj().T @ hd @ rho_d.states))
    resid = hd @ rho_d.states - rho_d.states * e_i[None, :]
    if np.max(np.abs(resid)) > 1e-8:
        raise InvalidArgumentError("rho_d is not diagonal in the eigenbasis of h")
    mean = rho_d.expect(op)
    d_op = op - mean * sp.identity(op.shape[0], format="csr") if sp.issparse(op) else op - mean * np.eye(op.shape[0])
    m = rho_d.states.conj().T @ (d_op @ dec.states)
    w = 0.5 * rho_d.weights[:, None] * np.abs(m) ** 2
    omega = dec.energies[None, :] - e_i[:, None]
    omega, w = omega.ravel(), w.ravel()
    keep = w > 0
    omega, w = omega[keep], w[keep]
    rows = np.concatenate([np.column_stack([omega, w]), np.column_stack([-omega, w])])
    return rows[np.argsort(rows[:, 0], kind="stable")]


def spectrum_integral(spectrum) -> float:
    spectrum = np.asarray(spectrum).reshape(-1, 2)
    return float(np.sum(spectrum[:, 1]))


def _binned(spectrum, tol=1e-8):
    spectrum = np.asarray(spectrum).reshape(-1, 2)
    if spectrum.size == 0:
        return np.zeros(0), np.zeros(0)
    labels = _frequency_bins(spectrum[:, 0], tol)
    w = np.bincount(labels, weights=spectrum[:, 1])
    f = np.bincount(labels, weights=spectrum[:, 0]) / np.bincount(labels)
    return f, w


def dissipative_spectrum(rho_d: MixedState, op, h):
    """pi sum_ij (p_i - p_j) |O_ij|^2 delta(omega - (E_j - E_i)) on rho_d."""
    dec = h if isinstance(h, SpectralDecomposition) else spectral_decomposition(h)
    basis, pops, eng = _adapted_basis(rho_d, dec)
    o = basis.conj().T @ (op @ basis)
    w = np.pi * (pops[:, None] - pops[None, :]) * np.abs(o) ** 2
    omega = eng[None, :] - eng[:, None]
    keep = np.abs(w) > 0
    rows = np.column_stack([omega[keep], w[keep]])
    return rows[np.argsort(rows[:, 0], kind="stable")]


def fdt_violation_demo(psi0, h0, h, op, tol=1e-6):
    """Compare the diagonal-ensemble response with the Keldysh spectrum.

    With these normalizations equilibrium would give
    chi''(omega) = 2 pi tanh(beta omega / 2) chi_K(omega) for a single beta.
    The report holds the ratio R(omega) = chi''/(2 pi chi_K) on every
    nonzero frequency, the best single-beta tanh fit and a verdict.
    """
    dec = h if isinstance(h, SpectralDecomposition) else spectral_decomposition(h)
    rho_d = diagonal_ensemble(psi0, dec)
    fk, wk = _binned(keldysh_spectrum(rho_d, op, dec))
    fd, wd = _binned(dissipative_spectrum(rho_d, op, dec))
    sel = (np.abs(fk) > 1e-8) & (wk > 1e-12)
    if not np.any(sel):
        return {"degenerate": True, "fdt_satisfied": True, "omega": [], "ratio": [],
                "beta_fit": None, "max_deviation": 0.0}
    omega = fk[sel]
    chi_k = wk[sel]
    chi_d = np.zeros_like(omega)
    for i, om in enumerate(omega):
        hit = np.abs(fd - om) < 1e-8
        chi_d[i] = wd[hit].sum()
    ratio = chi_d / (2.0 * np.pi * chi_k)

    def deviation(log_beta):
        return float(np.max(np.abs(ratio - np.tanh(math.exp(log_beta) * omega / 2.0))))

    best = minimize_scalar(deviation, bounds=(-10.0, 10.0), method="bounded")
    dev_zero_t = float(np.max(np.abs(ratio - np.sign(omega))))
    dev = min(best.fun, dev_zero_t)
    beta_fit = math.inf if dev_zero_t <= best.fun else math.exp(best.x)
    return {"degenerate": False, "fdt_satisfied": bool(dev < tol), "omega": omega.tolist(),
            "ratio": ratio.tolist(), "beta_fit": beta_fit, "max_deviation": dev}


def cross_term_check(psi0, h, t_grid):
    """Largest connected, symmetrized <S^a S^b> (a != b) along the evolution."""
    psi0 = np.asarray(psi0, dtype=complex)
    L = int(round(math.log2(psi0.size)))
    dec = h if isinstance(h, SpectralDecomposition) else spectral_decomposition(h)
    s = {a: total_spin(a, L) for a in "xyz"}
    out = {"xy": 0.0, "xz": 0.0, "yz": 0.0}
    for t in t_grid:
        psi = dec.evolve(psi0, t)
        mean = {a: float(np.real(np.vdot(psi, s[a] @ psi))) for a in "xyz"}
        for pair in out:
            a, b = pair
            sym = 0.5 * np.vdot(psi, s[a] @ (s[b] @ psi) + s[b] @ (s[a] @ psi))
            out[pair] = max(out[pair], abs(float(np.real(sym)) - mean[a] * mean[b]))
    return out


# ---------------------------------------------------------- correlators


def ed_connected_correlators(state, alpha, n_max, L):
    """G_n = <s_0 s_n> - <s_0><s_n>, n = 1 .. n_max, from a vector or MixedState."""
    if not isinstance(state, MixedState):
        state = pure_state(state)
    s0 = site_op(alpha, 0, L)
    m0 = state.expect(s0)
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        sn = site_op(alpha, n % L, L)
        out[n - 1] = state.expect(s0 @ sn) - m0 * state.expect(sn)
    return out


def ed_qfi_density(state, alpha, L):
    if not isinstance(state, MixedState):
        state = pure_state(state)
    return qfi_mixed(state, total_spin(alpha, L)) / L
