"""Pfaffians of skew-symmetric matrices and leading Toeplitz minors."""
from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError

ANTISYMMETRY_TOL = 1e-12


def _check_skew(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("Pfaffian needs a square matrix")
    if m.shape[0] % 2:
        raise InvalidArgumentError("Pfaffian needs an even-dimensional matrix")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m + m.T)) > ANTISYMMETRY_TOL * scale:
        raise InvalidArgumentError("matrix is not antisymmetric")
    return m


def pfaffian(m):
    """Pf(M) by skew-symmetric Parlett-Reid elimination with partial pivoting.

    Reduces M to tridiagonal form with Gauss transformations, tracking the
    sign of every row/column interchange.
    """
    m = _check_skew(m)
    n = m.shape[0]
    dtype = np.result_type(m.dtype, float)
    a = np.array(m, dtype=dtype)
    if n == 0:
        return dtype.type(1.0)
    pf = dtype.type(1.0)
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return dtype.type(0.0)
        pf = pf * a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def leading_pfaffians(m, rtol=1e-10):
    """Pfaffians of all leading 2j x 2j blocks, j = 1 .. n/2.

    One elimination pass without pivoting gives every leading Pfaffian as a
    running product of pivots.  When a pivot becomes small relative to the
    matrix scale the remaining blocks are evaluated one by one with the
    pivoted routine.
    """
    m = _check_skew(m)
    n = m.shape[0]
    dtype = np.result_type(m.dtype, float)
    a = np.array(m, dtype=dtype)
    out = np.zeros(n // 2, dtype=dtype)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    pf = dtype.type(1.0)
    for j, k in enumerate(range(0, n - 1, 2)):
        piv = a[k, k + 1]
        if abs(piv) <= rtol * scale:
            for jj in range(j, n // 2):
                out[jj] = pfaffian(m[: 2 * jj + 2, : 2 * jj + 2])
            return out
        pf = pf * piv
        out[j] = pf
        if k + 2 < n:
            tau = a[k, k + 2:] / piv
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return out


DIRECT_MAX = 64
NEGLIGIBLE = 1e-14


def toeplitz_leading_dets(c, r, rtol=1e-10):
    """det T_n for n = 1 .. len(c), T_ij = c[i-j] (i >= j), r[j-i] (j > i).

    Generalized Levinson recursion, O(N^2) overall.  Near breakdown the
    next blocks are evaluated directly; see ``_direct_dets``.
    """
    c = np.asarray(c)
    r = np.asarray(r)
    if c.shape != r.shape or c.ndim != 1 or c.size == 0:
        raise InvalidArgumentError("c and r must be 1-d arrays of equal length")
    if c[0] != r[0]:
        raise InvalidArgumentError("c[0] and r[0] must agree")
    N = c.size
    dtype = np.result_type(c.dtype, r.dtype, float)
    dets = np.zeros(N, dtype=dtype)
    scale = max(float(np.max(np.abs(c))), float(np.max(np.abs(r))))
    if abs(c[0]) <= rtol * scale or scale == 0.0:
        return _direct_dets(c, r, 0, dets)
    f = np.array([1.0 / c[0]], dtype=dtype)
    b = f.copy()
    dets[0] = c[0]
    for n in range(1, N):
        eps_f = np.dot(c[n:0:-1], f)
        eps_b = np.dot(r[1: n + 1], b)
        denom = 1.0 - eps_f * eps_b
        if abs(denom) <= rtol:
            return _direct_dets(c, r, n, dets)
        f_ext = np.append(f, 0.0)
        b_ext = np.insert(b, 0, 0.0)
        f = (f_ext - eps_f * b_ext) / denom
        b = (b_ext - eps_b * f_ext) / denom
        dets[n] = dets[n - 1] / f[0]
    return dets


def _direct_dets(c, r, start, dets):
    """Direct determinants from block ``start`` on.

    Breakdown means a leading minor vanishes.  When the direct values stay
    negligible over DIRECT_MAX further blocks the remaining ones are set to
    zero; otherwise the evaluation is refused.
    """
    from scipy.linalg import toeplitz

    from .errors import NumericalFailureError

    stop = min(c.size, start + DIRECT_MAX)
    full = toeplitz(c[:stop], r[:stop])
    for n in range(start, stop):
        dets[n] = np.linalg.det(full[: n + 1, : n + 1])
    if stop == c.size:
        return dets
    if np.max(np.abs(dets[start:stop])) <= NEGLIGIBLE:
        dets[stop:] = 0.0
        return dets
    raise NumericalFailureError(
        "Toeplitz recursion broke down with non-negligible minors",
        {"breakdown_at": start + 1, "size": c.size})
