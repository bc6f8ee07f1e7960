import math

import numpy as np
import pytest

from qfiquench.errors import InvalidArgumentError, SingularModeError
from qfiquench.ising_fermion import (
    INFINITY,
    Boundary,
    QuenchProtocol,
    bogoliubov_angle,
    dispersion,
    gge_occupation,
    mode_grid,
    mode_table,
    quench_angle_cos,
)


def test_mode_grid_ns():
    k = mode_grid(8)
    assert np.allclose(k, np.pi * np.array([1, 3, 5, 7]) / 8)


@pytest.mark.parametrize("L", [0, 3, -2, 2.5])
def test_mode_grid_rejects(L):
    with pytest.raises(InvalidArgumentError):
        mode_grid(L)


def test_dispersion_values():
    assert np.isclose(dispersion(2.0, 0.0), 1.0)
    assert np.isclose(dispersion(0.0, 1.3), 1.0)
    assert np.isclose(dispersion(1.0, np.pi), 2.0)


def test_bogoliubov_angle_unit_norm():
    k = np.linspace(0.1, 3.0, 7)
    for g in (0.0, 0.4, 1.0, 2.5):
        c, s = bogoliubov_angle(g, k)
        assert np.allclose(c ** 2 + s ** 2, 1.0)


def test_bogoliubov_angle_infinite_field():
    c, s = bogoliubov_angle(INFINITY, np.array([0.3, 2.0]))
    assert np.allclose(c, 1.0) and np.allclose(s, 0.0)


def test_singular_mode():
    with pytest.raises(SingularModeError):
        bogoliubov_angle(1.0, 0.0)


def test_quench_angle_no_quench():
    k = mode_grid(10)
    assert np.allclose(quench_angle_cos(0.7, 0.7, k), 1.0)
    assert np.allclose(gge_occupation(0.7, 0.7, k), 0.0)


def test_quench_angle_matches_difference():
    k = np.linspace(0.05, 3.1, 11)
    c0, s0 = bogoliubov_angle(0.3, k)
    cf, sf = bogoliubov_angle(1.7, k)
    assert np.allclose(quench_angle_cos(0.3, 1.7, k), c0 * cf + s0 * sf)


def test_quench_angle_from_infinity():
    k = np.linspace(0.05, 3.1, 5)
    assert np.allclose(quench_angle_cos(INFINITY, 2.0, k), bogoliubov_angle(2.0, k)[0])


def test_protocol_validation():
    q = QuenchProtocol(0.5, 1.2, 8)
    assert q.is_quench and not q.thermodynamic
    assert QuenchProtocol(INFINITY, 2.0).thermodynamic
    for bad in (dict(g0=-1, gf=1), dict(g0=0, gf=math.inf), dict(g0=0, gf=1, L=7)):
        with pytest.raises(InvalidArgumentError):
            QuenchProtocol(**bad)
    with pytest.raises(InvalidArgumentError):
        QuenchProtocol(0, 1, 8, Boundary.OPEN)


def test_mode_table_read_only():
    t = mode_table(QuenchProtocol(0.5, 1.2, 8))
    assert t.momenta.shape == (4,)
    assert np.allclose(t.n_gge, 0.5 * (1 - t.cos_delta))
    with pytest.raises(ValueError):
        t.momenta[0] = 0.0
