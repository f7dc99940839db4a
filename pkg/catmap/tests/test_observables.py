# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
test_observables.py

Unit test suite for observables.py

"""
import numpy as np
import pandas as pd
import pytest

from catmap.classical import GAMMA_DE, validate_map
from catmap.hilbert import HilbertSpec, StateVector
from catmap.observables import (
    BadWindow,
    NotNormalized,
    c1_proxy,
    coherent_state,
    deloc_scan,
    fourier_wigner,
    husimi_grid,
    matrix_element,
    min_resolvent_defect,
    qe_scan,
    qe_variance,
    resolvent_defect,
    wigner_table,
    window_mass,
    write_grid_csv,
    write_pgm,
)
from catmap.propagator import build_cat_matrix, eigendecompose
from catmap.quantize import constant, cosine, op_matrix, random_symbol
from catmap.utils import InputError

DE = validate_map(GAMMA_DE)
N = 25


@pytest.fixture
def phi():
    return StateVector.random(N, np.random.default_rng(5))


def test_fourier_wigner_at_origin(phi):
    assert fourier_wigner(phi, phi, (0, 0)) == pytest.approx(1.0)


def test_wigner_table_matches_direct_pairing(phi):
    table = wigner_table(phi, 4)
    assert len(table.coefficients) == 81
    assert table.hermitian_defect() < 1e-12
    for l in [(0, 0), (1, 0), (-2, 3), (4, -4)]:
        assert table[l] == pytest.approx(fourier_wigner(phi, phi, l))
    frame = table.to_frame()
    assert list(frame.columns) == ["l1", "l2", "re", "im", "abs"]


def test_matrix_element(phi):
    a = random_symbol(np.random.default_rng(0), 3)
    op = op_matrix(a, HilbertSpec(N))
    direct = np.vdot(phi.amplitudes, op @ phi.amplitudes) / N
    assert matrix_element(a, phi) == pytest.approx(direct)
    assert matrix_element(constant(1.0), phi) == pytest.approx(1.0)


def test_window_mass():
    assert window_mass(StateVector.coordinate(N, 10), 0.3, 0.7) == pytest.approx(1.0)
    assert window_mass(StateVector.coordinate(N, 0), 0.3, 0.7) == 0
    # indices 8..17
    assert window_mass(StateVector.uniform(N), 0.3, 0.7) == pytest.approx(10 / N)


@pytest.mark.parametrize("window", [(0.7, 0.3), (-0.1, 0.5), (0.2, 1.2), (0.4, 0.4)])
def test_bad_window(window):
    with pytest.raises(BadWindow):
        window_mass(StateVector.uniform(N), *window)


def test_window_mass_needs_unit_state():
    state = StateVector(HilbertSpec(N), 2 * StateVector.uniform(N).amplitudes)
    with pytest.raises(NotNormalized):
        window_mass(state, 0.3, 0.7)


def test_c1_proxy_of_identity():
    spectral = eigendecompose(build_cat_matrix(DE, HilbertSpec(N)))
    assert c1_proxy(constant(1.0), spectral) == pytest.approx(1.0)


def test_deloc_scan():
    frame = deloc_scan(
        DE, (0.3, 0.7), [11, 13, 25], basis_mode="randomized", bump=cosine((0, 1)) + 2,
        n_rotations=3,
    )
    assert list(frame["N"]) == [11, 13, 25]
    assert np.all(frame["min_mass"] >= 0)
    assert np.all(frame["min_mass"] <= frame["min_mass_randomized"] + 1e-12)
    assert "c1_proxy" in frame


def test_deloc_scan_rejects():
    with pytest.raises(BadWindow):
        deloc_scan(DE, (0.5, 0.5), [11])
    with pytest.raises(InputError):
        deloc_scan(DE, (0.3, 0.7), [11], basis_mode="haar")


def test_qe_variance():
    spec = HilbertSpec(N)
    assert qe_variance(DE, constant(3.0), spec) == pytest.approx(0.0, abs=1e-20)
    assert qe_variance(DE, cosine((0, 1)), spec) >= 0
    frame = qe_scan(DE, cosine((0, 1)), [11, 13])
    assert list(frame.columns) == ["N", "variance"]


def test_qe_variance_decreases_with_N():
    variance = qe_scan(DE, cosine((0, 1)), [101, 401])["variance"]
    assert 0 < variance[1] < variance[0]


def test_husimi_integrates_to_norm():
    phi = StateVector.random(N, np.random.default_rng(8))
    grid = husimi_grid(phi, 96)
    assert grid.shape == (96, 96)
    assert np.all(grid >= 0)
    assert grid.mean() == pytest.approx(phi.norm() ** 2, rel=1e-3)
    with pytest.raises(InputError):
        husimi_grid(phi, 8)


def test_coherent_state_concentrates():
    c = coherent_state(N, 0.5, 0.24)
    grid = husimi_grid(c.normalized(), 50)
    i, j = np.unravel_index(grid.argmax(), grid.shape)
    assert (i, j) == (25, 12)


def test_grid_writers(tmp_path):
    grid = np.arange(12, dtype=float).reshape(3, 4)
    write_pgm(grid, tmp_path / "g.pgm")
    data = (tmp_path / "g.pgm").read_bytes()
    assert data.startswith(b"P5\n4 3\n255\n")
    assert data[-1] == 255
    write_grid_csv(grid, tmp_path / "g.csv")
    back = pd.read_csv(tmp_path / "g.csv", header=None).to_numpy()
    np.testing.assert_allclose(back, grid)


def test_resolvent_defect_vanishes_on_eigenvectors():
    qcm = build_cat_matrix(DE, HilbertSpec(N))
    spectral = eigendecompose(qcm)
    u, z = spectral.states()[3], spectral.eigenvalues[3]
    assert resolvent_defect(qcm, u, z) < 1e-10
    assert min_resolvent_defect(qcm, u) < 1e-10


def test_min_resolvent_defect_is_a_minimum(phi):
    qcm = build_cat_matrix(DE, HilbertSpec(N))
    u = phi.normalized()
    best = min_resolvent_defect(qcm, u)
    for z in np.exp(2j * np.pi * np.array([0.1, 0.33, 0.9])):
        assert best <= resolvent_defect(qcm, u, z) + 1e-12
