# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
test_fup.py

Unit test suite for fup.py

"""
from hypothesis import given, settings
from hypothesis.strategies import floats, lists, tuples
import numpy as np
import pytest

from catmap.classical import GAMMA_DE, KappaTooLarge, shortest_cell_basis, validate_map
from catmap.fup import (
    BadDigits,
    DegenerateScales,
    EmptySet,
    IntervalSet,
    PorosityQuery,
    cantor_set,
    cell_cutoff,
    cutoff_translate_residual,
    cyclic_distance,
    dft_localization_norm,
    fit_beta,
    fup_scan,
    max_porosity,
    parse_family,
    porosity_check,
    porosity_profile,
    propagated_support,
    scale_grid,
    support_porosity_scan,
    support_projection,
    thicken,
)
from catmap.quantize import build_partition
from catmap.utils import InputError, InsufficientData

DE = validate_map(GAMMA_DE)


@pytest.fixture(scope="module")
def cell():
    return shortest_cell_basis(DE, 0.05)


@pytest.fixture(scope="module")
def partition():
    return build_partition()


def brute_force_ratio(omega, L, n_points=20001):
    """Minimum over a fine grid of window positions of the largest gap
    inside the window, divided by ``L``."""
    lo, hi = omega.intervals[0][0] - L, omega.intervals[-1][1]
    ends = np.array([a for a, _ in omega.intervals] + [np.inf])
    starts = np.array([-np.inf] + [b for _, b in omega.intervals])
    x = np.linspace(lo, hi, n_points)[:, None]
    gaps = np.clip(np.minimum(ends, x + L) - np.maximum(starts, x), 0, None).max(axis=1)
    return gaps.min() / L, (hi - lo) / (n_points - 1) / L


def test_interval_set_merges():
    omega = IntervalSet(((3, 4), (0, 1), (1, 2)))
    assert omega.intervals == ((0.0, 2.0), (3.0, 4.0))
    assert len(omega) == 2
    assert omega.measure() == 3
    assert omega.gaps() == [(2.0, 3.0)]
    assert omega.contains(1.5) and not omega.contains(2.5)
    assert IntervalSet().is_empty


def test_interval_set_operations():
    omega = IntervalSet(((0, 2), (3, 4)))
    window = IntervalSet(((1.5, 3.5),))
    assert omega.intersection(window).intervals == ((1.5, 2.0), (3.0, 3.5))
    assert omega.union(window).intervals == ((0.0, 4.0),)
    assert IntervalSet.from_json(omega.to_json()) == omega
    with pytest.raises(InputError):
        IntervalSet(((2, 1),))


def test_porosity_query_validation():
    with pytest.raises(InputError):
        PorosityQuery(1.0, 0.1, 1)
    with pytest.raises(DegenerateScales):
        PorosityQuery(0.1, 0.5, 0.1)
    with pytest.raises(DegenerateScales):
        PorosityQuery(0.1, 0.0, 1)


def test_scale_grid():
    scales = scale_grid(0.1, 1.0)
    assert scales[0] == 1.0
    assert scales[-1] == pytest.approx(0.1)
    assert np.all(scales[:-1] / scales[1:] <= 1.1 + 1e-12)
    assert list(scale_grid(0.5, 0.5)) == [0.5]


@pytest.mark.filterwarnings("error::RuntimeWarning")
@settings(max_examples=30, deadline=None)
@given(
    lists(tuples(floats(0, 1), floats(0.001, 0.1)), min_size=1, max_size=6),
    floats(0.02, 0.6),
)
def test_profile_matches_brute_force(pieces, L):
    omega = IntervalSet(tuple((a, a + w) for a, w in pieces))
    exact, witness, _ = porosity_profile(omega, L, L)
    approx, step = brute_force_ratio(omega, L)
    assert exact <= approx + 1e-9
    assert exact >= approx - step - 1e-9
    x, length = witness
    assert length == L


def test_cantor_set():
    omega, residues = cantor_set(3, "02", 2)
    assert list(residues) == [0, 2, 6, 8]
    assert omega.measure() == pytest.approx(4 / 9)
    assert len(omega) == 4
    for base, digits in [(2, [0]), (3, [0, 1, 2]), (3, []), (3, [0, 3])]:
        with pytest.raises(BadDigits):
            cantor_set(base, digits, 2)


def test_cantor_set_is_porous_above_its_resolution():
    omega, _ = cantor_set(3, [0, 2], 6)
    result = porosity_check(omega, PorosityQuery(1 / 9, 3**-5, 1))
    assert result
    assert result.certified_nu == pytest.approx(1 / 9 / 1.1)
    assert max_porosity(omega, 3**-5, 1) >= 0.11


def test_cantor_set_is_not_porous_below_its_resolution():
    omega, _ = cantor_set(3, [0, 2], 6)
    result = porosity_check(omega, PorosityQuery(1 / 9, 3**-7, 1))
    assert not result
    x, L = result.witness
    assert L <= 3**-6


def test_max_porosity_extremes():
    assert max_porosity(IntervalSet(), 0.01, 1) == pytest.approx(0.999)
    assert max_porosity(IntervalSet(((0, 1),)), 0.01, 1) == 0.0


def test_parse_family():
    assert parse_family("cantor:3:02:3-5") == [(3, [0, 2], 3), (3, [0, 2], 4), (3, [0, 2], 5)]
    assert parse_family("cantor:5:013:2") == [(5, [0, 1, 3], 2)]
    for text in ["cantor:3:02", "sierpinski:3:02:2", "cantor:3:02:5-3"]:
        with pytest.raises(InputError):
            parse_family(text)


def test_cyclic_distance_and_thicken():
    d = cyclic_distance([0], 10)
    assert d[5] == 5 and d[9] == 1
    assert list(thicken([0], 2, 10)) == [0, 1, 9]


def test_dft_norm_extremes():
    N = 27
    assert dft_localization_norm(range(N), range(N), N) == pytest.approx(1.0)
    assert dft_localization_norm([3], [5], N) == pytest.approx(N**-0.5)
    with pytest.raises(EmptySet):
        dft_localization_norm([], [1], N)
    with pytest.raises(InputError):
        dft_localization_norm([1], [1], N, smooth=0)


def test_dft_norm_symmetry_and_volume_bound():
    N = 81
    rng = np.random.default_rng(4)
    X, Y = rng.choice(N, 10, replace=False), rng.choice(N, 20, replace=False)
    norm = dft_localization_norm(X, Y, N)
    assert norm == pytest.approx(dft_localization_norm(Y, X, N))
    assert norm <= np.sqrt(len(X) * len(Y) / N) + 1e-12


def test_smoothed_norm_is_sandwiched():
    _, residues = cantor_set(3, [0, 2], 4)
    N = 81
    plain = dft_localization_norm(residues, residues, N)
    smooth = dft_localization_norm(residues, residues, N, smooth=2)
    thick = thicken(residues, 2, N)
    assert plain - 1e-12 <= smooth <= dft_localization_norm(thick, thick, N) + 1e-12


def test_fit_beta():
    N = [9, 27, 81]
    fit = fit_beta([(n, 2 * n**-0.25) for n in N])
    assert fit.beta_hat == pytest.approx(0.25)
    assert fit.as_dict()["N_values"] == N
    with pytest.raises(InsufficientData):
        fit_beta([(9, 0.5), (27, 0.4)])


def test_fup_scan():
    frame = fup_scan(parse_family("cantor:3:02:2-4"), smooth=2)
    assert list(frame["N"]) == [9, 27, 81]
    assert list(frame["X_size"]) == [4, 8, 16]
    assert np.all(frame["norm"] <= np.minimum(1, frame["volume_bound"]) + 1e-12)
    assert np.all(frame["norm_smooth"] <= frame["norm_thickened"] + 1e-12)


def test_cell_cutoff(cell):
    grid = cell_cutoff(cell, 0.05, 64)
    assert grid.values.shape == (64, 64)
    assert grid.values.min() >= 0
    assert grid.values.max() == pytest.approx(1.0)
    with pytest.raises(KappaTooLarge):
        cell_cutoff(cell, 0.4, 64)


def test_cutoff_translates_sum_to_one(cell):
    assert cutoff_translate_residual(cell, 0.05, 64) < 1e-10


def test_empty_word_support_is_the_cutoff(partition, cell):
    grid = propagated_support(partition, DE, cell, (), "plus", 0.05, 64)
    np.testing.assert_allclose(grid.values, cell_cutoff(cell, 0.05, 64).values)
    omega = support_projection(partition, DE, cell, (), "plus", 0.05, 64)
    assert len(omega) == 1
    with pytest.raises(InputError):
        propagated_support(partition, DE, cell, (), "left", 0.05, 64)


@pytest.mark.parametrize("side", ["plus", "minus"])
def test_word_support_inside_cutoff(partition, cell, side):
    cutoff = cell_cutoff(cell, 0.05, 64).values
    grid = propagated_support(partition, DE, cell, (1, 2), side, 0.05, 64)
    assert np.all(grid.values <= cutoff + 1e-12)


def test_support_porosity_scan(partition, cell):
    frame = support_porosity_scan(partition, DE, cell, 2, 2, 0.05, 64, seed=1)
    assert list(frame["word_id"]) == [0, 1]
    for side in ("plus", "minus"):
        assert np.all((frame[f"{side}_max_porosity"] >= 0) & (frame[f"{side}_max_porosity"] < 1))
        assert np.all(frame[f"{side}_scale_floor"] > 0)
