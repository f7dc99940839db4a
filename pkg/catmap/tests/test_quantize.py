# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
test_quantize.py

Unit test suite for quantize.py

"""
from hypothesis import given, settings
from hypothesis.strategies import integers, tuples
import numpy as np
import pytest

from catmap.classical import GAMMA_DE, validate_map
from catmap.hilbert import HilbertSpec, translation_matrix
from catmap.quantize import (
    Ball,
    CutoffOverflow,
    GridTooCoarse,
    PARTITION_L_MAX,
    OverlappingRegions,
    PartitionPair,
    TorusSymbol,
    build_partition,
    bump_symbol,
    compose_with_map,
    constant,
    cosine,
    derivative_growth_probe,
    directional_derivative,
    fourier_mode,
    garding_envelope,
    garding_floor,
    moyal_defect,
    named_symbol,
    op_matrix,
    position_symbol,
    product_symbol,
    random_symbol,
    sample_symbol,
    single_modes,
)
from catmap.utils import InputError

DE = validate_map(GAMMA_DE)
SPEC = HilbertSpec(13)


@pytest.fixture
def symbol():
    return random_symbol(np.random.default_rng(11), 3)


def test_repeated_frequencies_are_summed():
    a = TorusSymbol([[1, 2], [0, 0], [1, 2]], [1.0, 2.0, 0.5])
    assert len(a) == 2
    assert a.coefficient((1, 2)) == 1.5
    assert a.coefficient((5, 5)) == 0
    assert a.cutoff == 2


def test_random_symbol_is_real(symbol):
    assert symbol.is_real()
    assert not fourier_mode((1, 0)).is_real()
    np.testing.assert_allclose(symbol.grid(16).imag, 0, atol=1e-12)


def test_json_round_trip(symbol):
    back = TorusSymbol.from_json(symbol.to_json())
    np.testing.assert_array_equal(back.freqs, symbol.freqs)
    np.testing.assert_allclose(back.values, symbol.values)


def test_grid_matches_evaluate(symbol):
    M = 12
    side = np.arange(M) / M
    y, eta = np.meshgrid(side, side, indexing="ij")
    np.testing.assert_allclose(symbol.grid(M), symbol.evaluate(y, eta), atol=1e-12)


def test_sample_symbol_recovers_polynomial(symbol):
    sampled = sample_symbol(symbol.grid(16).real, L_max=3)
    np.testing.assert_allclose(sampled.grid(20), symbol.grid(20), atol=1e-12)
    with pytest.raises(GridTooCoarse):
        sample_symbol(symbol.grid(7).real, L_max=3)


def test_product_symbol(symbol):
    other = cosine((1, -2)) + 0.5
    prod = product_symbol(symbol, other)
    M = 32
    np.testing.assert_allclose(prod.grid(M), symbol.grid(M) * other.grid(M), atol=1e-12)
    assert (symbol * other).as_dict().keys() == prod.as_dict().keys()


def test_position_symbol_is_real():
    a = position_symbol({0: 1.0, 2: 0.3 + 0.1j})
    assert a.is_real()
    assert a.cutoff == 2


@settings(deadline=None)
@given(tuples(integers(-30, 30), integers(-30, 30)))
def test_op_of_single_mode_is_translation(l):
    np.testing.assert_allclose(
        op_matrix(fourier_mode(l), SPEC), translation_matrix(l, SPEC), atol=1e-12
    )


def test_op_of_constant_is_identity():
    np.testing.assert_allclose(op_matrix(constant(2.0), SPEC), 2 * np.eye(13))


def test_op_of_conjugate_is_adjoint(symbol):
    np.testing.assert_allclose(
        op_matrix(symbol.conj(), SPEC), op_matrix(symbol, SPEC).conj().T, atol=1e-12
    )
    op = op_matrix(symbol, SPEC)
    np.testing.assert_allclose(op, op.conj().T, atol=1e-12)


@pytest.mark.parametrize("power", [1, 2, -1])
def test_compose_with_map_is_pullback(symbol, power):
    composed = compose_with_map(symbol, DE, power)
    gamma = np.linalg.matrix_power(np.array(GAMMA_DE, dtype=float), power)
    pts = np.random.default_rng(0).random((20, 2))
    moved = pts @ gamma.T
    np.testing.assert_allclose(
        composed.evaluate(pts[:, 0], pts[:, 1]),
        symbol.evaluate(moved[:, 0], moved[:, 1]),
        atol=1e-10,
    )


def test_compose_with_map_overflow():
    with pytest.raises(CutoffOverflow):
        compose_with_map(cosine((0, 1)), DE, 10, max_cutoff=100)


def test_moyal_defect_of_position_symbols():
    a = position_symbol({1: 0.5, 3: 0.2j})
    b = position_symbol({0: 1.0, 2: 0.7})
    assert moyal_defect(a, b, SPEC) < 1e-12


def test_moyal_defect_decreases_with_N():
    a, b = cosine((0, 1)), cosine((1, 0))
    assert moyal_defect(a, b, HilbertSpec(101)) < moyal_defect(a, b, HilbertSpec(11))


@pytest.mark.parametrize("N", [32, 64])
def test_moyal_defect_halves_when_N_doubles(N):
    a, b = cosine((0, 1)), cosine((1, 0))
    ratio = moyal_defect(a, b, HilbertSpec(2 * N)) / moyal_defect(a, b, HilbertSpec(N))
    assert ratio == pytest.approx(0.5, rel=0.3)


@pytest.mark.parametrize("N", [32, 64])
def test_moyal_defect_of_a_square_is_second_order(N):
    # the first order term is the Poisson bracket {a, a} = 0
    a = cosine((0, 1)) + cosine((1, 0))
    ratio = moyal_defect(a, a, HilbertSpec(2 * N)) / moyal_defect(a, a, HilbertSpec(N))
    assert ratio == pytest.approx(0.25, rel=0.3)


@pytest.mark.parametrize("N", [11, 25, 51])
def test_garding_floor_of_cosine(N):
    assert garding_floor(cosine((0, 1)), HilbertSpec(N)) == pytest.approx(-np.cos(np.pi / N))
    assert garding_floor(constant(1.0), HilbertSpec(N)) == pytest.approx(1.0)


def test_garding_envelope():
    N_values = np.array([11, 21, 41, 81])
    fit = garding_envelope(N_values, -2.0 / N_values)
    assert fit["C"] == pytest.approx(2.0)
    assert fit["slope"] == pytest.approx(-1.0)
    assert fit["r_squared"] == pytest.approx(1.0)


def test_garding_floor_of_nonnegative_symbol_decays_like_1_over_N():
    a = constant(1.0) + product_symbol(cosine((0, 1)), cosine((1, 0)))
    N_values = [64, 128, 256, 512]
    floors = [garding_floor(a, HilbertSpec(N)) for N in N_values]
    fit = garding_envelope(N_values, floors)
    assert fit["slope"] <= -0.8
    assert all(f >= -fit["C"] / N for f, N in zip(floors, N_values))
    assert fit["C"] < 10


def test_directional_derivative():
    d = directional_derivative(cosine((0, 1)), (1.0, 0.0))
    assert d.evaluate(0.25, 0.3).real == pytest.approx(-2 * np.pi)
    assert directional_derivative(cosine((0, 1)), (0.0, 1.0)).evaluate(0.1, 0.2) == 0


@pytest.mark.parametrize("t", [1, 2])
def test_derivative_growth_probe(t):
    probe = derivative_growth_probe(cosine((0, 1)) + cosine((1, 0)), DE, t, resolution=256)
    assert probe["lambda_u_power"] == pytest.approx((2 + np.sqrt(3)) ** t)
    assert probe["unstable_ratio"] == pytest.approx(1.0, rel=0.1)
    assert probe["stable_ratio"] == pytest.approx(1.0, rel=0.1)


def test_derivative_growth_probe_finite_difference():
    probe = derivative_growth_probe(cosine((0, 1)), DE, 0, method="finite_difference")
    assert probe["unstable_ratio"] == pytest.approx(1.0)
    with pytest.raises(InputError):
        derivative_growth_probe(cosine((0, 1)), DE, -1)
    with pytest.raises(InputError):
        derivative_growth_probe(cosine((0, 1)), DE, 1, method="chebyshev")


def test_bump_symbol():
    bump = bump_symbol((0.5, 0.5), 0.2, L_max=24)
    assert bump.is_real()
    assert bump.evaluate(0.5, 0.5).real == pytest.approx(1.0, abs=0.05)
    assert bump.evaluate(0.0, 0.0).real == pytest.approx(0.0, abs=0.05)
    with pytest.raises(InputError):
        bump_symbol((0.5, 0.5), 0.6)


def test_build_partition():
    pair = build_partition()
    assert pair.truncation_error < 1e-6
    np.testing.assert_allclose((pair.a1 + pair.a2).grid(32), 1.0, atol=1e-12)
    assert pair.a1_exact(*pair.K2.center) == pytest.approx(1.0)
    assert pair.a1_exact(*pair.K1.center) == pytest.approx(0.0)
    assert pair.a1.is_real()
    assert pair.as_dict()["L_max"] <= PARTITION_L_MAX


def test_sampled_partition_stays_in_unit_interval():
    pair = build_partition()
    values = pair.a1.grid(400).real
    assert values.min() >= -1e-6
    assert values.max() <= 1 + 1e-6
    angles = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    for ball, target in ((pair.K2, 1.0), (pair.K1, 0.0)):
        for r in (0.0, 0.5 * ball.radius, ball.radius):
            y = ball.center[0] + r * np.cos(angles)
            eta = ball.center[1] + r * np.sin(angles)
            np.testing.assert_allclose(pair.a1.evaluate(y % 1, eta % 1).real, target, atol=1e-6)


def test_build_partition_overlap():
    with pytest.raises(OverlappingRegions):
        build_partition(K1=Ball((0.6, 0.6), 0.1), K2=Ball((0.7, 0.7), 0.1))


def test_partition_from_symbol():
    pair = PartitionPair.from_symbol(0.5 + 0.25 * cosine((0, 1)))
    assert pair.a1_exact(0.0, 0.0) + pair.a2_exact(0.0, 0.0) == pytest.approx(1.0)
    assert pair.symbol(2).coefficient((0, 0)) == pytest.approx(0.5)


def test_named_symbols():
    assert named_symbol("cos_y_cos_eta").is_real()
    with pytest.raises(InputError):
        named_symbol("sin_y")


def test_single_modes():
    modes = single_modes(1)
    assert len(modes) == 9
    assert (0, 0) in modes
