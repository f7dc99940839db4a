# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
r"""
quantize.py

Symbols on the torus stored as finite Fourier tables, their Weyl quantization
and the numerical probes of the finite-N symbol calculus.

A symbol is

.. math::

    a(y, \eta) = \sum_l \hat{a}(l) e^{2\pi i (l_2 y - l_1 \eta)}

and its quantization is :math:`\mathrm{Op}_N(a) = \sum_l \hat{a}(l) T_{l/N}`.
With this pairing, composing with a map relabels frequencies by its inverse:
:math:`\widehat{a \circ \gamma^p}(\gamma^{-p} l) = \hat{a}(l)`.
"""
from dataclasses import dataclass, field
from typing import Callable
import json
import logging

import numpy as np
import pandas as pd
import scipy.linalg

from catmap.classical import HyperbolicMap, integer_power, torus_distance
from catmap.hilbert import HilbertSpec
from catmap.utils import (
    ConvergenceFailure,
    InputError,
    NumericalFailure,
    loglog_fit,
    spectral_norm,
)

log = logging.getLogger(__name__)

DEFAULT_L_MAX = 48
# cutoff and pointwise tolerance of the sampled partition of unity
PARTITION_L_MAX = 64
PARTITION_TOL = 1e-6
DEFAULT_MAX_CUTOFF = 4096
PRUNE_TOL = 1e-15
OP_BLOCK = 256


class GridTooCoarse(InputError):
    pass


class OverlappingRegions(InputError):
    pass


class CutoffOverflow(NumericalFailure):
    pass


class TorusSymbol:
    """Finite table of Fourier coefficients.

    Parameters
    ----------
    freqs
        integer array of shape ``(K, 2)``, the frequencies ``(l1, l2)``.
    values
        complex array of shape ``(K,)``, the coefficients.

    Repeated frequencies are summed and the table is stored sorted.
    """

    def __init__(self, freqs, values):
        freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, 2)
        values = np.asarray(values, dtype=complex).reshape(-1)
        if len(freqs) != len(values):
            raise InputError("frequencies and coefficients differ in length")
        if len(freqs):
            uniq, inverse = np.unique(freqs, axis=0, return_inverse=True)
            summed = np.zeros(len(uniq), dtype=complex)
            np.add.at(summed, inverse.reshape(-1), values)
            freqs, values = uniq, summed
        self.freqs = freqs
        self.values = values

    def __repr__(self):
        return f"TorusSymbol(n_modes={len(self)}, cutoff={self.cutoff})"

    def __len__(self):
        return len(self.values)

    @property
    def cutoff(self) -> int:
        """Largest ``max(|l1|, |l2|)`` present."""
        return int(np.abs(self.freqs).max()) if len(self) else 0

    def coefficient(self, l) -> complex:
        match = np.flatnonzero((self.freqs[:, 0] == l[0]) & (self.freqs[:, 1] == l[1]))
        return complex(self.values[match[0]]) if match.size else 0j

    def as_dict(self) -> dict:
        return {(int(l1), int(l2)): complex(v) for (l1, l2), v in zip(self.freqs, self.values)}

    @classmethod
    def from_dict(cls, coeffs: dict) -> "TorusSymbol":
        if not coeffs:
            return cls(np.zeros((0, 2)), np.zeros(0))
        return cls(list(coeffs.keys()), list(coeffs.values()))

    def __add__(self, other):
        if not isinstance(other, TorusSymbol):
            other = constant(other)
        return TorusSymbol(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.values, other.values]),
        )

    __radd__ = __add__

    def __neg__(self):
        return TorusSymbol(self.freqs, -self.values)

    def __sub__(self, other):
        if not isinstance(other, TorusSymbol):
            other = constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, TorusSymbol):
            return product_symbol(self, scalar)
        return TorusSymbol(self.freqs, scalar * self.values)

    __rmul__ = __mul__

    def conj(self) -> "TorusSymbol":
        """Pointwise complex conjugate, ``conj(a)^(l) = conj(a^(-l))``."""
        return TorusSymbol(-self.freqs, np.conj(self.values))

    def reality_defect(self) -> float:
        if not len(self):
            return 0.0
        return float(np.abs((self - self.conj()).values).max(initial=0.0))

    def is_real(self, tol: float = 1e-12) -> bool:
        return self.reality_defect() <= tol

    def pruned(self, tol: float = PRUNE_TOL) -> "TorusSymbol":
        keep = np.abs(self.values) > tol
        return TorusSymbol(self.freqs[keep], self.values[keep])

    def evaluate(self, y, eta) -> np.ndarray:
        """Pointwise values at ``(y, eta)``; arrays broadcast."""
        y = np.asarray(y, dtype=float)
        eta = np.asarray(eta, dtype=float)
        out = np.zeros(np.broadcast(y, eta).shape, dtype=complex)
        for (l1, l2), v in zip(self.freqs, self.values):
            out += v * np.exp(2j * np.pi * (l2 * y - l1 * eta))
        return out

    def grid(self, M: int) -> np.ndarray:
        """Values on the ``M x M`` grid, ``out[i, j] = a(i/M, j/M)``, exact at
        the grid points for any ``M`` since frequencies fold modulo ``M``."""
        table = np.zeros((M, M), dtype=complex)
        np.add.at(table, (self.freqs[:, 1] % M, (-self.freqs[:, 0]) % M), self.values)
        return np.fft.ifft2(table) * M * M

    def to_json(self) -> str:
        return json.dumps(
            [
                {"l": [int(l1), int(l2)], "re": float(v.real), "im": float(v.imag)}
                for (l1, l2), v in zip(self.freqs, self.values)
            ]
        )

    @classmethod
    def from_json(cls, text: str) -> "TorusSymbol":
        records = json.loads(text)
        return cls(
            [r["l"] for r in records] or np.zeros((0, 2)),
            [r["re"] + 1j * r["im"] for r in records],
        )


def constant(c) -> TorusSymbol:
    return TorusSymbol([[0, 0]], [c])


def fourier_mode(l, amplitude=1.0) -> TorusSymbol:
    """The single mode ``amplitude * exp(2 pi i (l2 y - l1 eta))``."""
    return TorusSymbol([list(l)], [amplitude])


def cosine(l, amplitude=1.0) -> TorusSymbol:
    """``amplitude * cos(2 pi (l2 y - l1 eta))``."""
    l1, l2 = l
    return TorusSymbol([[l1, l2], [-l1, -l2]], [amplitude / 2, amplitude / 2])


def position_symbol(coeffs: dict) -> TorusSymbol:
    """Real symbol depending on ``y`` only.

    ``coeffs`` maps ``m >= 0`` to the coefficient of ``exp(2 pi i m y)``; the
    coefficient of ``-m`` is set to its conjugate.
    """
    freqs, values = [], []
    for m, c in coeffs.items():
        if m == 0:
            freqs.append([0, 0])
            values.append(complex(c).real)
        else:
            freqs += [[0, m], [0, -m]]
            values += [c, np.conj(c)]
    return TorusSymbol(freqs, values)


def random_symbol(
    rng: np.random.Generator, L: int, position_only: bool = False, decay: float = 2.0
) -> TorusSymbol:
    """Random real trigonometric polynomial with coefficients decaying like
    ``(1 + |l|)**(-decay)``."""
    if position_only:
        coeffs = {
            m: (rng.standard_normal() + 1j * rng.standard_normal()) / (1 + m) ** decay
            for m in range(L + 1)
        }
        return position_symbol(coeffs)
    side = np.arange(-L, L + 1)
    l1, l2 = (x.ravel() for x in np.meshgrid(side, side, indexing="ij"))
    freqs = np.column_stack([l1, l2])
    raw = (rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))) / (
        1 + np.hypot(l1, l2)
    ) ** decay
    half = TorusSymbol(freqs, raw)
    return 0.5 * (half + half.conj())


def sample_symbol(samples: np.ndarray, L_max: int = DEFAULT_L_MAX, prune: float = PRUNE_TOL):
    """Fourier coefficients of real samples ``samples[i, j] = a(i/M, j/M)``
    truncated to ``max(|l1|, |l2|) <= L_max``.

    Raises
    ------
    GridTooCoarse
        if ``M < 2 * L_max + 2``.
    """
    samples = np.asarray(samples)
    M = samples.shape[0]
    if samples.shape != (M, M):
        raise InputError(f"samples must be a square grid, got shape {samples.shape}")
    if M < 2 * L_max + 2:
        raise GridTooCoarse(f"a {M}x{M} grid cannot resolve frequencies up to {L_max}")
    if np.iscomplexobj(samples) and np.abs(samples.imag).max() > 0:
        raise InputError("symbol samples must be real")
    spectrum = np.fft.fft2(samples.real) / (M * M)
    side = np.arange(-L_max, L_max + 1)
    l1, l2 = (x.ravel() for x in np.meshgrid(side, side, indexing="ij"))
    values = spectrum[l2 % M, (-l1) % M]
    mirrored = spectrum[(-l2) % M, l1 % M]
    values = 0.5 * (values + np.conj(mirrored))
    # |a(l)| = |a(-l)| after symmetrization, so pruning keeps the table real
    keep = np.abs(values) > prune
    return TorusSymbol(np.column_stack([l1, l2])[keep], values[keep])


def read_grid_csv(path) -> np.ndarray:
    """Grid samples from a headerless CSV matrix."""
    return pd.read_csv(path, header=None).to_numpy(dtype=float)


def sample_function(func: Callable, M: int, L_max: int = DEFAULT_L_MAX) -> TorusSymbol:
    """Sample ``func(y, eta)`` on the ``M x M`` grid and transform."""
    side = np.arange(M) / M
    y, eta = np.meshgrid(side, side, indexing="ij")
    return sample_symbol(func(y, eta), L_max)


def product_symbol(a: TorusSymbol, b: TorusSymbol) -> TorusSymbol:
    """Pointwise product, computed on a zero-padded grid large enough that the
    product of the two trigonometric polynomials is recovered without
    aliasing."""
    if not len(a) or not len(b):
        return TorusSymbol(np.zeros((0, 2)), np.zeros(0))
    L = a.cutoff + b.cutoff
    M = 2 * L + 2
    values = a.grid(M) * b.grid(M)
    spectrum = np.fft.fft2(values) / (M * M)
    side = np.arange(-L, L + 1)
    l1, l2 = (x.ravel() for x in np.meshgrid(side, side, indexing="ij"))
    coeffs = spectrum[l2 % M, (-l1) % M]
    keep = np.abs(coeffs) > PRUNE_TOL
    return TorusSymbol(np.column_stack([l1, l2])[keep], coeffs[keep])


def compose_with_map(
    a: TorusSymbol, hmap: HyperbolicMap, power: int, max_cutoff: int = DEFAULT_MAX_CUTOFF
) -> TorusSymbol:
    """The symbol ``a o gamma**power`` by exact relabelling of frequencies.

    Raises
    ------
    CutoffOverflow
        if any relabelled frequency exceeds ``max_cutoff``.
    """
    if power == 0 or not len(a):
        return TorusSymbol(a.freqs, a.values)
    relabel = integer_power(hmap.entries, -power)
    row_bound = max(abs(relabel[0][0]) + abs(relabel[0][1]), abs(relabel[1][0]) + abs(relabel[1][1]))
    if row_bound > 2**62 or row_bound * a.cutoff > 2**62:
        raise CutoffOverflow(f"frequencies of a o gamma^{power} overflow")
    new = a.freqs @ np.array(relabel, dtype=np.int64).T
    reached = int(np.abs(new).max())
    if reached > max_cutoff:
        raise CutoffOverflow(
            f"a o gamma^{power} has frequency cutoff {reached} > {max_cutoff}"
        )
    return TorusSymbol(new, a.values)


def op_matrix(a: TorusSymbol, spec: HilbertSpec) -> np.ndarray:
    """Dense matrix of the Weyl quantization ``Op_N(a) = sum_l a(l) T_{l/N}``.

    Coefficients sharing ``l1 mod N`` fill the same cyclic diagonal, so they
    are accumulated per diagonal before the matrix is assembled.
    """
    N = spec.N
    k = np.arange(N, dtype=np.int64)
    diagonals = np.zeros((N, N), dtype=complex)
    for start in range(0, len(a), OP_BLOCK):
        l1 = a.freqs[start : start + OP_BLOCK, 0]
        l2 = a.freqs[start : start + OP_BLOCK, 1]
        vals = a.values[start : start + OP_BLOCK]
        m = (l2[:, None] % (2 * N)) * ((2 * k[None, :] - l1[:, None]) % (2 * N)) % (2 * N)
        np.add.at(diagonals, l1 % N, vals[:, None] * np.exp(1j * np.pi * m / N))
    r, kk = np.meshgrid(k, k, indexing="ij")
    mat = np.zeros((N, N), dtype=complex)
    mat[kk, (kk - r) % N] = diagonals
    return mat


def moyal_defect(a: TorusSymbol, b: TorusSymbol, spec: HilbertSpec) -> float:
    """``||Op_N(a) Op_N(b) - Op_N(ab)||``."""
    lhs = op_matrix(a, spec) @ op_matrix(b, spec)
    return spectral_norm(lhs - op_matrix(product_symbol(a, b), spec))


def garding_floor(a: TorusSymbol, spec: HilbertSpec) -> float:
    """Smallest eigenvalue of the Hermitian part of ``Op_N(a)``."""
    op = op_matrix(a, spec)
    herm = 0.5 * (op + op.conj().T)
    try:
        return float(scipy.linalg.eigvalsh(herm, subset_by_index=[0, 0])[0])
    except scipy.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"eigenvalue solver failed: {e}")


def garding_envelope(N_values, floors) -> dict:
    """Fit ``|floor| = C N**slope`` and the smallest ``C`` with
    ``floor >= -C/N`` at every sampled ``N``."""
    N_values = np.asarray(N_values, dtype=float)
    floors = np.asarray(floors, dtype=float)
    slope, intercept, r2 = loglog_fit(N_values, np.abs(floors))
    return {
        "C": float(np.max(np.maximum(-floors, 0) * N_values)),
        "slope": slope,
        "intercept": intercept,
        "r_squared": r2,
    }


def directional_derivative(a: TorusSymbol, direction) -> TorusSymbol:
    """Exact derivative of ``a`` along ``direction = (dy, deta)``."""
    v = np.asarray(direction, dtype=float)
    factor = 2j * np.pi * (a.freqs[:, 1] * v[0] - a.freqs[:, 0] * v[1])
    return TorusSymbol(a.freqs, a.values * factor)


def _fd_directional_sup(a: TorusSymbol, direction, M: int) -> float:
    values = a.grid(M).real
    d_y = (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) * M / 2
    d_eta = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) * M / 2
    return float(np.abs(direction[0] * d_y + direction[1] * d_eta).max())


def derivative_growth_probe(
    a: TorusSymbol,
    hmap: HyperbolicMap,
    t: int,
    resolution: int = 256,
    method: str = "spectral",
    max_cutoff: int = DEFAULT_MAX_CUTOFF,
) -> dict:
    """Sup norms of the derivatives of ``a o gamma**t`` along the unstable and
    stable directions, compared with the ``|lambda_u|**t`` growth.

    The sup is taken over a ``resolution x resolution`` grid. With
    ``method="spectral"`` the derivative is exact at the grid points;
    ``method="finite_difference"`` uses periodic central differences.
    """
    if t < 0:
        raise InputError(f"t must be non-negative, got {t}")
    if method not in ("spectral", "finite_difference"):
        raise InputError(f"unknown differentiation method {method!r}")
    propagated = compose_with_map(a, hmap, t, max_cutoff)

    def sup(symbol, direction):
        if method == "spectral":
            return float(np.abs(directional_derivative(symbol, direction).grid(resolution)).max())
        return _fd_directional_sup(symbol, direction, resolution)

    base_u, base_s = sup(a, hmap.v_u), sup(a, hmap.v_s)
    unstable, stable = sup(propagated, hmap.v_u), sup(propagated, hmap.v_s)
    growth = hmap.expansion**t
    return {
        "t": t,
        "unstable_norm": unstable,
        "stable_norm": stable,
        "base_unstable_norm": base_u,
        "base_stable_norm": base_s,
        "lambda_u_power": growth,
        "unstable_ratio": unstable / (growth * base_u) if base_u else float("nan"),
        "stable_ratio": stable * growth / base_s if base_s else float("nan"),
        "method": method,
    }


def smoothstep(t):
    """C-infinity step from 0 at ``t <= 0`` to 1 at ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
        g = np.where(t < 1, np.exp(-1 / np.where(t < 1, 1 - t, 1)), 0.0)
    return f / (f + g)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    @classmethod
    def from_dict(cls, spec: dict) -> "Ball":
        return cls(tuple(float(x) for x in spec["center"]), float(spec["radius"]))

    def as_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius}


STANDARD_K1 = Ball((0.2, 0.2), 0.1)
STANDARD_K2 = Ball((0.7, 0.7), 0.1)
STANDARD_SUPP = Ball((0.7, 0.7), 0.45)


def bump_function(ball: Ball) -> Callable:
    """Radial C-infinity bump equal to one at the centre of ``ball`` and
    vanishing outside it."""

    def func(y, eta):
        pts = np.stack(np.broadcast_arrays(y, eta), axis=-1)
        return 1 - smoothstep(torus_distance(pts, ball.center) / ball.radius)

    return func


def bump_symbol(center, radius: float, L_max: int = DEFAULT_L_MAX, M: int = 256) -> TorusSymbol:
    ball = Ball(tuple(center), radius)
    if not 0 < radius < 0.5:
        raise InputError(f"bump radius must lie in (0, 0.5), got {radius}")
    return sample_function(bump_function(ball), max(M, 2 * L_max + 2), L_max)


@dataclass(eq=False)
class PartitionPair:
    """Two symbols summing to one. ``a1_exact``/``a2_exact`` are the smooth
    functions the symbols were sampled from; ``truncation_error`` is the sup
    distance between ``a1`` and ``a1_exact`` on the sampling grid."""

    a1: TorusSymbol
    a2: TorusSymbol
    K1: Ball = None
    K2: Ball = None
    supp_bound: Ball = None
    a1_exact: Callable = field(default=None, repr=False)
    a2_exact: Callable = field(default=None, repr=False)
    truncation_error: float = 0.0

    def symbol(self, letter: int) -> TorusSymbol:
        return self.a1 if letter == 1 else self.a2

    def exact(self, letter: int) -> Callable:
        return self.a1_exact if letter == 1 else self.a2_exact

    @classmethod
    def from_symbol(cls, a1: TorusSymbol) -> "PartitionPair":
        """Pair ``(a1, 1 - a1)`` whose exact functions are the trigonometric
        polynomials themselves."""

        def a1_exact(y, eta):
            return a1.evaluate(y, eta).real

        return cls(
            a1=a1,
            a2=constant(1.0) - a1,
            a1_exact=a1_exact,
            a2_exact=lambda y, eta: 1 - a1_exact(y, eta),
        )

    def as_dict(self) -> dict:
        return {
            "K1": self.K1.as_dict() if self.K1 else None,
            "K2": self.K2.as_dict() if self.K2 else None,
            "supp_bound": self.supp_bound.as_dict() if self.supp_bound else None,
            "L_max": self.a1.cutoff,
            "truncation_error": self.truncation_error,
        }


def build_partition(
    K1: Ball = STANDARD_K1,
    K2: Ball = STANDARD_K2,
    supp_bound: Ball = STANDARD_SUPP,
    L_max: int = PARTITION_L_MAX,
    M: int = 256,
) -> PartitionPair:
    """Smooth partition of unity ``a1 + a2 = 1`` with ``a1 = 1`` on ``K2``,
    ``a1 = 0`` on ``K1`` and ``supp a1`` inside ``supp_bound``.

    ``a1`` is a radial plateau around the centre of ``supp_bound``: one up to
    the radius that just contains ``K2``, then a smoothstep down to zero at
    the radius of ``supp_bound``.

    Raises
    ------
    OverlappingRegions
        if ``K1`` and ``K2`` meet, or ``K1`` meets ``supp_bound``.
    """
    d12 = float(torus_distance(K1.center, K2.center))
    if d12 <= K1.radius + K2.radius:
        raise OverlappingRegions(f"{K1} and {K2} overlap")
    if supp_bound.radius >= 0.5:
        raise InputError("supp_bound must have radius below 1/2")
    r_in = float(torus_distance(K2.center, supp_bound.center)) + K2.radius
    if r_in >= supp_bound.radius:
        raise InputError(f"{K2} is not contained in the interior of {supp_bound}")
    if float(torus_distance(K1.center, supp_bound.center)) - K1.radius < supp_bound.radius:
        raise OverlappingRegions(f"{K1} meets {supp_bound}")

    width = supp_bound.radius - r_in

    def a1_exact(y, eta):
        pts = np.stack(np.broadcast_arrays(y, eta), axis=-1)
        d = torus_distance(pts, supp_bound.center)
        return 1 - smoothstep((d - r_in) / width)

    def a2_exact(y, eta):
        return 1 - a1_exact(y, eta)

    M = max(M, 2 * L_max + 2)
    side = np.arange(M) / M
    y, eta = np.meshgrid(side, side, indexing="ij")
    samples = a1_exact(y, eta)
    a1 = sample_symbol(samples, L_max)
    a2 = constant(1.0) - a1
    sampled = a1.grid(M).real
    error = float(np.abs(sampled - samples).max())
    overshoot = max(-sampled.min(), sampled.max() - 1, 0.0)
    log.info(f"Partition sampled with cutoff {L_max}: truncation error {error:.2e}.")
    if max(error, overshoot) > PARTITION_TOL:
        log.warning(
            f"Sampled partition leaves [0, 1] by {overshoot:.2e} with truncation error "
            f"{error:.2e}; raise L_max or widen the band between K2 and supp_bound."
        )
    return PartitionPair(
        a1=a1,
        a2=a2,
        K1=K1,
        K2=K2,
        supp_bound=supp_bound,
        a1_exact=a1_exact,
        a2_exact=a2_exact,
        truncation_error=error,
    )


NAMED_SYMBOLS = {
    "one": lambda: constant(1.0),
    "cos_y": lambda: cosine((0, 1)),
    "cos_eta": lambda: cosine((1, 0)),
    "cos_y_plus_cos_eta": lambda: cosine((0, 1)) + cosine((1, 0)),
    "cos_y_cos_eta": lambda: product_symbol(cosine((0, 1)), cosine((1, 0))),
}


def named_symbol(name: str) -> TorusSymbol:
    try:
        return NAMED_SYMBOLS[name]()
    except KeyError:
        raise InputError(f"unknown symbol {name!r}, expected one of {list(NAMED_SYMBOLS)}")


def single_modes(mode_max: int):
    """Every frequency with ``max(|l1|, |l2|) <= mode_max``."""
    side = range(-mode_max, mode_max + 1)
    return [(l1, l2) for l1 in side for l2 in side]
