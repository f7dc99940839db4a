# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
r"""
observables.py

Phase-space observables of quantum states: the Fourier-Wigner transform,
matrix elements of quantized symbols, window masses of eigenstates and their
scans over N, quantum-ergodicity variances and Husimi densities.

The Fourier-Wigner coefficients are

.. math::

    \mathcal{V}_N(f, g)(l) = \langle T_{l/N} f, g \rangle_{H_N}

so that :math:`\langle \mathrm{Op}_N(a) \varphi, \varphi \rangle =
\sum_l \hat{a}(l) \mathcal{V}_N(\varphi, \varphi)(l)`.
"""
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd

from catmap.classical import HyperbolicMap
from catmap.hilbert import HilbertSpec, StateVector, inner_product, translation_apply
from catmap.propagator import (
    QuantumCatMap,
    SpectralData,
    build_cat_matrix,
    eigendecompose,
    randomize_clusters,
    window_indices,
)
from catmap.quantize import TorusSymbol, op_matrix
from catmap.utils import InputError, Multiprocessing

log = logging.getLogger(__name__)

NORM_TOL = 1e-9
CIRCLE_POINTS = 360


class BadWindow(InputError):
    pass


class NotNormalized(InputError):
    pass


def fourier_wigner(f: StateVector, g: StateVector, l) -> complex:
    """``<T_{l/N} f, g>``."""
    return inner_product(translation_apply(l, f), g)


def _shift_spectrum(phi: np.ndarray, l1: int) -> np.ndarray:
    """``S[q] = sum_k phi_{k - l1} conj(phi_k) exp(2 pi i q k / N)``."""
    N = phi.size
    return N * np.fft.ifft(np.roll(phi, l1 % N) * np.conj(phi))


def _wigner_coefficients(phi: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Fourier-Wigner coefficients of ``phi`` at every row of ``freqs``, one
    FFT per distinct ``l1 mod N``."""
    N = phi.size
    out = np.empty(len(freqs), dtype=complex)
    residues = freqs[:, 0] % N
    for r in np.unique(residues):
        rows = np.flatnonzero(residues == r)
        spectrum = _shift_spectrum(phi, int(r))
        l1, l2 = freqs[rows, 0], freqs[rows, 1]
        cocycle = np.exp(-1j * np.pi * ((l1 % (2 * N)) * (l2 % (2 * N)) % (2 * N)) / N)
        out[rows] = cocycle * spectrum[l2 % N] / N
    return out


@dataclass(eq=False)
class WignerData:
    """Fourier-Wigner coefficients of a state for ``max(|l1|, |l2|) <= cutoff``."""

    spec: HilbertSpec
    cutoff: int
    coefficients: dict

    def __getitem__(self, l) -> complex:
        return self.coefficients[tuple(l)]

    def hermitian_defect(self) -> float:
        return max(
            abs(v - np.conj(self.coefficients[(-l1, -l2)]))
            for (l1, l2), v in self.coefficients.items()
        )

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"l1": l1, "l2": l2, "re": v.real, "im": v.imag, "abs": abs(v)}
            for (l1, l2), v in sorted(self.coefficients.items())
        ]
        return pd.DataFrame(rows)


def wigner_table(phi: StateVector, cutoff: int) -> WignerData:
    side = np.arange(-cutoff, cutoff + 1)
    l1, l2 = (x.ravel() for x in np.meshgrid(side, side, indexing="ij"))
    freqs = np.column_stack([l1, l2])
    values = _wigner_coefficients(phi.amplitudes, freqs)
    coeffs = {(int(a), int(b)): complex(v) for (a, b), v in zip(freqs, values)}
    return WignerData(phi.spec, cutoff, coeffs)


def matrix_element(a: TorusSymbol, phi: StateVector) -> complex:
    """``sum_l a(l) V(phi, phi)(l)``, the Wigner pairing for
    ``<Op_N(a) phi, phi>``."""
    if not len(a):
        return 0j
    return complex(np.sum(a.values * _wigner_coefficients(phi.amplitudes, a.freqs)))


def window_mass(phi: StateVector, alpha1: float, alpha2: float) -> float:
    """Fraction ``(1/N) sum |phi_k|**2`` of the norm carried by the indices
    ``ceil(alpha1 N) .. floor(alpha2 N)``.

    Raises
    ------
    BadWindow
        unless ``0 <= alpha1 < alpha2 <= 1``.
    NotNormalized
        if ``phi`` is not a unit vector to ``1e-9``.
    """
    check_window(alpha1, alpha2)
    if abs(phi.norm() - 1) > NORM_TOL:
        raise NotNormalized(f"state has norm {phi.norm():.12f}")
    return window_masses(phi.amplitudes[:, None], alpha1, alpha2)[0]


def check_window(alpha1: float, alpha2: float) -> None:
    if not 0 <= alpha1 < alpha2 <= 1:
        raise BadWindow(f"window [{alpha1}, {alpha2}] must satisfy 0 <= a1 < a2 <= 1")


def window_masses(vectors: np.ndarray, alpha1: float, alpha2: float) -> np.ndarray:
    N = vectors.shape[0]
    idx = window_indices(N, alpha1, alpha2)
    return (np.abs(vectors[idx]) ** 2).sum(axis=0) / N


def column_norms(matrix: np.ndarray) -> np.ndarray:
    """H_N norms of the columns of ``matrix``."""
    return np.sqrt((np.abs(matrix) ** 2).sum(axis=0) / matrix.shape[0])


def c1_proxy(a: TorusSymbol, spectral: SpectralData) -> float:
    """``1 / min_j ||Op_N(a) phi_j||`` over the eigenbasis."""
    images = op_matrix(a, spectral.spec) @ spectral.eigenvectors
    smallest = column_norms(images).min()
    return float(1 / smallest) if smallest > 0 else float("inf")


def _deloc_at_N(args) -> dict:
    hmap, N, window, basis_mode, n_rotations, bump, seed = args
    qcm = build_cat_matrix(hmap, HilbertSpec(N))
    spectral = eigendecompose(qcm, "deterministic", window)
    masses = window_masses(spectral.eigenvectors, *window)
    row = {
        "N": N,
        "min_mass": float(masses.min()),
        "argmin": int(masses.argmin()),
        "n_clusters": len(spectral.clusters),
        "max_multiplicity": max(len(c) for c in spectral.clusters),
    }
    if basis_mode == "randomized":
        rng = np.random.default_rng([seed, N])
        minima = [
            window_masses(randomize_clusters(spectral, rng).eigenvectors, *window).min()
            for _ in range(n_rotations)
        ]
        row["min_mass_randomized"] = float(min(minima))
    if bump is not None:
        row["c1_proxy"] = c1_proxy(bump, spectral)
    return row


def deloc_scan(
    hmap: HyperbolicMap,
    window: tuple,
    N_list,
    basis_mode: str = "deterministic",
    bump: TorusSymbol = None,
    n_rotations: int = 20,
    seed: int = 0,
    n_workers: int = 1,
) -> pd.DataFrame:
    """Minimum window mass over an eigenbasis of ``M_N`` for each ``N``.

    In ``deterministic`` mode the eigenbasis inside each degenerate
    eigenspace contains its least-massive state, so ``min_mass`` is the
    minimum over all eigenbases. ``randomized`` mode additionally records the
    smallest minimum seen over ``n_rotations`` Haar-random bases,
    ``min_mass_randomized``, which is never below ``min_mass``.

    When ``bump`` is given the column ``c1_proxy`` holds
    ``1 / min_j ||Op_N(bump) phi_j||``.
    """
    check_window(*window)
    if basis_mode not in ("deterministic", "randomized"):
        raise InputError(f"unknown basis mode {basis_mode!r}")
    N_list = list(N_list)

    def generator():
        for N in N_list:
            yield (hmap, N, tuple(window), basis_mode, n_rotations, bump, seed)

    rows = Multiprocessing(_deloc_at_N, generator, n_workers, desc="deloc").ordered()
    return pd.DataFrame(rows)


def qe_variance(
    hmap: HyperbolicMap, a: TorusSymbol, spec: HilbertSpec, spectral: SpectralData = None
) -> float:
    """``(1/N) sum_j |<Op_N(a) phi_j, phi_j> - a(0)|**2`` over an eigenbasis."""
    if spectral is None:
        spectral = eigendecompose(build_cat_matrix(hmap, spec))
    V = spectral.eigenvectors
    elements = np.einsum("ij,ij->j", V.conj(), op_matrix(a, spec) @ V) / spec.N
    return float(np.mean(np.abs(elements - a.coefficient((0, 0))) ** 2))


def _qe_at_N(args) -> dict:
    hmap, N, a = args
    spec = HilbertSpec(N)
    return {"N": N, "variance": qe_variance(hmap, a, spec)}


def qe_scan(hmap: HyperbolicMap, a: TorusSymbol, N_list, n_workers: int = 1) -> pd.DataFrame:
    N_list = list(N_list)

    def generator():
        for N in N_list:
            yield (hmap, N, a)

    return pd.DataFrame(Multiprocessing(_qe_at_N, generator, n_workers, desc="qe").ordered())


def _gaussian_weights(N: int, y: np.ndarray) -> tuple:
    n = np.arange(-2 * N, 3 * N)
    return n, np.exp(-np.pi * N * (n[None, :] / N - y[:, None]) ** 2)


def coherent_state(N: int, y: float, eta: float) -> StateVector:
    """Periodized Gaussian centred at ``(y, eta)`` with symmetric width,
    normalized so that ``|<phi, c>|**2`` integrates to ``||phi||**2`` over the
    torus."""
    n, weights = _gaussian_weights(N, np.array([y]))
    amps = np.zeros(N, dtype=complex)
    np.add.at(amps, n % N, weights[0] * np.exp(2j * np.pi * eta * n))
    return StateVector(HilbertSpec(N), 2 ** 0.25 * N ** 0.75 * amps)


def husimi_grid(phi: StateVector, resolution: int) -> np.ndarray:
    """``|<phi, c_{y, eta}>|**2`` on the ``resolution x resolution`` grid,
    ``out[i, j]`` at ``(i/resolution, j/resolution)``."""
    if resolution < 16:
        raise InputError(f"Husimi resolution must be at least 16, got {resolution}")
    N = phi.N
    side = np.arange(resolution) / resolution
    n, weights = _gaussian_weights(N, side)
    weighted = weights * phi.amplitudes[n % N][None, :]
    phases = np.exp(-2j * np.pi * np.outer(n, side))
    return np.sqrt(2 / N) * np.abs(weighted @ phases) ** 2


def write_pgm(grid: np.ndarray, path) -> None:
    """8-bit binary PGM, rows along ``y``, scaled to the grid maximum."""
    top = grid.max()
    pixels = np.zeros(grid.shape, dtype=np.uint8) if top <= 0 else np.round(255 * grid / top)
    height, width = grid.shape
    with open(path, "wb") as stream:
        stream.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        stream.write(pixels.astype(np.uint8).tobytes())


def write_grid_csv(grid: np.ndarray, path) -> None:
    pd.DataFrame(grid).to_csv(path, header=False, index=False)


def resolvent_defect(qcm: QuantumCatMap, u: StateVector, z: complex) -> float:
    """``||(M - z) u||``."""
    return StateVector(u.spec, qcm.matrix @ u.amplitudes - z * u.amplitudes).norm()


def min_resolvent_defect(
    qcm: QuantumCatMap, u: StateVector, n_points: int = CIRCLE_POINTS
) -> float:
    """Minimum of ``||(M - z) u||`` for unit ``u`` over ``z`` on an
    ``n_points`` grid of the unit circle together with the exact minimizer on
    the circle, ``z = r/|r|`` with ``r = <Mu, u>``."""
    Mu = qcm.matrix @ u.amplitudes
    z = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    r = np.vdot(u.amplitudes, Mu) / u.N
    if abs(r) > 0:
        z = np.append(z, r / abs(r))
    residuals = Mu[:, None] - u.amplitudes[:, None] * z[None, :]
    return float(column_norms(residuals).min())
