# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
propagator.py

The quantum cat map: construction of the unitary propagator, the exact Egorov
relation, eigendecomposition with reproducible bases inside degenerate
eigenspaces, and the quantum period.
"""
from dataclasses import dataclass, field
from math import gcd
import json
import logging
import struct

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.stats

from catmap.classical import HyperbolicMap
from catmap.hilbert import HilbertSpec, StateVector
from catmap.quantize import DEFAULT_MAX_CUTOFF, TorusSymbol, compose_with_map, op_matrix
from catmap.utils import ConvergenceFailure, InputError, NumericalFailure, spectral_norm

log = logging.getLogger(__name__)

UNITARITY_TOL = 1e-8
CLUSTER_GAP = 1e-8
PERIOD_TOL = 1e-8
DEFAULT_WINDOW = (0.3, 0.7)
MAGIC = b"QCM1"


class UnsupportedN(InputError):
    pass


class UnitarityFailure(NumericalFailure):
    pass


class PeriodNotFound(NumericalFailure):
    pass


def kernel_admissible(hmap: HyperbolicMap, N: int) -> bool:
    """Whether the quadratic-phase kernel exists: ``b != 0`` and
    ``gcd(2b, N) = 1``."""
    b = hmap.entries[0][1]
    return b != 0 and gcd(2 * b, N) == 1


@dataclass(eq=False)
class QuantumCatMap:
    """Unitary quantization of ``map`` on ``H_N``; ``matrix[j, k]`` is the
    kernel with output index ``j``."""

    spec: HilbertSpec
    map: HyperbolicMap
    matrix: np.ndarray
    phase_convention: str = "kernel (0,0) entry real positive"
    _powers: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return self.spec.N

    def power(self, j: int) -> np.ndarray:
        """``M**j``, cached; negative powers use the adjoint."""
        if j < 0:
            return self.power(-j).conj().T
        if j not in self._powers:
            self._powers[0] = np.eye(self.N, dtype=complex)
            top = max(p for p in self._powers if p <= j)
            current = self._powers[top]
            for p in range(top + 1, j + 1):
                current = self.matrix @ current
                self._powers[p] = current
        return self._powers[j]

    def unitarity_residual(self, n: int = 1) -> float:
        mn = self.power(n)
        return float(np.abs(mn @ mn.conj().T - np.eye(self.N)).max())

    def apply(self, psi: StateVector) -> StateVector:
        return StateVector(psi.spec, self.matrix @ psi.amplitudes)


def build_cat_matrix(hmap: HyperbolicMap, spec: HilbertSpec) -> QuantumCatMap:
    r"""Kernel of the quantized map ``gamma = [[a, b], [c, d]]``,

    .. math::

        M_{jk} = N^{-1/2} \exp\left(\frac{2\pi i}{N}
            (2b)^{-1} (a k^2 - 2 j k + d j^2)\right)

    with the inverse of ``2b`` taken modulo ``N``. For ``[[2, 1], [3, 2]]``
    this is ``exp(2 pi i (k^2 - kj + j^2)/N) / sqrt(N)``.

    Raises
    ------
    UnsupportedN
        if ``b = 0`` or ``gcd(2b, N) != 1``.
    UnitarityFailure
        if the assembled kernel is not unitary to ``1e-8``.
    """
    N = spec.N
    (a, b), (_, d) = hmap.entries
    if not kernel_admissible(hmap, N):
        raise UnsupportedN(f"no kernel for {hmap.entries} at N = {N}: need gcd(2b, N) = 1")
    if N == 1:
        return QuantumCatMap(spec, hmap, np.ones((1, 1), dtype=complex))
    s = pow((2 * b) % N, -1, N)
    idx = np.arange(N, dtype=np.int64)
    j, k = np.meshgrid(idx, idx, indexing="ij")
    quad = ((a % N) * (k * k % N) - 2 * (j * k % N) + (d % N) * (j * j % N)) % N
    exponent = (s * quad) % N
    matrix = np.exp(2j * np.pi * exponent / N) / np.sqrt(N)
    qcm = QuantumCatMap(spec, hmap, matrix)
    residual = qcm.unitarity_residual()
    if residual >= UNITARITY_TOL:
        raise UnitarityFailure(f"kernel at N = {N} has unitarity residual {residual:.2e}")
    log.debug(f"Built M_N at N = {N}, unitarity residual {residual:.2e}.")
    return qcm


def propagated_operator(qcm: QuantumCatMap, op: np.ndarray, j: int) -> np.ndarray:
    """``M**(-j) op M**j``."""
    if j == 0:
        return op
    return qcm.power(-j) @ op @ qcm.power(j)


def egorov_defect(
    qcm: QuantumCatMap, a: TorusSymbol, max_cutoff: int = DEFAULT_MAX_CUTOFF
) -> float:
    """``||M^-1 Op_N(a) M - Op_N(a o gamma)||``, zero up to rounding."""
    return iterated_egorov_defect(qcm, a, 1, max_cutoff)


def iterated_egorov_defect(
    qcm: QuantumCatMap, a: TorusSymbol, n: int, max_cutoff: int = DEFAULT_MAX_CUTOFF
) -> float:
    propagated = compose_with_map(a, qcm.map, n, max_cutoff)
    lhs = propagated_operator(qcm, op_matrix(a, qcm.spec), n)
    return spectral_norm(lhs - op_matrix(propagated, qcm.spec))


def _clusters(phases: np.ndarray, gap: float) -> list:
    """Group sorted phases in ``[0, 2 pi)`` whose neighbours are closer than
    ``gap``, including across the branch cut."""
    breaks = np.flatnonzero(np.diff(phases) >= gap) + 1
    groups = [list(g) for g in np.split(np.arange(len(phases)), breaks)]
    if len(groups) > 1 and phases[0] + 2 * np.pi - phases[-1] < gap:
        groups[0] = groups.pop() + groups[0]
    return groups


def window_indices(N: int, alpha1: float, alpha2: float) -> np.ndarray:
    """Indices ``ceil(alpha1 N) .. floor(alpha2 N)``, clipped to ``N - 1``."""
    lo = int(np.ceil(alpha1 * N - 1e-9))
    hi = min(int(np.floor(alpha2 * N + 1e-9)), N - 1)
    return np.arange(lo, hi + 1)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    pivots = np.argmax(np.abs(vectors) > np.abs(vectors).max(axis=0) * (1 - 1e-9), axis=0)
    entries = vectors[pivots, np.arange(vectors.shape[1])]
    return vectors * (np.abs(entries) / entries)


@dataclass(eq=False)
class SpectralData:
    """Eigenvalues and an H_N-orthonormal eigenbasis, stored as the columns of
    ``eigenvectors``. ``clusters`` lists the column indices of each
    degenerate eigenspace."""

    spec: HilbertSpec
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: list
    basis_mode: str = "deterministic"

    def states(self) -> list:
        return [StateVector(self.spec, v) for v in self.eigenvectors.T]

    def gram_residual(self) -> float:
        gram = self.eigenvectors.conj().T @ self.eigenvectors / self.spec.N
        return float(np.abs(gram - np.eye(self.spec.N)).max())

    def reconstruction_residual(self, matrix: np.ndarray) -> float:
        V = self.eigenvectors / np.sqrt(self.spec.N)
        return float(np.abs(matrix - (V * self.eigenvalues) @ V.conj().T).max())

    def degeneracy(self) -> pd.DataFrame:
        """One row per eigenspace: its eigenphase and multiplicity."""
        phases = np.angle(self.eigenvalues) % (2 * np.pi)
        return pd.DataFrame(
            [
                {"phase": float(phases[c[0]]), "multiplicity": len(c)}
                for c in self.clusters
            ]
        )


def eigendecompose(
    qcm: QuantumCatMap,
    basis_mode: str = "deterministic",
    window: tuple = DEFAULT_WINDOW,
    rng: np.random.Generator = None,
) -> SpectralData:
    """Unitary diagonalization by a complex Schur decomposition.

    Eigenvalues closer than ``1e-8`` in phase form a cluster. In
    ``deterministic`` mode the basis of each cluster diagonalizes the
    restriction of the window projector, so it contains the state of least
    window mass in that eigenspace; ``randomized`` mode rotates each cluster
    of dimension at least two by a Haar-random unitary drawn from ``rng``.
    Each vector is then phased so its largest entry is real positive.

    Raises
    ------
    ConvergenceFailure
        if the Schur decomposition fails.
    """
    if basis_mode not in ("deterministic", "randomized"):
        raise InputError(f"unknown basis mode {basis_mode!r}")
    N = qcm.N
    try:
        T, Z = scipy.linalg.schur(qcm.matrix, output="complex")
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceFailure(f"Schur decomposition failed at N = {N}: {e}")
    eigenvalues = np.diag(T).copy()
    phases = np.angle(eigenvalues) % (2 * np.pi)
    order = np.argsort(phases, kind="stable")
    eigenvalues, phases, Z = eigenvalues[order], phases[order], Z[:, order]
    clusters = _clusters(phases, CLUSTER_GAP)

    inside = np.zeros(N)
    inside[window_indices(N, *window)] = 1.0
    for c in clusters:
        if len(c) < 2:
            continue
        Vc = Z[:, c]
        gram = Vc.conj().T @ (inside[:, None] * Vc)
        _, rot = scipy.linalg.eigh(gram)
        Z[:, c] = Vc @ rot
    if len(clusters) < N:
        log.debug(f"N = {N}: {N - len(clusters)} degenerate directions in {len(clusters)} clusters.")
    spectral = SpectralData(qcm.spec, eigenvalues, _fix_phases(Z) * np.sqrt(N), clusters)
    if basis_mode == "randomized":
        return randomize_clusters(spectral, rng if rng is not None else np.random.default_rng())
    return spectral


def randomize_clusters(spectral: SpectralData, rng: np.random.Generator) -> SpectralData:
    """Another eigenbasis of the same operator: every cluster of dimension at
    least two is rotated by a Haar-random unitary."""
    vectors = spectral.eigenvectors.copy()
    for c in spectral.clusters:
        if len(c) < 2:
            continue
        rot = scipy.stats.unitary_group.rvs(len(c), random_state=rng)
        vectors[:, c] = vectors[:, c] @ rot
    return SpectralData(
        spectral.spec,
        spectral.eigenvalues,
        _fix_phases(vectors),
        spectral.clusters,
        "randomized",
    )


def quantum_period(qcm: QuantumCatMap, P_max: int) -> int:
    """Least ``P <= P_max`` with ``M**P`` a unimodular multiple of the
    identity.

    Raises
    ------
    PeriodNotFound
    """
    if P_max < 1:
        raise InputError(f"P_max must be at least 1, got {P_max}")
    eye = np.eye(qcm.N)
    current = qcm.matrix
    for P in range(1, P_max + 1):
        zeta = current[0, 0]
        if abs(abs(zeta) - 1) <= PERIOD_TOL and np.abs(current - zeta * eye).max() <= PERIOD_TOL:
            log.info(f"Quantum period {P} at N = {qcm.N}, M^P = {zeta:.6f} Id.")
            return P
        current = qcm.matrix @ current
    raise PeriodNotFound(f"M_N is not scalar for any power up to {P_max} (N = {qcm.N})")


def dump_matrix(matrix: np.ndarray, path) -> None:
    """Binary dump: ``QCM1``, little-endian u64 ``N``, then the row-major
    matrix as interleaved f64 re/im."""
    N = matrix.shape[0]
    if matrix.shape != (N, N):
        raise InputError("only square matrices can be dumped")
    with open(path, "wb") as stream:
        stream.write(MAGIC + struct.pack("<Q", N))
        stream.write(np.ascontiguousarray(matrix, dtype="<c16").tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as stream:
        data = stream.read()
    if data[:4] != MAGIC:
        raise InputError(f"{path} is not a QCM1 matrix dump")
    (N,) = struct.unpack_from("<Q", data, 4)
    if len(data) != 12 + 16 * N * N:
        raise InputError(f"{path} is truncated")
    return np.frombuffer(data, dtype="<c16", offset=12).reshape(N, N).astype(complex)


def dump_spectrum(spectral: SpectralData, stem) -> None:
    """Eigenvalues and degeneracies to ``<stem>.json``, eigenvectors (as
    columns) to ``<stem>.bin`` in the matrix dump format."""
    record = {
        "N": spectral.spec.N,
        "basis_mode": spectral.basis_mode,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in spectral.eigenvalues],
        "degeneracy": spectral.degeneracy().to_dict(orient="records"),
    }
    with open(f"{stem}.json", "w") as stream:
        json.dump(record, stream, indent=2)
    dump_matrix(spectral.eigenvectors, f"{stem}.bin")
