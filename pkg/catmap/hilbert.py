# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
r"""
hilbert.py

The N-dimensional quantum state space of the torus, its 1/N-weighted inner
product and the Weyl-Heisenberg translations.

Translations follow the convention

.. math::

    (T_{l/N} \psi)_k = e^{i\pi l_1 l_2/N} e^{2\pi i l_2 (k - l_1)/N}
        \psi_{(k - l_1) \bmod N}

which gives the commutation relation
:math:`T_{(1,0)/N} T_{(0,1)/N} = e^{-2\pi i/N} T_{(0,1)/N} T_{(1,0)/N}`.
"""
from dataclasses import dataclass
import json
import logging
import struct

import numpy as np

from catmap.utils import InputError

log = logging.getLogger(__name__)


class DimensionMismatch(InputError):
    pass


class UnsupportedTwist(InputError):
    pass


@dataclass(frozen=True)
class HilbertSpec:
    """Dimension ``N`` of the untwisted state space with ``h = 1/(2 pi N)``."""

    N: int
    kappa: tuple = (0, 0)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InputError(f"N must be a positive integer, got {self.N}")
        if tuple(self.kappa) != (0, 0):
            raise UnsupportedTwist("only the untwisted space kappa = 0 is implemented")

    @property
    def h(self) -> float:
        return 1 / (2 * np.pi * self.N)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Element of H_N stored as its N amplitudes."""

    spec: HilbertSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.spec.N,):
            raise DimensionMismatch(
                f"expected {self.spec.N} amplitudes, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def N(self) -> int:
        return self.spec.N

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def normalized(self) -> "StateVector":
        norm = self.norm()
        if norm == 0:
            raise InputError("cannot normalize the zero vector")
        return StateVector(self.spec, self.amplitudes / norm)

    @classmethod
    def coordinate(cls, N: int, j: int) -> "StateVector":
        """``sqrt(N) e_j``, which has unit norm in H_N."""
        amps = np.zeros(N, dtype=complex)
        amps[j % N] = np.sqrt(N)
        return cls(HilbertSpec(N), amps)

    @classmethod
    def uniform(cls, N: int) -> "StateVector":
        return cls(HilbertSpec(N), np.ones(N, dtype=complex))

    @classmethod
    def random(cls, N: int, rng: np.random.Generator) -> "StateVector":
        """Normalized complex Gaussian vector."""
        amps = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        return cls(HilbertSpec(N), amps).normalized()

    def to_json(self) -> str:
        return json.dumps([[float(z.real), float(z.imag)] for z in self.amplitudes])

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        pairs = np.asarray(json.loads(text), dtype=float).reshape(-1, 2)
        return cls(HilbertSpec(len(pairs)), pairs[:, 0] + 1j * pairs[:, 1])

    def to_bytes(self) -> bytes:
        """Little-endian u64 ``N`` followed by interleaved f64 re/im pairs."""
        body = self.amplitudes.astype("<c16").tobytes()
        return struct.pack("<Q", self.N) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "StateVector":
        (N,) = struct.unpack_from("<Q", data)
        if len(data) != 8 + 16 * N:
            raise DimensionMismatch(f"header says N = {N} but payload has {len(data) - 8} bytes")
        amps = np.frombuffer(data, dtype="<c16", offset=8, count=N)
        return cls(HilbertSpec(N), amps.astype(complex))


def _check_same_space(f: StateVector, g: StateVector) -> None:
    if f.spec != g.spec:
        raise DimensionMismatch(f"states live in H_{f.N} and H_{g.N}")


def inner_product(f: StateVector, g: StateVector) -> complex:
    """(1/N) sum_j f_j conj(g_j)."""
    _check_same_space(f, g)
    return complex(np.vdot(g.amplitudes, f.amplitudes) / f.N)


def translation_phases(l, N: int) -> np.ndarray:
    """The phases multiplying the shifted amplitudes of ``T_{l/N}``, indexed
    by the output index k. Exponents are reduced mod 2N in integer arithmetic
    so that large ``l`` loses no precision."""
    l1, l2 = int(l[0]), int(l[1])
    k = np.arange(N, dtype=np.int64)
    m = (l2 % (2 * N)) * ((2 * k - l1) % (2 * N)) % (2 * N)
    return np.exp(1j * np.pi * m / N)


def translation_apply(l, psi: StateVector) -> StateVector:
    """Apply ``T_{l/N}`` to ``psi`` for an integer 2-vector ``l``."""
    N = psi.N
    shifted = np.roll(psi.amplitudes, int(l[0]) % N)
    return StateVector(psi.spec, translation_phases(l, N) * shifted)


def translation_matrix(l, spec: HilbertSpec) -> np.ndarray:
    """Dense N x N matrix of ``T_{l/N}``; column j is ``T_{l/N} e_j``."""
    N = spec.N
    k = np.arange(N)
    mat = np.zeros((N, N), dtype=complex)
    mat[k, (k - int(l[0])) % N] = translation_phases(l, N)
    return mat
