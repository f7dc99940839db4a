# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
words.py

Word operators built from a two-element partition of unity, the control
function and the split of long words into controlled and uncontrolled
classes, and scans of their operator norms over N.

A word ``w = w_0 w_1 ... w_{n-1}`` with letters in ``{1, 2}`` is quantized as

    A_w = A_{w_{n-1}}(n-1) ... A_{w_1}(1) A_{w_0}(0),   A_e(j) = M^-j Op_N(a_e) M^j

which telescopes to ``M^-(n-1) Op(a_{w_{n-1}}) M ... M Op(a_{w_0})``.
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import floor
import logging

import numpy as np
import pandas as pd

from catmap.classical import HyperbolicMap
from catmap.hilbert import HilbertSpec, StateVector
from catmap.observables import c1_proxy, column_norms, min_resolvent_defect
from catmap.propagator import QuantumCatMap, build_cat_matrix, eigendecompose
from catmap.quantize import PartitionPair, TorusSymbol, op_matrix
from catmap.utils import InputError, Multiprocessing, loglog_fit, spectral_norm

log = logging.getLogger(__name__)

BLOCKS = 8
MAX_WORD_LENGTH = 128


class EmptyWord(InputError):
    pass


@dataclass(frozen=True)
class Word:
    letters: tuple

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x not in (1, 2) for x in letters):
            raise InputError(f"letters must be 1 or 2, got {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(map(str, self.letters))

    @classmethod
    def parse(cls, text: str) -> "Word":
        return cls(tuple(int(c) for c in text))

    def blocks(self, T: int) -> list:
        return [Word(self.letters[i : i + T]) for i in range(0, len(self), T)]


def all_words(n: int):
    """Every word of length ``n`` in lexicographic order."""
    for letters in product((1, 2), repeat=n):
        yield Word(letters)


def control_value(w: Word) -> Fraction:
    """Fraction of letters equal to 1."""
    if not len(w):
        raise EmptyWord("the control function is undefined on the empty word")
    return Fraction(w.letters.count(1), len(w))


@dataclass(frozen=True)
class WordSchedule:
    """Block length ``T``, the long-word length ``8T`` built from it, and
    the control threshold ``delta``."""

    T: int
    delta: float
    rho: float = None

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise InputError(f"T must be a positive integer, got {self.T}")
        if not 0 <= self.delta <= 1:
            raise InputError(f"delta must lie in [0, 1], got {self.delta}")
        if self.rho is not None and not 0 < self.rho < 1:
            raise InputError(f"rho must lie in (0, 1), got {self.rho}")

    @property
    def Tprime(self) -> int:
        return 4 * self.T

    @property
    def word_length(self) -> int:
        return BLOCKS * self.T

    @classmethod
    def from_N(cls, hmap: HyperbolicMap, N: int, rho: float, delta: float) -> "WordSchedule":
        """``T = floor(rho log(2 pi N) / (4 log |lambda_u|))``, clamped to 1."""
        T = floor(rho * np.log(2 * np.pi * N) / (4 * np.log(hmap.expansion)))
        log_msg = f"Schedule at N = {N}, rho = {rho}: T = {T}."
        if T < 1:
            log.warning(log_msg + " Clamping T to 1.")
            T = 1
        else:
            log.info(log_msg)
        return cls(T, delta, rho)


@dataclass(frozen=True)
class WordClassification:
    """Controlled words ``Z`` of length ``T``; the uncontrolled class ``X`` of
    length-``8T`` words whose every block avoids ``Z`` is kept implicit."""

    schedule: WordSchedule
    Z: frozenset

    @property
    def T(self) -> int:
        return self.schedule.T

    def complement(self) -> list:
        return [w for w in all_words(self.T) if w not in self.Z]

    @property
    def n_X(self) -> int:
        return (2**self.T - len(self.Z)) ** BLOCKS

    @property
    def n_Y(self) -> int:
        return 2 ** (BLOCKS * self.T) - self.n_X

    def in_X(self, w: Word) -> bool:
        if len(w) != BLOCKS * self.T:
            return False
        return all(b not in self.Z for b in w.blocks(self.T))

    def iter_X(self):
        """Lazily enumerate ``X``."""
        for blocks in product(self.complement(), repeat=BLOCKS):
            yield Word(sum((b.letters for b in blocks), ()))

    def random_X(self, rng: np.random.Generator) -> Word:
        comp = self.complement()
        if not comp:
            raise InputError("X is empty: every block is controlled")
        picks = rng.integers(0, len(comp), size=BLOCKS)
        return Word(sum((comp[i].letters for i in picks), ()))


def classify_words(schedule: WordSchedule) -> WordClassification:
    """``Z = {w of length T : F(w) >= delta}``."""
    Z = frozenset(w for w in all_words(schedule.T) if control_value(w) >= schedule.delta)
    log.debug(f"T = {schedule.T}, delta = {schedule.delta}: #Z = {len(Z)}.")
    return WordClassification(schedule, Z)


def ladel_delta(beta: float) -> float:
    """The threshold ``(3 beta / 16)**2`` tied to a decay exponent ``beta``."""
    return (3 * beta / 16) ** 2


def letter_operators(partition: PartitionPair, spec: HilbertSpec) -> dict:
    return {1: op_matrix(partition.a1, spec), 2: op_matrix(partition.a2, spec)}


def word_operator(
    partition: PartitionPair, qcm: QuantumCatMap, w: Word, ops: dict = None
) -> np.ndarray:
    """The ordered product ``A_w``; the empty word gives the identity."""
    if not len(w):
        return np.eye(qcm.N, dtype=complex)
    if ops is None:
        ops = letter_operators(partition, qcm.spec)
    acc = ops[w.letters[0]]
    for letter in w.letters[1:]:
        acc = ops[letter] @ (qcm.matrix @ acc)
    return qcm.power(-(len(w) - 1)) @ acc


def word_sum(
    partition: PartitionPair, qcm: QuantumCatMap, words, ops: dict = None
) -> np.ndarray:
    """``sum A_w`` over ``words`` of a common length, sharing prefix
    products between words."""
    words = sorted(set(words), key=lambda w: w.letters)
    if not words:
        return np.zeros((qcm.N, qcm.N), dtype=complex)
    n = len(words[0])
    if any(len(w) != n for w in words):
        raise InputError("words in a class sum must share their length")
    if n == 0:
        return np.eye(qcm.N, dtype=complex)
    if ops is None:
        ops = letter_operators(partition, qcm.spec)
    total = np.zeros((qcm.N, qcm.N), dtype=complex)

    def visit(depth, acc, group):
        nonlocal total
        if depth == n:
            total = total + acc
            return
        stepped = qcm.matrix @ acc
        for letter in (1, 2):
            sub = [w for w in group if w.letters[depth] == letter]
            if sub:
                visit(depth + 1, ops[letter] @ stepped, sub)

    for letter in (1, 2):
        sub = [w for w in words if w.letters[0] == letter]
        if sub:
            visit(1, ops[letter], sub)
    return qcm.power(-(n - 1)) @ total


def telescoping_defect(partition: PartitionPair, qcm: QuantumCatMap, n: int) -> float:
    """``||sum over all words of length n of A_w - Id||``."""
    total = word_sum(partition, qcm, all_words(n))
    return spectral_norm(total - np.eye(qcm.N))


def class_operator_Z(
    partition: PartitionPair, qcm: QuantumCatMap, classification: WordClassification, ops=None
) -> np.ndarray:
    return word_sum(partition, qcm, classification.Z, ops)


def class_operator_X(
    partition: PartitionPair, qcm: QuantumCatMap, classification: WordClassification, ops=None
) -> np.ndarray:
    """``A_X`` computed blockwise. With ``B = Id - A_Z`` the sum over the
    uncontrolled class factorizes as ``M^-7T B (M^T B)^7``."""
    T = classification.T
    B = np.eye(qcm.N) - class_operator_Z(partition, qcm, classification, ops)
    step = qcm.power(T)
    acc = B
    for _ in range(BLOCKS - 1):
        acc = B @ (step @ acc)
    return qcm.power(-(BLOCKS - 1) * T) @ acc


def class_operator_Y(
    partition: PartitionPair, qcm: QuantumCatMap, classification: WordClassification, ops=None
) -> np.ndarray:
    return np.eye(qcm.N) - class_operator_X(partition, qcm, classification, ops)


def _class_norms_at_N(args) -> dict:
    partition, hmap, schedule, N, n_random_words, seed = args
    qcm = build_cat_matrix(hmap, HilbertSpec(N))
    ops = letter_operators(partition, qcm.spec)
    classification = classify_words(schedule)
    length = schedule.word_length
    all2 = Word((2,) * length)
    op_norms = {e: spectral_norm(ops[e]) for e in (1, 2)}
    row = {
        "N": N,
        "all2_norm": spectral_norm(word_operator(partition, qcm, all2, ops)),
        "all2_bound": op_norms[2] ** length,
        "Z_norm": spectral_norm(class_operator_Z(partition, qcm, classification, ops)),
        "Z_word_max": max(
            (spectral_norm(word_operator(partition, qcm, w, ops)) for w in classification.Z),
            default=0.0,
        ),
        "n_Z": len(classification.Z),
    }
    if classification.complement():
        row["X_norm"] = spectral_norm(class_operator_X(partition, qcm, classification, ops))
    rng = np.random.default_rng([seed, N])
    for i in range(n_random_words if classification.complement() else 0):
        w = classification.random_X(rng)
        bound = np.prod([op_norms[e] for e in w.letters])
        row[f"random_X_{i}"] = spectral_norm(word_operator(partition, qcm, w, ops))
        row[f"random_X_{i}_bound"] = float(bound)
    return row


def class_norm_scan(
    partition: PartitionPair,
    hmap: HyperbolicMap,
    schedule: WordSchedule,
    N_list,
    n_random_words: int = 0,
    seed: int = 0,
    n_workers: int = 1,
) -> pd.DataFrame:
    """Per-N operator norms of the all-2 word of length ``8T``, of ``A_Z``
    and its largest single-word term, of ``A_X``, and of ``n_random_words``
    sampled uncontrolled words, each with its submultiplicative bound
    ``prod ||Op_N(a_{w_j})||``."""
    if schedule.word_length > MAX_WORD_LENGTH:
        raise InputError(f"words of length {schedule.word_length} exceed {MAX_WORD_LENGTH}")
    N_list = list(N_list)

    def generator():
        for N in N_list:
            yield (partition, hmap, schedule, N, n_random_words, seed)

    rows = Multiprocessing(_class_norms_at_N, generator, n_workers, desc="words").ordered()
    return pd.DataFrame(rows)


def fit_word_decay(frame: pd.DataFrame, column: str = "all2_norm") -> dict:
    """``beta_hat = -slope`` of ``log norm`` against ``log N`` with the
    matching threshold ``(3 beta_hat / 16)**2``."""
    slope, intercept, r2 = loglog_fit(frame["N"], frame[column])
    beta = -slope
    delta = ladel_delta(beta)
    log.info(f"Fitted beta = {beta:.4f} (R^2 = {r2:.3f}); matching delta = {delta:.3e}.")
    return {"beta_hat": beta, "intercept": intercept, "r_squared": r2, "ladel_delta": delta}


def _main_estimate_at_N(args) -> dict:
    hmap, a, N, n_random_states, seed = args
    spec = HilbertSpec(N)
    qcm = build_cat_matrix(hmap, spec)
    spectral = eigendecompose(qcm)
    C1 = c1_proxy(a, spectral)
    eigen_residual = max(min_resolvent_defect(qcm, phi) for phi in spectral.states())
    op = op_matrix(a, spec)
    rng = np.random.default_rng([seed, N])
    C2 = 0.0
    for _ in range(n_random_states):
        u = StateVector.random(N, rng)
        controlled = column_norms((op @ u.amplitudes)[:, None])[0]
        resolvent = min_resolvent_defect(qcm, u)
        deficit = 1 - C1 * controlled
        if deficit > 0:
            C2 = max(C2, deficit / (np.log(N) * resolvent)) if resolvent > 0 else float("inf")
    return {"N": N, "C1_proxy": C1, "C2_hat": C2, "eigen_resolvent_max": eigen_residual}


def main_estimate_probe(
    partition: PartitionPair,
    hmap: HyperbolicMap,
    a: TorusSymbol,
    N_list,
    n_random_states: int = 50,
    seed: int = 0,
    n_workers: int = 1,
) -> pd.DataFrame:
    """Empirical constants of ``||u|| <= C1 ||Op_N(a) u|| + C2 log N
    min_z ||(M - z) u||``.

    ``C1_proxy`` is ``1 / min_j ||Op_N(a) phi_j||`` over an eigenbasis, where
    the resolvent term vanishes. ``C2_hat`` is the smallest ``C2`` making the
    inequality hold with ``C1 = C1_proxy`` for ``n_random_states`` random unit
    vectors, with ``z`` ranging over the unit circle.

    With ``a = None`` the probe runs on ``partition.a1``.
    """
    N_list = list(N_list)
    if a is None:
        if partition is None:
            raise InputError("main_estimate_probe needs a symbol or a partition")
        a = partition.a1

    def generator():
        for N in N_list:
            yield (hmap, a, N, n_random_states, seed)

    rows = Multiprocessing(_main_estimate_at_N, generator, n_workers, desc="estimate").ordered()
    return pd.DataFrame(rows)
