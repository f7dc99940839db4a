# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
config.py

Module to parse runcards
"""
from fractions import Fraction
import logging
import platform

from reportengine.report import Config
from reportengine.configparser import ConfigError

from catmap.classical import NAMED_MAPS, parse_map_literal, shortest_cell_basis
from catmap.fup import PorosityQuery, cantor_set, parse_family
from catmap.quantize import (
    NAMED_SYMBOLS,
    PARTITION_L_MAX,
    STANDARD_K1,
    STANDARD_K2,
    STANDARD_SUPP,
    Ball,
    bump_symbol,
    build_partition,
    cosine,
    named_symbol,
)
from catmap.utils import InputError, n_workers_from_env
from catmap.words import WordSchedule, classify_words

log = logging.getLogger(__name__)

DEFAULT_BUMP = {"center": [0.5, 0.5], "radius": 0.2, "L_max": 24}
DEFAULT_SCHEDULE = {"T": 2, "delta": 0.5, "rho": 0.5}
DEFAULT_FUP_FAMILY = "cantor:3:02:3-7"
BASIS_MODES = ("deterministic", "randomized")


def parse_range(text: str) -> list:
    """``"start:stop:step"`` with ``stop`` included."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"expected start:stop[:step], got {text!r}")
    start, stop = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    if step < 1 or stop < start:
        raise ValueError(f"empty range {text!r}")
    return list(range(start, stop + 1, step))


def _ball(spec: dict, name: str) -> Ball:
    try:
        return Ball.from_dict(spec)
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{name} must be a mapping with 'center' and 'radius', got {spec}")


def symbol_from_spec(spec):
    """Named symbol or a sum of cosines over a list of modes."""
    if isinstance(spec, str):
        return named_symbol(spec)
    total = None
    for l in spec:
        term = cosine(tuple(l))
        total = term if total is None else total + term
    return total


class ConfigParser(Config):
    """Extend the reportengine Config class for catmap-specific
    objects
    """

    def parse_cat_map(self, spec: (str, list, dict)):
        """The hyperbolic map ``gamma``: a name, a 2x2 integer list or a
        mapping with key ``matrix``."""
        literal = isinstance(spec, str) and spec.lstrip().startswith(("[", "{"))
        if isinstance(spec, str) and not literal and spec not in NAMED_MAPS:
            raise ConfigError(f"Unknown map {spec}", spec, NAMED_MAPS.keys())
        try:
            return parse_map_literal(spec)
        except InputError as e:
            raise ConfigError(f"Invalid cat_map {spec}: {e}")

    def parse_n_values(self, values: (int, list, str)) -> list:
        """Hilbert space dimensions: an integer, a list or ``start:stop:step``."""
        if isinstance(values, str):
            try:
                values = parse_range(values)
            except ValueError as e:
                raise ConfigError(str(e))
        elif isinstance(values, int):
            values = [values]
        if not values or any(not isinstance(n, int) or n < 1 for n in values):
            raise ConfigError(f"n_values must be positive integers, got {values}")
        return list(values)

    def parse_window(self, window: (list, str)) -> tuple:
        """The position window ``[alpha1, alpha2]`` of the delocalization scan."""
        if isinstance(window, str):
            window = window.split(",")
        try:
            alpha1, alpha2 = (float(x) for x in window)
        except (TypeError, ValueError):
            raise ConfigError(f"window must be two numbers, got {window}")
        if not 0 <= alpha1 < alpha2 <= 1:
            raise ConfigError(f"window must satisfy 0 <= alpha1 < alpha2 <= 1, got {window}")
        return (alpha1, alpha2)

    def parse_basis_mode(self, mode: str) -> str:
        """How degenerate eigenspaces are given a basis."""
        if mode not in BASIS_MODES:
            raise ConfigError(f"Invalid basis mode {mode}", mode, BASIS_MODES)
        return mode

    def parse_n_rotations(self, n: int) -> int:
        """Haar-random rotations of each degenerate cluster in randomized mode."""
        if n < 1:
            raise ConfigError("n_rotations must be at least 1")
        return n

    def parse_partition(self, spec: dict) -> dict:
        """Balls ``K1``, ``K2`` and ``supp_bound`` of the partition of unity,
        each ``{center, radius}``, and the cutoff ``L_max``."""
        unknown = set(spec) - {"K1", "K2", "supp_bound", "L_max"}
        if unknown:
            raise ConfigError(
                f"Unknown partition keys {sorted(unknown)}",
                unknown.pop(),
                ["K1", "K2", "supp_bound", "L_max"],
            )
        return spec

    def produce_partition_pair(self, partition: dict = None):
        """The smooth partition of unity ``a1 + a2 = 1``."""
        partition = partition or {}
        try:
            return build_partition(
                K1=_ball(partition["K1"], "K1") if "K1" in partition else STANDARD_K1,
                K2=_ball(partition["K2"], "K2") if "K2" in partition else STANDARD_K2,
                supp_bound=(
                    _ball(partition["supp_bound"], "supp_bound")
                    if "supp_bound" in partition
                    else STANDARD_SUPP
                ),
                L_max=int(partition.get("L_max", PARTITION_L_MAX)),
            )
        except InputError as e:
            raise ConfigError(f"Invalid partition: {e}")

    def parse_bump(self, spec: dict) -> dict:
        """Bump ``{center, radius, L_max}`` used for the ``C1`` proxy."""
        _ball(spec, "bump")
        return spec

    def produce_bump_symbol(self, bump: dict = None):
        bump = {**DEFAULT_BUMP, **(bump or {})}
        try:
            return bump_symbol(bump["center"], float(bump["radius"]), int(bump["L_max"]))
        except InputError as e:
            raise ConfigError(f"Invalid bump: {e}")

    def parse_probe_symbol(self, spec: (str, list)):
        """A named symbol or a list of modes ``[l1, l2]`` whose cosines are
        summed."""
        if isinstance(spec, str):
            if spec not in NAMED_SYMBOLS:
                raise ConfigError(f"Unknown symbol {spec}", spec, NAMED_SYMBOLS.keys())
            return spec
        try:
            return [(int(l1), int(l2)) for l1, l2 in spec]
        except (TypeError, ValueError):
            raise ConfigError(f"probe_symbol modes must be pairs of integers, got {spec}")

    def produce_observable(self, probe_symbol="cos_y"):
        """The symbol whose quantization is probed."""
        return symbol_from_spec(probe_symbol)

    def parse_schedule(self, spec: dict) -> dict:
        """Word schedule ``{T, delta, rho}``; ``T: auto`` derives ``T`` from
        the largest ``N`` and ``rho``."""
        spec = {**DEFAULT_SCHEDULE, **spec}
        if spec["T"] != "auto" and (not isinstance(spec["T"], int) or spec["T"] < 1):
            raise ConfigError(f"schedule T must be a positive integer or 'auto', got {spec['T']}")
        if not 0 <= spec["delta"] <= 1:
            raise ConfigError(f"schedule delta must lie in [0, 1], got {spec['delta']}")
        return spec

    def produce_word_schedule(self, cat_map, n_values: list, schedule: dict = None):
        """The block length ``T`` and control threshold ``delta``."""
        spec = {**DEFAULT_SCHEDULE, **(schedule or {})}
        if spec["T"] == "auto":
            return WordSchedule.from_N(cat_map, max(n_values), spec["rho"], spec["delta"])
        return WordSchedule(spec["T"], spec["delta"], spec["rho"])

    def produce_word_classification(self, word_schedule):
        return classify_words(word_schedule)

    def parse_word_lengths(self, lengths: list) -> list:
        """Word lengths at which the telescoping identity is checked."""
        if any(not isinstance(n, int) or n < 0 for n in lengths):
            raise ConfigError(f"word_lengths must be non-negative integers, got {lengths}")
        return lengths

    def parse_n_random_words(self, n: int) -> int:
        if n < 0:
            raise ConfigError("n_random_words must be non-negative")
        return n

    def parse_fup_family(self, text: str) -> str:
        """Discrete Cantor family ``cantor:<base>:<digits>:<k or k0-k1>``."""
        try:
            for base, digits, _ in parse_family(text):
                cantor_set(base, digits, 0)
        except (InputError, ValueError) as e:
            raise ConfigError(f"Invalid fup_family {text}: {e}")
        return text

    def produce_fup_members(self, fup_family: str = DEFAULT_FUP_FAMILY) -> list:
        """The ``(base, digits, k)`` members of the family."""
        return parse_family(fup_family)

    def parse_smooth_width(self, width: (int, float, type(None))):
        """Width of the triangular weights of the smoothed FUP norm."""
        if width is not None and width <= 0:
            raise ConfigError("smooth_width must be positive")
        return width

    def parse_nu(self, nu: (int, float, str)) -> float:
        """Porosity constant, a number or a fraction such as ``1/9``."""
        try:
            nu = float(Fraction(nu)) if isinstance(nu, str) else float(nu)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"nu must be a number, got {nu}")
        if not 0 < nu < 1:
            raise ConfigError(f"nu must lie in (0, 1), got {nu}")
        return nu

    def parse_scales(self, scales: list) -> tuple:
        """Scale range ``[tau0, tau1]`` of the porosity query."""
        try:
            tau0, tau1 = (float(Fraction(x)) if isinstance(x, str) else float(x) for x in scales)
        except (TypeError, ValueError):
            raise ConfigError(f"scales must be two numbers, got {scales}")
        return (tau0, tau1)

    def produce_porosity_query(self, nu: float = 1 / 9, scales: tuple = (3.0**-5, 1.0)):
        try:
            return PorosityQuery(nu, *scales)
        except InputError as e:
            raise ConfigError(f"Invalid porosity query: {e}")

    def parse_support_words(self, n: int) -> int:
        """Number of random words whose propagated supports are measured."""
        if n < 1:
            raise ConfigError("support_words must be at least 1")
        return n

    def parse_word_length(self, n: int) -> int:
        if n < 0:
            raise ConfigError("word_length must be non-negative")
        return n

    def parse_resolution(self, n: int) -> int:
        if n < 16:
            raise ConfigError("resolution must be at least 16")
        return n

    def parse_threshold(self, value: (int, float)) -> float:
        if value <= 0:
            raise ConfigError("threshold must be positive")
        return float(value)

    def parse_kappa(self, kappa: (int, float)) -> float:
        """Thickening of the fundamental cell."""
        if kappa <= 0:
            raise ConfigError("kappa must be positive")
        return float(kappa)

    def produce_lattice_cell(self, cat_map, kappa: float = 0.05):
        """The fundamental cell of the lattice ``iota^-1 Z^2``."""
        try:
            return shortest_cell_basis(cat_map, kappa)
        except InputError as e:
            raise ConfigError(str(e))

    def parse_mode_max(self, n: int) -> int:
        """Largest ``|l|_inf`` of the Fourier modes in the Egorov sweep."""
        if n < 0:
            raise ConfigError("mode_max must be non-negative")
        return n

    def parse_powers(self, n: int) -> int:
        """Egorov defects are computed for ``gamma**1 .. gamma**powers``."""
        if n < 1:
            raise ConfigError("powers must be at least 1")
        return n

    def parse_max_cutoff(self, n: int) -> int:
        if n < 1:
            raise ConfigError("max_cutoff must be positive")
        return n

    def parse_p_max(self, n: int) -> int:
        """Upper bound of the quantum period search."""
        if n < 1:
            raise ConfigError("p_max must be positive")
        return n

    def parse_state_index(self, index: int) -> int:
        if index < 0:
            raise ConfigError("state_index must be non-negative")
        return index

    def parse_wigner_cutoff(self, cutoff: int) -> int:
        if cutoff < 0:
            raise ConfigError("wigner_cutoff must be non-negative")
        return cutoff

    def parse_husimi_resolution(self, res: (int, type(None))):
        """Side of the Husimi grid; ``None`` skips the Husimi output."""
        if res is not None and res < 16:
            raise ConfigError("husimi_resolution must be at least 16")
        return res

    def parse_n_random_states(self, n: int) -> int:
        if n < 0:
            raise ConfigError("n_random_states must be non-negative")
        return n

    def parse_seed(self, seed: int) -> int:
        """Base seed from which every random draw is derived."""
        # numpy is actually this strict but let's keep it sensible.
        if (seed < 0) or (seed > 2**32):
            raise ConfigError("Seed is outside of appropriate range: [0, 2 ** 32]")
        return seed

    def parse_threads(self, threads: (int, type(None))):
        if threads is not None and threads < 1:
            raise ConfigError("threads must be at least 1")
        return threads

    def produce_use_multiprocessing(self) -> bool:
        """Don't use Python multiprocessing on MacOS"""
        if platform.system() == "Darwin":
            return False
        return True

    def produce_n_workers(self, use_multiprocessing: bool, threads=None) -> int:
        """Worker processes: ``threads``, then ``CATMAP_THREADS``, then the
        core count."""
        try:
            n = n_workers_from_env(threads, use_multiprocessing)
        except InputError as e:
            raise ConfigError(str(e))
        log.debug(f"Using {n} worker process(es).")
        return n
