# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
fup.py

Porosity of finite unions of intervals, the propagated supports whose
porosity drives the decay of uncontrolled words, and the discrete fractal
uncertainty principle: norms of the inverse DFT localized to porous residue
sets, with power-law fits in N.
"""
from dataclasses import dataclass, field
from itertools import product
import json
import logging

import numpy as np
import pandas as pd
import scipy.linalg

from catmap.classical import HyperbolicMap, KappaTooLarge, LatticeCell, reduce_mod_one
from catmap.quantize import PartitionPair, smoothstep
from catmap.utils import InputError, InsufficientData, Multiprocessing, loglog_fit

log = logging.getLogger(__name__)

SCALE_RATIO = 1.1
NU_STEP = 1e-3
GAP_TOL = 1e-12


class DegenerateScales(InputError):
    pass


class BadDigits(InputError):
    pass


class EmptySet(InputError):
    pass


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of closed intervals, stored sorted, disjoint and merged."""

    intervals: tuple = ()

    def __post_init__(self):
        pieces = sorted((float(a), float(b)) for a, b in self.intervals)
        merged = []
        for a, b in pieces:
            if a > b:
                raise InputError(f"interval [{a}, {b}] has its endpoints reversed")
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def contains(self, x: float) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo <= hi:
                    out.append((lo, hi))
        return IntervalSet(tuple(out))

    def gaps(self) -> list:
        """Bounded open gaps between consecutive intervals."""
        return [(b, a) for (_, b), (a, _) in zip(self.intervals, self.intervals[1:])]

    def to_json(self) -> str:
        return json.dumps({"intervals": [list(i) for i in self.intervals]})

    @classmethod
    def from_json(cls, text: str) -> "IntervalSet":
        return cls(tuple(tuple(i) for i in json.loads(text)["intervals"]))


@dataclass(frozen=True)
class PorosityQuery:
    nu: float
    tau0: float
    tau1: float

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise InputError(f"nu must lie in (0, 1), got {self.nu}")
        if self.tau0 <= 0 or self.tau0 > self.tau1:
            raise DegenerateScales(f"scales [{self.tau0}, {self.tau1}] are degenerate")


@dataclass
class PorosityResult:
    passed: bool
    nu: float
    certified_nu: float
    min_ratio: float
    witness: tuple = None
    scales: list = field(default_factory=list, repr=False)

    def __bool__(self):
        return self.passed


def scale_grid(tau0: float, tau1: float, ratio: float = SCALE_RATIO) -> np.ndarray:
    """``tau1 * ratio**-i`` down to ``tau0``, with ``tau0`` itself included."""
    if tau0 <= 0 or tau0 > tau1:
        raise DegenerateScales(f"scales [{tau0}, {tau1}] are degenerate")
    n = int(np.floor(np.log(tau1 / tau0) / np.log(ratio) + 1e-12))
    scales = tau1 * ratio ** -np.arange(n + 1)
    if scales[-1] > tau0 * (1 + 1e-12):
        scales = np.append(scales, tau0)
    return scales


def _complement_gaps(omega: IntervalSet) -> tuple:
    starts = np.array([-np.inf] + [b for _, b in omega.intervals])
    ends = np.array([a for a, _ in omega.intervals] + [np.inf])
    return starts, ends


def _largest_gap(starts, ends, x, L):
    """Length of the longest piece of the complement inside ``[x, x + L]``
    for each entry of ``x``."""
    x = np.asarray(x, dtype=float)[..., None]
    overlap = np.minimum(ends, x + L) - np.maximum(starts, x)
    return np.clip(overlap, 0, None).max(axis=-1)


def _min_gap_at_scale(omega: IntervalSet, L: float) -> tuple:
    """Exact minimum over window positions of the largest gap in a window of
    length ``L``, and a minimizing position.

    Each gap contributes a piecewise linear function of the position with
    slopes in ``{-1, 0, 1}`` and breakpoints at its endpoints and their
    translates by ``-L``. Between consecutive breakpoints the maximum is
    convex, so its minimum sits at a breakpoint or where the steepest
    decreasing and increasing pieces cross.
    """
    starts, ends = _complement_gaps(omega)
    ends_fin = np.array([a for a, _ in omega.intervals])
    starts_fin = np.array([b for _, b in omega.intervals])
    lo, hi = ends_fin[0] - L, starts_fin[-1]
    candidates = np.concatenate([ends_fin, ends_fin - L, starts_fin, starts_fin - L, [lo, hi]])
    candidates = np.unique(candidates[(candidates >= lo) & (candidates <= hi)])
    values = _largest_gap(starts, ends, candidates, L)
    best = int(values.argmin())
    best_x, best_g = candidates[best], values[best]
    if len(candidates) > 1:
        p, q = candidates[:-1], candidates[1:]
        vp = np.clip(np.minimum(ends, p[:, None] + L) - np.maximum(starts, p[:, None]), 0, None)
        vq = np.clip(np.minimum(ends, q[:, None] + L) - np.maximum(starts, q[:, None]), 0, None)
        slope = np.round((vq - vp) / (q - p)[:, None])
        down = np.where(slope < 0, vp, -np.inf).max(axis=1)
        up = np.where(slope > 0, vp, -np.inf).max(axis=1)
        with np.errstate(invalid="ignore"):
            shift = (down - up) / 2
        ok = np.isfinite(shift) & (shift > 0) & (shift < q - p)
        if ok.any():
            cross = p[ok] + shift[ok]
            cross_vals = _largest_gap(starts, ends, cross, L)
            i = int(cross_vals.argmin())
            if cross_vals[i] < best_g:
                best_x, best_g = cross[i], cross_vals[i]
    return float(best_g), float(best_x)


def porosity_profile(omega: IntervalSet, tau0: float, tau1: float, ratio: float = SCALE_RATIO):
    """Smallest ``largest gap / |I|`` over every window ``I`` whose length is
    on the scale grid, with the worst window ``(x, L)``."""
    scales = scale_grid(tau0, tau1, ratio)
    if omega.is_empty:
        return 1.0, None, scales
    worst, witness = np.inf, None
    for L in scales:
        g, x = _min_gap_at_scale(omega, L)
        if g / L < worst:
            worst, witness = g / L, (x, float(L))
    return float(worst), witness, scales


def porosity_check(omega: IntervalSet, query: PorosityQuery, ratio: float = SCALE_RATIO):
    """Whether every window with length on the scale grid
    ``tau1 * ratio**-i`` in ``[tau0, tau1]`` contains a gap of length at least
    ``nu |I|``.

    Passing certifies porosity with constant ``nu / ratio`` at every scale in
    ``[tau0, tau1]``, which is reported as ``certified_nu``. A failure
    carries a violating window ``(x, L)`` as witness.
    """
    ratio_min, witness, scales = porosity_profile(omega, query.tau0, query.tau1, ratio)
    passed = ratio_min >= query.nu - GAP_TOL
    return PorosityResult(
        passed=passed,
        nu=query.nu,
        certified_nu=query.nu / ratio,
        min_ratio=ratio_min,
        witness=None if passed else witness,
        scales=list(scales),
    )


def max_porosity(omega: IntervalSet, tau0: float, tau1: float) -> float:
    """Largest ``nu`` on a ``1e-3`` grid for which ``porosity_check`` passes,
    zero when none does."""
    ratio_min, _, _ = porosity_profile(omega, tau0, tau1)
    steps = int(np.floor((ratio_min + GAP_TOL) / NU_STEP))
    return min(steps * NU_STEP, 1 - NU_STEP)


def cantor_set(base: int, digits, level: int) -> tuple:
    """Level-``level`` iterate of the Cantor set keeping ``digits`` in base
    ``base``.

    Returns
    -------
    tuple
        ``(IntervalSet, residues)`` where ``residues`` are the allowed
        elements of ``Z_{base**level}``.
    """
    digits = sorted(set(int(d) for d in digits))
    if base < 3 or not digits or len(digits) >= base or digits[0] < 0 or digits[-1] >= base:
        raise BadDigits(f"digits {digits} are not a proper nonempty subset of range({base})")
    if level < 0:
        raise InputError(f"level must be non-negative, got {level}")
    residues = np.zeros(1, dtype=np.int64)
    for _ in range(level):
        residues = (base * residues[:, None] + np.array(digits)[None, :]).ravel()
    residues = np.sort(residues)
    width = float(base) ** -level
    omega = IntervalSet(tuple((r * width, (r + 1) * width) for r in residues))
    return omega, residues


def parse_family(text: str) -> list:
    """``cantor:<base>:<digits>:<k or k0-k1>`` into ``(base, digits, k)``
    triples."""
    parts = text.split(":")
    if len(parts) != 4 or parts[0] != "cantor":
        raise InputError(f"unrecognised set family {text!r}")
    base = int(parts[1])
    digits = [int(c) for c in parts[2]]
    if "-" in parts[3]:
        k0, k1 = (int(x) for x in parts[3].split("-"))
    else:
        k0 = k1 = int(parts[3])
    if k0 > k1:
        raise InputError(f"empty level range in {text!r}")
    return [(base, digits, k) for k in range(k0, k1 + 1)]


def cyclic_distance(X, N: int) -> np.ndarray:
    """Distance in ``Z_N`` from every residue to the set ``X``."""
    X = np.asarray(X, dtype=np.int64)
    k = np.arange(N)
    diff = np.abs(k[:, None] - X[None, :]) % N
    return np.minimum(diff, N - diff).min(axis=1)


def thicken(X, s: float, N: int) -> np.ndarray:
    """Residues at cyclic distance less than ``s`` from ``X``."""
    return np.flatnonzero(cyclic_distance(X, N) < s)


def _idft_block(rows, cols, N) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    phase = np.outer(rows, cols) % N
    return np.exp(2j * np.pi * phase / N) / np.sqrt(N)


def dft_localization_norm(X, Y, N: int, smooth: float = None) -> float:
    """Largest singular value of ``1_Y F^-1 1_X`` for the unitary inverse DFT
    on ``Z_N``.

    With ``smooth = s`` the indicators become the weights
    ``max(0, 1 - dist/s)``, which are supported on the ``s``-thickened sets
    and bounded by their indicators.

    Raises
    ------
    EmptySet
    """
    X = np.unique(np.asarray(X, dtype=np.int64) % N)
    Y = np.unique(np.asarray(Y, dtype=np.int64) % N)
    if X.size == 0 or Y.size == 0:
        raise EmptySet("localization sets must be nonempty")
    if smooth is None:
        block = _idft_block(Y, X, N)
    else:
        if smooth <= 0:
            raise InputError(f"smoothing width must be positive, got {smooth}")
        wx = np.clip(1 - cyclic_distance(X, N) / smooth, 0, 1)
        wy = np.clip(1 - cyclic_distance(Y, N) / smooth, 0, 1)
        cols, rows = np.flatnonzero(wx), np.flatnonzero(wy)
        block = wy[rows][:, None] * _idft_block(rows, cols, N) * wx[cols][None, :]
    return float(scipy.linalg.svdvals(block)[0])


@dataclass
class FupResult:
    N_values: list
    norms: list
    beta_hat: float
    r_squared: float

    def as_dict(self) -> dict:
        return {
            "N_values": [int(n) for n in self.N_values],
            "norms": [float(x) for x in self.norms],
            "beta_hat": self.beta_hat,
            "r_squared": self.r_squared,
        }


def fit_beta(results) -> FupResult:
    """OLS slope of ``-log(norm)`` against ``log N``.

    Raises
    ------
    InsufficientData
        with fewer than three points or a nonpositive norm.
    """
    results = list(results)
    if len(results) < 3:
        raise InsufficientData(f"fitting beta needs three points, got {len(results)}")
    N_values, norms = zip(*results)
    slope, _, r2 = loglog_fit(N_values, norms)
    return FupResult(list(N_values), list(norms), -slope, r2)


def _fup_row(args) -> dict:
    base, digits, k, smooth = args
    _, residues = cantor_set(base, digits, k)
    N = base**k
    row = {
        "k": k,
        "N": N,
        "X_size": len(residues),
        "Y_size": len(residues),
        "norm": dft_localization_norm(residues, residues, N),
        "volume_bound": float(np.sqrt(len(residues) ** 2 / N)),
    }
    if smooth is not None:
        thick = thicken(residues, smooth, N)
        row["norm_smooth"] = dft_localization_norm(residues, residues, N, smooth)
        row["norm_thickened"] = dft_localization_norm(thick, thick, N)
    return row


def fup_scan(family: list, smooth: float = None, n_workers: int = 1) -> pd.DataFrame:
    """Localization norms for every member ``(base, digits, k)`` of
    ``family`` with ``X = Y`` the discrete Cantor set in ``Z_{base**k}``."""

    def generator():
        for base, digits, k in family:
            yield (base, digits, k, smooth)

    return pd.DataFrame(Multiprocessing(_fup_row, generator, n_workers, desc="fup").ordered())


@dataclass(eq=False)
class GridFunction:
    """Samples ``values[i, j]`` at ``(y[i], eta[j])``."""

    values: np.ndarray
    y: np.ndarray
    eta: np.ndarray

    @property
    def step(self) -> tuple:
        return (self.y[1] - self.y[0], self.eta[1] - self.eta[0])


def _check_kappa(cell: LatticeCell, kappa: float) -> None:
    width = 1 / max(np.linalg.norm(cell.P), np.linalg.norm(cell.Pprime))
    if kappa <= 0:
        raise InputError(f"kappa must be positive, got {kappa}")
    if kappa >= width / 2:
        raise KappaTooLarge(f"kappa = {kappa} leaves no interior in a cell of width {width:.4f}")


def _cell_grid(cell: LatticeCell, kappa: float, resolution: int) -> tuple:
    v = cell.vertices
    lo, hi = v.min(axis=0) - kappa, v.max(axis=0) + kappa
    y = lo[0] + (np.arange(resolution) + 0.5) * (hi[0] - lo[0]) / resolution
    eta = lo[1] + (np.arange(resolution) + 0.5) * (hi[1] - lo[1]) / resolution
    return y, eta, (lo, hi)


def _edge_profile(s, sigma):
    return smoothstep((s + sigma) / (2 * sigma)) - smoothstep((s - 1 + sigma) / (2 * sigma))


def cutoff_values(cell: LatticeCell, kappa: float, points) -> np.ndarray:
    """Smoothed indicator of the cell at ``points`` (shape ``(..., 2)``).

    In cell coordinates ``(s, t)`` it is ``chi(s) chi(t)`` with ``chi`` rising
    from 0 at ``-sigma`` to 1 at ``sigma`` and falling back across
    ``1 -+ sigma``, ``sigma = kappa / (2 (|P| + |P'|))``. Integer translates
    of ``chi`` sum to one, so lattice translates of the cutoff do too, and the
    support lies within ``kappa / 2`` of the cell.
    """
    sigma = kappa / (2 * (np.linalg.norm(cell.P) + np.linalg.norm(cell.Pprime)))
    st = cell.cell_coordinates(points)
    return _edge_profile(st[..., 0], sigma) * _edge_profile(st[..., 1], sigma)


def cell_cutoff(cell: LatticeCell, kappa: float, resolution: int) -> GridFunction:
    """The smoothed cell indicator sampled at the centres of a
    ``resolution x resolution`` grid over the bounding box of the
    ``kappa``-thickened cell.

    Raises
    ------
    KappaTooLarge
    """
    _check_kappa(cell, kappa)
    y, eta, _ = _cell_grid(cell, kappa, resolution)
    pts = np.stack(np.meshgrid(y, eta, indexing="ij"), axis=-1)
    return GridFunction(cutoff_values(cell, kappa, pts), y, eta)


def cutoff_translate_residual(cell: LatticeCell, kappa: float, resolution: int) -> float:
    """Sup over the grid of ``|sum_m cutoff(z - lattice point m) - 1|``."""
    _check_kappa(cell, kappa)
    y, eta, _ = _cell_grid(cell, kappa, resolution)
    pts = np.stack(np.meshgrid(y, eta, indexing="ij"), axis=-1)
    st = cell.cell_coordinates(pts)
    total = np.zeros(pts.shape[:2])
    i_range = range(int(np.floor(st[..., 0].min())) - 1, int(np.ceil(st[..., 0].max())) + 2)
    j_range = range(int(np.floor(st[..., 1].min())) - 1, int(np.ceil(st[..., 1].max())) + 2)
    for i, j in product(i_range, j_range):
        shifted = pts - (i * cell.P + j * cell.Pprime)
        total += cutoff_values(cell, kappa, shifted)
    return float(np.abs(total - 1).max())


def propagated_support(
    partition: PartitionPair,
    hmap: HyperbolicMap,
    cell: LatticeCell,
    w,
    side: str,
    kappa: float,
    resolution: int,
) -> GridFunction:
    """``prod_k a_{w_k}(gamma^k iota z) * cutoff(z)`` on the cell grid, with
    ``k = 1..n`` on the plus side and ``k = -n+1..0`` on the minus side for a
    word of length ``n``."""
    if side not in ("plus", "minus"):
        raise InputError(f"side must be 'plus' or 'minus', got {side!r}")
    _check_kappa(cell, kappa)
    letters = tuple(w.letters) if hasattr(w, "letters") else tuple(w)
    n = len(letters)
    times = range(1, n + 1) if side == "plus" else range(-n + 1, 1)
    y, eta, _ = _cell_grid(cell, kappa, resolution)
    pts = np.stack(np.meshgrid(y, eta, indexing="ij"), axis=-1)
    values = cutoff_values(cell, kappa, pts)
    for k, letter in zip(times, letters):
        frame = np.array(hmap.power(k), dtype=float) @ hmap.iota
        torus = reduce_mod_one(pts @ frame.T)
        values = values * partition.exact(letter)(torus[..., 0], torus[..., 1])
    return GridFunction(values, y, eta)


def support_projection(
    partition: PartitionPair,
    hmap: HyperbolicMap,
    cell: LatticeCell,
    w,
    side: str,
    kappa: float,
    resolution: int,
    threshold: float = 1e-6,
) -> IntervalSet:
    """Projection of the rasterized support of the propagated word symbol
    onto the ``y`` axis (plus side) or the ``eta`` axis (minus side), as a
    union of grid cells.

    Rasterization only sees grid centres, so the result can miss thin parts
    of the true support.
    """
    grid = propagated_support(partition, hmap, cell, w, side, kappa, resolution)
    mask = grid.values > threshold
    if side == "plus":
        hit, axis, h = mask.any(axis=1), grid.y, grid.step[0]
    else:
        hit, axis, h = mask.any(axis=0), grid.eta, grid.step[1]
    return IntervalSet(tuple((c - h / 2, c + h / 2) for c in axis[hit]))


def _support_row(args) -> dict:
    partition, hmap, cell, letters, kappa, resolution, threshold, index = args
    row = {"word_id": index, "word": "".join(map(str, letters))}
    for side in ("plus", "minus"):
        omega = support_projection(partition, hmap, cell, letters, side, kappa, resolution, threshold)
        tau0 = 4 * (cell.ell_y if side == "plus" else cell.ell_eta) / resolution
        row[f"{side}_measure"] = omega.measure()
        row[f"{side}_intervals"] = len(omega)
        row[f"{side}_max_porosity"] = max_porosity(omega, tau0, 1.0)
        row[f"{side}_scale_floor"] = tau0
    return row


def support_porosity_scan(
    partition: PartitionPair,
    hmap: HyperbolicMap,
    cell: LatticeCell,
    word_length: int,
    n_words: int,
    kappa: float,
    resolution: int,
    threshold: float = 1e-6,
    seed: int = 0,
    n_workers: int = 1,
) -> pd.DataFrame:
    """Maximal porosity of both projections of the propagated support for
    ``n_words`` random words of length ``word_length``, at scales from four
    grid cells up to one."""
    rng = np.random.default_rng(seed)
    words = [tuple(int(x) for x in rng.integers(1, 3, size=word_length)) for _ in range(n_words)]

    def generator():
        for i, letters in enumerate(words):
            yield (partition, hmap, cell, letters, kappa, resolution, threshold, i)

    rows = Multiprocessing(_support_row, generator, n_workers, desc="porosity").ordered()
    return pd.DataFrame(rows)
