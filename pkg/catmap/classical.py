# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
classical.py

Hyperbolic toral automorphisms in the theta group: validation, eigensystems,
the unimodular frame that diagonalises the map, fundamental lattice cells and
probes of the unstable horocycle flow.

Points of the torus are pairs ``(y, eta)`` reduced modulo one. Maps act on
column vectors, so ``gamma @ (y, eta)`` is the image of a point.
"""
from dataclasses import dataclass, field
from math import ceil, isqrt, sqrt
import json
import logging

import numpy as np

from catmap.utils import InputError, NumericalFailure

log = logging.getLogger(__name__)

# The Degli-Esposti example
GAMMA_DE = ((2, 1), (3, 2))

NAMED_MAPS = {
    "DE": GAMMA_DE,
    "DE_T": ((2, 3), (1, 2)),
}

DIAG_TOL = 1e-10
UNIMODULAR_TOL = 1e-12


class NotUnimodular(InputError):
    pass


class NotInGamma2(InputError):
    pass


class NotHyperbolic(InputError):
    pass


class KappaTooLarge(InputError):
    pass


class OrbitCoverNotFound(NumericalFailure):
    pass


def _matmul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def integer_power(entries, n: int) -> tuple:
    """Exact power of a unimodular integer matrix; negative ``n`` uses the
    integer inverse."""
    (a, b), (c, d) = entries
    if n < 0:
        entries = ((d, -b), (-c, a))
        n = -n
    result = ((1, 0), (0, 1))
    base = tuple(tuple(row) for row in entries)
    while n:
        if n & 1:
            result = _matmul(result, base)
        base = _matmul(base, base)
        n >>= 1
    return result


@dataclass(eq=False)
class HyperbolicMap:
    """A hyperbolic element of the theta group together with its eigendata.

    ``iota`` sends the standard basis to the unstable and stable eigenlines,
    so that ``iota_inv @ gamma @ iota = diag(lambda_u, lambda_s)``.
    ``lambda_u`` carries the sign of the trace.
    """

    entries: tuple
    lambda_u: float
    lambda_s: float
    m_u: float
    m_s: float
    v_u: np.ndarray
    v_s: np.ndarray
    iota: np.ndarray
    iota_inv: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def trace(self) -> int:
        return self.entries[0][0] + self.entries[1][1]

    @property
    def expansion(self) -> float:
        """|lambda_u|, the expansion rate along the unstable direction."""
        return abs(self.lambda_u)

    def power(self, n: int) -> tuple:
        return integer_power(self.entries, n)

    def power_array(self, n: int) -> np.ndarray:
        p = self.power(n)
        if max(abs(x) for row in p for x in row) >= 2 ** 62:
            raise OverflowError(f"entries of gamma^{n} do not fit in int64")
        return np.array(p, dtype=np.int64)

    def diagonalization_residual(self) -> float:
        diag = np.diag([self.lambda_u, self.lambda_s])
        return float(np.abs(self.iota_inv @ self.matrix @ self.iota - diag).max())

    def as_dict(self) -> dict:
        return {
            "matrix": [list(row) for row in self.entries],
            "lambda_u": self.lambda_u,
            "lambda_s": self.lambda_s,
            "m_u": self.m_u,
            "m_s": self.m_s,
            "v_u": self.v_u.tolist(),
            "v_s": self.v_s.tolist(),
            "iota": self.iota.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps({"matrix": [list(row) for row in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> "HyperbolicMap":
        return validate_map(json.loads(text)["matrix"])


def _as_integer_entries(entries) -> tuple:
    arr = np.asarray(entries)
    if arr.shape != (2, 2):
        raise InputError(f"a map is a 2x2 integer matrix, got shape {arr.shape}")
    out = []
    for row in entries:
        new_row = []
        for x in row:
            if isinstance(x, (bool, np.bool_)) or float(x) != int(x):
                raise InputError(f"map entries must be integers, got {x!r}")
            new_row.append(int(x))
        out.append(tuple(new_row))
    return tuple(out)


def validate_map(entries) -> HyperbolicMap:
    """Check that ``entries`` is a hyperbolic element of the theta group and
    compute its eigensystem and diagonalising frame.

    Parameters
    ----------
    entries
        2x2 integer matrix ``[[a11, a12], [a21, a22]]``.

    Returns
    -------
    HyperbolicMap

    Raises
    ------
    NotUnimodular
        determinant is not one.
    NotInGamma2
        ``a11*a12`` or ``a21*a22`` is odd.
    NotHyperbolic
        ``|trace| <= 2``.

    Notes
    -----
    Inside the theta group a unimodular matrix cannot have odd trace, so a
    hyperbolic map automatically satisfies ``|trace| >= 4`` and
    ``|lambda_u| >= 2 + sqrt(3)``.

    The eigen-slopes are quadratic irrationals exactly when ``trace**2 - 4``
    is not a perfect square, which holds for every ``|trace| > 2``; this is
    checked with integer arithmetic rather than by rational approximation.
    """
    ent = _as_integer_entries(entries)
    (a11, a12), (a21, a22) = ent
    det = a11 * a22 - a12 * a21
    if det != 1:
        raise NotUnimodular(f"determinant of {ent} is {det}, expected 1")
    if (a11 * a12) % 2 or (a21 * a22) % 2:
        raise NotInGamma2(f"{ent} fails the parity conditions a11*a12 = a21*a22 = 0 mod 2")
    tr = a11 + a22
    if abs(tr) <= 2:
        raise NotHyperbolic(f"{ent} has trace {tr}, |trace| must exceed 2")
    disc = tr * tr - 4
    if isqrt(disc) ** 2 == disc:
        raise NotHyperbolic(f"{ent} has rational eigenvalues")

    sign = 1 if tr > 0 else -1
    lambda_u = (tr + sign * sqrt(disc)) / 2
    lambda_s = 1 / lambda_u
    # hyperbolicity forces a12 != 0
    m_u = (lambda_u - a11) / a12
    m_s = (lambda_s - a11) / a12
    delta = m_u - m_s
    s = -1.0 if delta > 0 else 1.0
    norm = sqrt(abs(delta))
    iota = np.array([[1.0, s], [m_u, s * m_s]]) / norm
    iota_inv = np.array([[s * m_s, -s], [-m_u, 1.0]]) / norm

    v_u = iota[:, 0] / np.linalg.norm(iota[:, 0])
    v_s = iota[:, 1] / np.linalg.norm(iota[:, 1])

    hmap = HyperbolicMap(
        entries=ent,
        lambda_u=lambda_u,
        lambda_s=lambda_s,
        m_u=m_u,
        m_s=m_s,
        v_u=v_u,
        v_s=v_s,
        iota=iota,
        iota_inv=iota_inv,
    )
    residual = hmap.diagonalization_residual()
    if residual > DIAG_TOL * max(1.0, abs(lambda_u)):
        raise NumericalFailure(f"frame does not diagonalise {ent}: residual {residual:.2e}")
    if abs(np.linalg.det(iota) - 1) > UNIMODULAR_TOL * max(1.0, abs(lambda_u)):
        raise NumericalFailure(f"frame of {ent} is not unimodular")
    return hmap


def parse_map_literal(spec) -> HyperbolicMap:
    """Accepts a name from ``NAMED_MAPS``, a 2x2 list, a ``{"matrix": ...}``
    mapping or a JSON string of either."""
    if isinstance(spec, str):
        if spec in NAMED_MAPS:
            return validate_map(NAMED_MAPS[spec])
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError:
            raise InputError(
                f"unknown map {spec!r}, expected one of {list(NAMED_MAPS)} or a matrix"
            )
    if isinstance(spec, dict):
        if "matrix" not in spec:
            raise InputError("map mapping must have a 'matrix' key")
        spec = spec["matrix"]
    return validate_map(spec)


def reduce_mod_one(points: np.ndarray) -> np.ndarray:
    out = np.mod(points, 1.0)
    # np.mod can round tiny negative values up to exactly one
    out[out >= 1.0] = 0.0
    return out


def apply_map(hmap: HyperbolicMap, point, power: int = 1) -> np.ndarray:
    """Image of ``point`` (shape ``(2,)`` or ``(n, 2)``) under ``gamma**power``
    reduced to ``[0, 1)**2``."""
    g = np.array(hmap.power(power), dtype=float)
    pts = np.asarray(point, dtype=float)
    return reduce_mod_one(np.atleast_1d(pts @ g.T))


def torus_distance(points, center) -> np.ndarray:
    """Euclidean distance on the torus between ``points`` (``(..., 2)``)
    and ``center``."""
    diff = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    diff -= np.round(diff)
    return np.hypot(diff[..., 0], diff[..., 1])


def unstable_flow(hmap: HyperbolicMap, point, t) -> np.ndarray:
    """Unstable horocycle flow ``v + t * v_u`` modulo one; ``t`` may be an
    array, in which case the result has shape ``(len(t), 2)``."""
    t = np.asarray(t, dtype=float)
    return reduce_mod_one(np.asarray(point, dtype=float) + t[..., None] * hmap.v_u)


def stable_flow(hmap: HyperbolicMap, point, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return reduce_mod_one(np.asarray(point, dtype=float) + t[..., None] * hmap.v_s)


def ehrenfest_time(hmap: HyperbolicMap, N: int) -> float:
    """log(1/h) / log|lambda_u| with h = 1/(2 pi N)."""
    return float(np.log(2 * np.pi * N) / np.log(hmap.expansion))


def porosity_time_offset(hmap: HyperbolicMap, kappa: float, kappa_prime: float) -> int:
    r"""The integer offset

    .. math::

        k_0 = \left\lceil \frac{\log(4\sqrt{m_u - m_s}(1+\kappa)) - \log(3\kappa')}
        {\log|\lambda_u|} \right\rceil

    after which truncated stable orbits of the cell are shorter than
    ``3 kappa' / 4``. Reported alongside porosity measurements only.
    """
    if kappa <= 0 or kappa_prime <= 0:
        raise InputError("kappa and kappa_prime must be positive")
    num = np.log(4 * sqrt(abs(hmap.m_u - hmap.m_s)) * (1 + kappa)) - np.log(3 * kappa_prime)
    return ceil(num / np.log(hmap.expansion))


def random_gamma2_map(rng: np.random.Generator, max_length: int = 6) -> HyperbolicMap:
    """Random product of ``gamma_DE`` and its transpose of length between one
    and ``max_length``; non-hyperbolic products are rejected and redrawn."""
    generators = (NAMED_MAPS["DE"], NAMED_MAPS["DE_T"])
    while True:
        length = int(rng.integers(1, max_length + 1))
        letters = rng.integers(0, 2, size=length)
        try:
            return word_product_map([generators[i] for i in letters])
        except NotHyperbolic:
            continue


def word_product_map(factors) -> HyperbolicMap:
    """Validated product of a sequence of integer matrices, leftmost first."""
    prod = ((1, 0), (0, 1))
    for f in factors:
        prod = _matmul(prod, _as_integer_entries(f))
    return validate_map(prod)


def extended_gcd(a: int, b: int) -> tuple:
    """Returns ``(g, x, y)`` with ``a*x + b*y = g = gcd(a, b) >= 0``."""
    if a == 0:
        return (abs(b), 0, 1 if b >= 0 else -1)
    g, x1, y1 = extended_gcd(b % a, a)
    return (g, y1 - (b // a) * x1, x1)


@dataclass(eq=False)
class LatticeCell:
    """Fundamental parallelogram ``S0`` of the lattice ``iota_inv Z^2`` spanned
    by ``P = iota_inv (n, m)`` and ``Pprime = iota_inv (k, l)``, thickened by
    ``kappa``."""

    P: np.ndarray
    Pprime: np.ndarray
    integer_coords: tuple
    kappa: float
    ell_y: float
    ell_eta: float
    ell: float
    is_global_shortest: bool = True
    iota_inv: np.ndarray = field(default=None, repr=False)

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.P, self.Pprime])

    @property
    def vertices(self) -> np.ndarray:
        return np.array([np.zeros(2), self.P, self.Pprime, self.P + self.Pprime])

    def cell_coordinates(self, points) -> np.ndarray:
        """Coordinates ``(s, t)`` with ``point = s P + t Pprime``."""
        return np.asarray(points, dtype=float) @ np.linalg.inv(self.basis).T

    def bounding_box(self) -> tuple:
        """``((y_min, y_max), (eta_min, eta_max))`` of the thickened cell."""
        v = self.vertices
        lo = v.min(axis=0) - self.kappa
        hi = v.max(axis=0) + self.kappa
        return (lo[0], hi[0]), (lo[1], hi[1])

    def lattice_point(self, m) -> np.ndarray:
        return self.iota_inv @ np.asarray(m, dtype=float)

    def as_dict(self) -> dict:
        (n, m), (k, l) = self.integer_coords
        return {
            "P": self.P.tolist(),
            "Pprime": self.Pprime.tolist(),
            "nm": [n, m],
            "kl": [k, l],
            "kappa": self.kappa,
            "ell_y": self.ell_y,
            "ell_eta": self.ell_eta,
            "ell": self.ell,
            "is_global_shortest": self.is_global_shortest,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def shortest_cell_basis(hmap: HyperbolicMap, kappa: float) -> LatticeCell:
    """Build the fundamental cell of ``iota_inv Z^2`` on a shortest lattice
    vector.

    ``P`` is the shortest nonzero lattice point inside the ellipse
    ``y**2/4 + eta**2 <= 1``, which has area ``2 pi > 4`` and therefore holds
    one by Minkowski's theorem. Every such point satisfies ``|P| <= 2``, so
    ``(n, m) = iota P`` is bounded by ``2 |iota|``, which sets the brute-force
    box. Ties prefer the vector whose first nonzero integer coordinate is
    positive. ``Pprime`` completes ``(n, m)`` by the extended Euclidean
    algorithm to ``n l - k m = 1``.

    Raises
    ------
    KappaTooLarge
        when the ``kappa`` thickening leaves no interior, i.e. ``kappa`` is at
        least half the smallest width of the parallelogram.
    """
    if kappa <= 0:
        raise InputError(f"kappa must be positive, got {kappa}")
    bound = ceil(2 * np.linalg.norm(hmap.iota, 2)) + 1
    rng = np.arange(-bound, bound + 1)
    n, m = (x.ravel() for x in np.meshgrid(rng, rng, indexing="ij"))
    nonzero = (n != 0) | (m != 0)
    n, m = n[nonzero], m[nonzero]
    pts = (hmap.iota_inv @ np.stack([n, m]).astype(float)).T
    norms = np.hypot(pts[:, 0], pts[:, 1])
    in_ellipse = pts[:, 0] ** 2 / 4 + pts[:, 1] ** 2 <= 1 + 1e-12

    best = norms[in_ellipse].min()
    tied = np.flatnonzero(in_ellipse & (norms <= best * (1 + 1e-12)))

    def preference(i):
        first = n[i] if n[i] != 0 else m[i]
        return (0 if first > 0 else 1, n[i], m[i])

    i = min(tied, key=preference)
    n0, m0 = int(n[i]), int(m[i])
    is_global = bool(best <= norms.min() * (1 + 1e-12))
    if not is_global:
        log.info("Shortest lattice vector lies outside the Minkowski ellipse.")

    g, x, y = extended_gcd(n0, m0)
    if g != 1:
        raise NumericalFailure(f"shortest vector ({n0}, {m0}) is not primitive")
    k0, l0 = -y, x
    P = hmap.iota_inv @ np.array([n0, m0], dtype=float)
    Pprime = hmap.iota_inv @ np.array([k0, l0], dtype=float)

    det = P[0] * Pprime[1] - P[1] * Pprime[0]
    if abs(abs(det) - 1) > UNIMODULAR_TOL * 10:
        raise NumericalFailure(f"cell is not unimodular: det {det}")

    width = 1 / max(np.linalg.norm(P), np.linalg.norm(Pprime))
    if kappa >= width / 2:
        raise KappaTooLarge(
            f"kappa = {kappa} leaves no interior in a cell of width {width:.4f}"
        )

    v = np.array([np.zeros(2), P, Pprime, P + Pprime])
    ell_y = float(np.ptp(v[:, 0]) + 2 * kappa)
    ell_eta = float(np.ptp(v[:, 1]) + 2 * kappa)
    return LatticeCell(
        P=P,
        Pprime=Pprime,
        integer_coords=((n0, m0), (k0, l0)),
        kappa=kappa,
        ell_y=ell_y,
        ell_eta=ell_eta,
        ell=max(ell_y, ell_eta),
        is_global_shortest=is_global,
        iota_inv=hmap.iota_inv,
    )


def _start_grid(n_start: int) -> np.ndarray:
    side = np.arange(n_start) / n_start
    y, eta = np.meshgrid(side, side, indexing="ij")
    return np.column_stack([y.ravel(), eta.ravel()])


def _longest_runs(inside: np.ndarray) -> np.ndarray:
    """Longest run of ``True`` along the last axis, per row."""
    idx = np.arange(inside.shape[-1])
    last_false = np.maximum.accumulate(np.where(~inside, idx, -1), axis=-1)
    return (idx - last_false).max(axis=-1)


def _orbits_pass(hmap, starts, centers, radius, L, ell, dt, chunk=256) -> bool:
    s = np.arange(0.0, L + dt / 2, dt)
    need = int(np.ceil(ell / dt - 1e-9)) + 1
    for i in range(0, len(starts), chunk):
        pts = reduce_mod_one(
            starts[i : i + chunk, None, :] + s[None, :, None] * hmap.v_u[None, None, :]
        )
        for c in centers:
            inside = torus_distance(pts, c) <= radius
            if np.any(_longest_runs(inside) < need):
                return False
    return True


def unstable_orbit_cover(
    hmap: HyperbolicMap,
    K1_center,
    K2_center,
    radius: float,
    L_max: float,
    ell: float = None,
    n_start: int = 100,
    dt: float = 1e-3,
    refinements: int = 6,
) -> dict:
    """Smallest orbit length ``L`` such that every sampled unstable orbit of
    length ``L`` contains sub-orbits of length ``ell`` inside both balls
    ``B(center, radius / 4)``.

    ``L`` starts at ``ell`` and doubles until the test passes, then is refined
    by ``refinements`` bisection steps. Start points form an ``n_start`` by
    ``n_start`` grid and orbits are sampled every ``dt``; the result is
    certified only at that resolution, which is reported.

    Raises
    ------
    OrbitCoverNotFound
        if no ``L <= L_max`` passes.
    """
    if radius <= 0:
        raise InputError("radius must be positive")
    r = radius / 4
    if ell is None:
        ell = r
    centers = (np.asarray(K1_center, float), np.asarray(K2_center, float))
    starts = _start_grid(n_start)

    def passes(L):
        return _orbits_pass(hmap, starts, centers, r, L, ell, dt)

    hi = ell
    while not passes(hi):
        if hi >= L_max:
            raise OrbitCoverNotFound(
                f"no orbit length up to {L_max} covers both balls of radius {r}"
            )
        hi = min(2 * hi, L_max)
    lo = hi / 2 if hi > ell else hi
    if lo < hi:
        for _ in range(refinements):
            mid = (lo + hi) / 2
            if passes(mid):
                hi = mid
            else:
                lo = mid
    log.info(f"Unstable orbits of length {hi:.4f} cover both balls (ell = {ell}).")
    return {
        "L": float(hi),
        "ell": float(ell),
        "radius": float(r),
        "n_start": n_start**2,
        "dt": dt,
    }


def orbit_density_length(
    hmap: HyperbolicMap, start, targets, eps: float, L_max: float, dt: float = 1e-3
) -> float:
    """Shortest length ``L`` such that the unstable orbit of ``start`` passes
    within ``eps`` of every target, sampled every ``dt``.

    Raises
    ------
    OrbitCoverNotFound
        if some target is not reached within ``L_max``.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    first_hit = np.full(len(targets), np.inf)
    block = 20000
    t0 = 0.0
    while t0 <= L_max and np.isinf(first_hit).any():
        t = t0 + dt * np.arange(block)
        t = t[t <= L_max]
        pts = unstable_flow(hmap, start, t)
        for j in np.flatnonzero(np.isinf(first_hit)):
            hits = np.flatnonzero(torus_distance(pts, targets[j]) <= eps)
            if hits.size:
                first_hit[j] = t[hits[0]]
        t0 += dt * block
    if np.isinf(first_hit).any():
        raise OrbitCoverNotFound(
            f"{int(np.isinf(first_hit).sum())} targets not reached within L = {L_max}"
        )
    return float(first_hit.max())
