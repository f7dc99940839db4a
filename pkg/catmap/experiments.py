# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
experiments.py

The experiments runnable from the command line. Each ``<name>_experiment``
provider returns an :py:class:`ExperimentResult`: the per-row results table,
a JSON-ready summary and optional grids to be written next to them.
"""
from dataclasses import dataclass, field
import logging

import numpy as np
import pandas as pd

from catmap.checks import (
    check_kernel_admissible,
    check_scale_range,
    check_state_index,
    check_word_schedule,
)
from catmap.classical import ehrenfest_time, porosity_time_offset
from catmap.fup import (
    cantor_set,
    cutoff_translate_residual,
    fit_beta,
    fup_scan,
    porosity_check,
    support_porosity_scan,
)
from catmap.hilbert import HilbertSpec
from catmap.observables import (
    deloc_scan,
    husimi_grid,
    matrix_element,
    qe_scan,
    wigner_table,
    window_masses,
)
from catmap.propagator import (
    DEFAULT_WINDOW,
    build_cat_matrix,
    eigendecompose,
    iterated_egorov_defect,
    quantum_period,
)
from catmap.quantize import (
    DEFAULT_MAX_CUTOFF,
    derivative_growth_probe,
    fourier_mode,
    garding_envelope,
    garding_floor,
    op_matrix,
    single_modes,
)
from catmap.utils import Multiprocessing, loglog_fit, mann_kendall
from catmap.words import (
    class_norm_scan,
    fit_word_decay,
    ladel_delta,
    main_estimate_probe,
    telescoping_defect,
)

log = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    """``table`` becomes ``results.csv``, ``summary`` becomes
    ``summary.json`` and each entry of ``grids`` is written as a PGM image
    and a CSV file under its key."""

    name: str
    table: pd.DataFrame
    summary: dict
    grids: dict = field(default_factory=dict)


def _spectrum_at_N(args) -> dict:
    hmap, N, window, p_max = args
    qcm = build_cat_matrix(hmap, HilbertSpec(N))
    spectral = eigendecompose(qcm, "deterministic", window)
    return {
        "N": N,
        "unitarity_residual": qcm.unitarity_residual(),
        "quantum_period": quantum_period(qcm, p_max),
        "n_clusters": len(spectral.clusters),
        "max_multiplicity": max(len(c) for c in spectral.clusters),
        "gram_residual": spectral.gram_residual(),
        "reconstruction_residual": spectral.reconstruction_residual(qcm.matrix),
        "min_window_mass": float(window_masses(spectral.eigenvectors, *window).min()),
        "ehrenfest_time": ehrenfest_time(hmap, N),
    }


@check_kernel_admissible
def spectrum_experiment(
    cat_map, n_values, window=DEFAULT_WINDOW, p_max: int = 2000, n_workers: int = 1
) -> ExperimentResult:
    """Unitarity, quantum period, eigenspace structure and reconstruction
    residuals of ``M_N`` for each ``N``."""

    def generator():
        for N in n_values:
            yield (cat_map, N, tuple(window), p_max)

    table = pd.DataFrame(
        Multiprocessing(_spectrum_at_N, generator, n_workers, desc="spectrum").ordered()
    )
    summary = {
        "map": cat_map.as_dict(),
        "max_unitarity_residual": float(table["unitarity_residual"].max()),
        "max_reconstruction_residual": float(table["reconstruction_residual"].max()),
        "max_multiplicity": int(table["max_multiplicity"].max()),
    }
    return ExperimentResult("spectrum", table, summary)


@check_kernel_admissible
def deloc_experiment(
    cat_map,
    n_values,
    bump_symbol,
    window=DEFAULT_WINDOW,
    basis_mode: str = "deterministic",
    n_rotations: int = 20,
    seed: int = 0,
    n_workers: int = 1,
) -> ExperimentResult:
    """Minimum window mass over eigenbases along the ``N`` sweep, with the
    ``C1`` proxy of the bump and a Mann-Kendall test for a decreasing
    trend."""
    table = deloc_scan(
        cat_map, window, n_values, basis_mode, bump_symbol, n_rotations, seed, n_workers
    )
    worst = int(table["min_mass"].idxmin())
    summary = {
        "map": cat_map.as_dict(),
        "window": list(window),
        "basis_mode": basis_mode,
        "min_mass": float(table["min_mass"].min()),
        "min_mass_N": int(table["N"][worst]),
        "trend": mann_kendall(table["min_mass"]),
        "c1_proxy_max": float(table["c1_proxy"].max()),
    }
    if "min_mass_randomized" in table:
        summary["min_mass_randomized"] = float(table["min_mass_randomized"].min())
    if summary["trend"]["decreasing"]:
        log.warning("Window mass shows a significant decreasing trend in N.")
    return ExperimentResult("deloc", table, summary)


@check_kernel_admissible
@check_state_index
def wigner_experiment(
    cat_map,
    n_values,
    observable,
    state_index: int = 0,
    wigner_cutoff: int = 8,
    husimi_resolution: int = None,
    window=DEFAULT_WINDOW,
) -> ExperimentResult:
    """Fourier-Wigner coefficients of one eigenvector for each ``N``,
    checked against the direct matrix element of ``observable``."""
    frames, defects, pairing, grids = [], [], [], {}
    for N in n_values:
        spec = HilbertSpec(N)
        qcm = build_cat_matrix(cat_map, spec)
        phi = eigendecompose(qcm, "deterministic", window).states()[state_index]
        data = wigner_table(phi, wigner_cutoff)
        frame = data.to_frame()
        frame.insert(0, "N", N)
        frames.append(frame)
        defects.append(data.hermitian_defect())
        direct = np.vdot(phi.amplitudes, op_matrix(observable, spec) @ phi.amplitudes) / N
        pairing.append(abs(matrix_element(observable, phi) - direct))
        if husimi_resolution is not None:
            grids[f"husimi_N{N}"] = husimi_grid(phi, husimi_resolution)
    summary = {
        "map": cat_map.as_dict(),
        "state_index": state_index,
        "wigner_cutoff": wigner_cutoff,
        "max_hermitian_defect": float(max(defects)),
        "max_pairing_residual": float(max(pairing)),
    }
    return ExperimentResult("wigner", pd.concat(frames, ignore_index=True), summary, grids)


def _egorov_at_N(args) -> list:
    hmap, N, mode_max, powers, max_cutoff = args
    qcm = build_cat_matrix(hmap, HilbertSpec(N))
    rows = []
    for l in single_modes(mode_max):
        for p in range(1, powers + 1):
            defect = iterated_egorov_defect(qcm, fourier_mode(l), p, max_cutoff)
            rows.append({"N": N, "l1": l[0], "l2": l[1], "power": p, "defect": defect})
    return rows


@check_kernel_admissible
def egorov_experiment(
    cat_map,
    n_values,
    partition_pair,
    observable,
    mode_max: int = 8,
    powers: int = 1,
    max_cutoff: int = DEFAULT_MAX_CUTOFF,
    n_workers: int = 1,
) -> ExperimentResult:
    """Exact Egorov defects of single Fourier modes, the sharp Garding floor
    of the partition symbol ``a1`` and the derivative growth of
    ``observable`` under iteration."""

    def generator():
        for N in n_values:
            yield (cat_map, N, mode_max, powers, max_cutoff)

    per_N = Multiprocessing(_egorov_at_N, generator, n_workers, desc="egorov").ordered()
    table = pd.DataFrame([row for rows in per_N for row in rows])
    floors = [garding_floor(partition_pair.a1, HilbertSpec(N)) for N in n_values]
    summary = {
        "map": cat_map.as_dict(),
        "max_defect": float(table["defect"].max()),
        "garding_floors": dict(zip(map(str, n_values), floors)),
        "derivative_growth": [
            derivative_growth_probe(observable, cat_map, t, max_cutoff=max_cutoff)
            for t in range(powers + 1)
        ],
    }
    if len(n_values) > 1 and any(f != 0 for f in floors):
        summary["garding_envelope"] = garding_envelope(n_values, floors)
    return ExperimentResult("egorov", table, summary)


@check_kernel_admissible
@check_word_schedule
def words_experiment(
    cat_map,
    n_values,
    partition_pair,
    word_schedule,
    word_classification,
    word_lengths: list = (2, 4),
    n_random_words: int = 4,
    seed: int = 0,
    n_workers: int = 1,
) -> ExperimentResult:
    """Norms of the all-2 word, the controlled class and sampled
    uncontrolled words, with the telescoping identity checked at each
    ``N``."""
    table = class_norm_scan(
        partition_pair, cat_map, word_schedule, n_values, n_random_words, seed, n_workers
    )
    for n in word_lengths:
        table[f"telescoping_{n}"] = [
            telescoping_defect(partition_pair, build_cat_matrix(cat_map, HilbertSpec(N)), n)
            for N in n_values
        ]
    summary = {
        "map": cat_map.as_dict(),
        "partition": partition_pair.as_dict(),
        "T": word_schedule.T,
        "delta": word_schedule.delta,
        "word_length": word_schedule.word_length,
        "n_Z": len(word_classification.Z),
        "n_X": word_classification.n_X,
        "n_Y": word_classification.n_Y,
        "ladel_delta_at_beta_1": ladel_delta(1.0),
    }
    if len(n_values) > 1 and (table["all2_norm"] > 0).all():
        summary["all2_decay"] = fit_word_decay(table)
    return ExperimentResult("words", table, summary)


def fup_experiment(fup_members, smooth_width: float = None, n_workers: int = 1) -> ExperimentResult:
    """Localized inverse-DFT norms over a Cantor family and the fitted
    decay exponent ``beta``."""
    table = fup_scan(fup_members, smooth_width, n_workers)
    base, digits, _ = fup_members[0]
    summary = {"base": base, "digits": list(digits), "levels": [k for _, _, k in fup_members]}
    if len(table) >= 3:
        summary["fit"] = fit_beta(zip(table["N"], table["norm"])).as_dict()
        if "norm_smooth" in table:
            summary["fit_smooth"] = fit_beta(zip(table["N"], table["norm_smooth"])).as_dict()
    else:
        log.warning("Fewer than three family members: no beta fit.")
    return ExperimentResult("fup", table, summary)


@check_scale_range
def porosity_experiment(
    cat_map,
    partition_pair,
    lattice_cell,
    porosity_query,
    fup_members,
    kappa: float = 0.05,
    support_words: int = 20,
    word_length: int = 4,
    resolution: int = 512,
    threshold: float = 1e-6,
    seed: int = 0,
    n_workers: int = 1,
) -> ExperimentResult:
    """Certified maximal porosity of the propagated supports of random words
    in the fundamental cell, next to porosity checks of the Cantor family."""
    table = support_porosity_scan(
        partition_pair,
        cat_map,
        lattice_cell,
        word_length,
        support_words,
        kappa,
        resolution,
        threshold,
        seed,
        n_workers,
    )
    cantor = []
    for base, digits, k in fup_members:
        omega, _ = cantor_set(base, digits, k)
        result = porosity_check(omega, porosity_query)
        cantor.append(
            {
                "level": k,
                "passed": result.passed,
                "min_ratio": result.min_ratio,
                "certified_nu": result.certified_nu,
            }
        )
    summary = {
        "map": cat_map.as_dict(),
        "cell": lattice_cell.as_dict(),
        "k0": porosity_time_offset(cat_map, kappa, kappa),
        "cutoff_translate_residual": cutoff_translate_residual(
            lattice_cell, kappa, min(resolution, 128)
        ),
        "min_porosity": float(
            min(table["plus_max_porosity"].min(), table["minus_max_porosity"].min())
        ),
        "query": {
            "nu": porosity_query.nu,
            "tau0": porosity_query.tau0,
            "tau1": porosity_query.tau1,
        },
        "cantor": cantor,
    }
    if summary["min_porosity"] <= 0:
        log.warning("Some propagated support is not porous at the resolved scales.")
    return ExperimentResult("porosity", table, summary)


@check_kernel_admissible
def qe_experiment(
    cat_map,
    n_values,
    observable,
    partition_pair,
    bump_symbol,
    n_random_states: int = 50,
    seed: int = 0,
    n_workers: int = 1,
) -> ExperimentResult:
    """Quantum variance of ``observable`` along the ``N`` sweep, joined with
    the empirical constants of the main estimate for the bump."""
    variance = qe_scan(cat_map, observable, n_values, n_workers)
    estimate = main_estimate_probe(
        partition_pair, cat_map, bump_symbol, n_values, n_random_states, seed, n_workers
    )
    table = variance.merge(estimate, on="N")
    summary = {
        "map": cat_map.as_dict(),
        "max_variance": float(table["variance"].max()),
        "c1_proxy_max": float(table["C1_proxy"].max()),
        "c2_hat_max": float(table["C2_hat"].max()),
        "variance_trend": mann_kendall(table["variance"]),
    }
    if len(n_values) > 1 and (table["variance"] > 0).all():
        slope, intercept, r2 = loglog_fit(table["N"], table["variance"])
        summary["variance_fit"] = {"slope": slope, "intercept": intercept, "r_squared": r2}
    return ExperimentResult("qe", table, summary)


EXPERIMENTS = ("spectrum", "deloc", "wigner", "egorov", "words", "fup", "porosity", "qe")
