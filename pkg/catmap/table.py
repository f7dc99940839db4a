# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
table.py

Module containing all table actions

"""
import pandas as pd

from reportengine.table import table

from catmap.checks import check_kernel_admissible
from catmap.hilbert import HilbertSpec
from catmap.propagator import DEFAULT_WINDOW, build_cat_matrix, eigendecompose
from catmap.words import all_words, control_value


@table
@check_kernel_admissible
def table_degeneracy(cat_map, n_values, window=DEFAULT_WINDOW):
    r"""Tabulate the eigenspaces of :math:`M_N` for each ``N``: eigenphase in
    :math:`[0, 2\pi)` and multiplicity.

    Returns
    -------
    pandas.core.frame.DataFrame
    """
    frames = []
    for N in n_values:
        spectral = eigendecompose(build_cat_matrix(cat_map, HilbertSpec(N)), window=window)
        frame = spectral.degeneracy()
        frame.insert(0, "N", N)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


@table
def table_lattice_cell(lattice_cell):
    """Tabulate the fundamental cell: its spanning vectors, their integer
    coordinates and the side lengths of the thickened bounding box.

    Returns
    -------
    pandas.core.frame.DataFrame
    """
    cell = lattice_cell.as_dict()
    df = pd.DataFrame(
        [
            cell["P"] + cell["nm"],
            cell["Pprime"] + cell["kl"],
        ],
        index=["P", "Pprime"],
        columns=["y", "eta", "n", "m"],
    )
    df["ell_y"] = cell["ell_y"]
    df["ell_eta"] = cell["ell_eta"]
    return df


@table
def table_word_classes(word_classification):
    """Every word of length ``T`` with its control value ``F(w)`` and
    whether it is controlled.

    Returns
    -------
    pandas.core.frame.DataFrame
    """
    rows = [
        {
            "word": str(w),
            "control_value": float(control_value(w)),
            "controlled": w in word_classification.Z,
        }
        for w in all_words(word_classification.T)
    ]
    return pd.DataFrame(rows)


@table
def table_partition(partition_pair):
    """The balls defining the partition of unity and its truncation error."""
    info = partition_pair.as_dict()
    rows = {
        name: [*info[name]["center"], info[name]["radius"]]
        for name in ("K1", "K2", "supp_bound")
        if info[name] is not None
    }
    df = pd.DataFrame.from_dict(rows, orient="index", columns=["y", "eta", "radius"])
    df["truncation_error"] = info["truncation_error"]
    return df
