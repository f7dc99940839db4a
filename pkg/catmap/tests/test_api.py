# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
test_api.py

Runcard parsing, checks and experiments evaluated through the
programmatic API.

"""
import numpy as np
import pytest

from reportengine.checks import CheckError
from reportengine.configparser import ConfigError
from reportengine.resourcebuilder import ResourceError

from catmap.api import API
from catmap.cli import resolve_config
from catmap.experiments import EXPERIMENTS

# small overrides of every bundled runcard so the suite stays quick
SMALL = {
    "spectrum": {"n_values": [11, 13], "p_max": 200},
    "deloc": {"n_values": "11:15:2", "n_rotations": 2, "basis_mode": "randomized",
              "bump": {"center": [0.5, 0.5], "radius": 0.2, "L_max": 8}},
    "wigner": {"n_values": [11, 13], "wigner_cutoff": 2, "husimi_resolution": 32},
    "egorov": {"n_values": [11, 13], "mode_max": 1, "powers": 2},
    "words": {"n_values": [11, 13], "schedule": {"T": 1, "delta": 0.5},
              "word_lengths": [2], "n_random_words": 1, "partition": {"L_max": 16}},
    "fup": {"fup_family": "cantor:3:02:2-4"},
    "porosity": {"resolution": 64, "support_words": 2, "word_length": 2,
                 "fup_family": "cantor:3:02:3", "scales": ["1/9", 1],
                 "partition": {"L_max": 16}},
    "qe": {"n_values": [11, 13], "n_random_states": 3,
           "bump": {"center": [0.5, 0.5], "radius": 0.2, "L_max": 8}},
}

BAD_INPUT = (ConfigError, CheckError, ResourceError)


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_bundled_runcards_run(experiment):
    config = resolve_config(experiment, None, {**SMALL[experiment], "threads": 1})
    result = getattr(API, f"{experiment}_experiment")(**config)
    assert result.name == experiment
    assert len(result.table)
    assert result.summary


def test_spectrum_experiment():
    result = API.spectrum_experiment(cat_map="DE", n_values="11:17:2", p_max=500, threads=1)
    assert list(result.table["N"]) == [11, 13, 15, 17]
    assert result.summary["max_unitarity_residual"] < 1e-8
    assert result.summary["max_reconstruction_residual"] < 1e-8
    assert np.all(result.table["quantum_period"] >= 1)


def test_wigner_experiment_grids():
    result = API.wigner_experiment(
        cat_map="DE", n_values=[11], wigner_cutoff=2, husimi_resolution=32
    )
    assert list(result.grids) == ["husimi_N11"]
    assert result.summary["max_hermitian_defect"] < 1e-12
    assert result.summary["max_pairing_residual"] < 1e-12
    assert len(result.table) == 25


def test_egorov_experiment_is_exact():
    result = API.egorov_experiment(
        cat_map="DE", n_values=[11, 13], mode_max=2, powers=2, threads=1,
        partition={"L_max": 16},
    )
    assert result.summary["max_defect"] < 1e-9
    assert len(result.table) == 2 * 25 * 2
    assert [g["t"] for g in result.summary["derivative_growth"]] == [0, 1, 2]


def test_fup_experiment_fit():
    result = API.fup_experiment(fup_family="cantor:3:02:2-5", threads=1)
    fit = result.summary["fit"]
    assert fit["N_values"] == [9, 27, 81, 243]
    assert "fit_smooth" not in result.summary


def test_word_schedule_auto():
    schedule = API.word_schedule(
        cat_map="DE", n_values=[101, 201], schedule={"T": "auto", "delta": 0.5, "rho": 0.5}
    )
    assert schedule.T == 1


def test_lattice_cell():
    cell = API.lattice_cell(cat_map="DE", kappa=0.05)
    assert cell.integer_coords == ((0, 1), (-1, 0))


def test_porosity_query_fractions():
    query = API.porosity_query(nu="1/9", scales=["1/243", 1])
    assert query.nu == pytest.approx(1 / 9)
    assert query.tau0 == pytest.approx(3**-5)


def test_observable_from_modes():
    a = API.observable(probe_symbol=[[0, 1], [1, 0]])
    assert a.is_real()
    assert a.coefficient((0, 1)) == pytest.approx(0.5)


def test_fup_members_default():
    assert [k for _, _, k in API.fup_members()] == [3, 4, 5, 6, 7]


def test_n_workers():
    assert API.n_workers(threads=1) == 1


def test_tables():
    classes = API.table_word_classes(cat_map="DE", n_values=[11], schedule={"T": 3, "delta": 0.4})
    assert len(classes) == 8
    assert classes["controlled"].sum() == 4
    cell = API.table_lattice_cell(cat_map="DE")
    assert list(cell.index) == ["P", "Pprime"]
    partition = API.table_partition(partition={"L_max": 16})
    assert list(partition.index) == ["K1", "K2", "supp_bound"]
    degeneracy = API.table_degeneracy(cat_map="DE", n_values=[11, 13])
    assert degeneracy.groupby("N")["multiplicity"].sum().to_dict() == {11: 11, 13: 13}


@pytest.mark.parametrize(
    "provider, kwargs",
    [
        ("lattice_cell", {"cat_map": "arnold"}),
        ("lattice_cell", {"cat_map": [[2, 1], [1, 1]]}),
        ("table_degeneracy", {"cat_map": "DE", "n_values": "17:11"}),
        ("table_degeneracy", {"cat_map": "DE", "n_values": [11], "window": [0.7, 0.3]}),
        ("porosity_query", {"nu": 1.5}),
        ("porosity_query", {"nu": "1/0"}),
        ("partition_pair", {"partition": {"K3": {"center": [0, 0], "radius": 0.1}}}),
        ("observable", {"probe_symbol": "sin_y"}),
        ("fup_members", {"fup_family": "cantor:2:0:3"}),
        ("deloc_experiment", {"cat_map": "DE", "n_values": [11], "seed": -1}),
        ("lattice_cell", {"cat_map": "DE", "kappa": 0.4}),
    ],
)
def test_bad_config(provider, kwargs):
    with pytest.raises(BAD_INPUT):
        getattr(API, provider)(**kwargs)


@pytest.mark.parametrize(
    "provider, kwargs",
    [
        ("spectrum_experiment", {"cat_map": "DE", "n_values": [11, 12]}),
        ("wigner_experiment", {"cat_map": "DE", "n_values": [11], "state_index": 11}),
        ("porosity_experiment", {"cat_map": "DE", "scales": [0.5, 0.5], "resolution": 32}),
        (
            "words_experiment",
            {"cat_map": "DE", "n_values": [11], "schedule": {"T": 17, "delta": 0.5}},
        ),
    ],
)
def test_failing_checks(provider, kwargs):
    with pytest.raises(BAD_INPUT):
        getattr(API, provider)(**kwargs)
