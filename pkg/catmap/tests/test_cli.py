# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
test_cli.py

Tests of the ``catmap`` command: result files, exit codes and reports.

"""
import json

import pytest

from reportengine.configparser import ConfigError

from catmap import cli
from catmap.scripts.catmap_run import main

SPECTRUM = ["spectrum", "--n", "11", "--set", "p_max=200", "--threads", "1", "-q"]


def read_results(folder):
    return (folder / "results.csv").read_text().splitlines()


def test_run_writes_results(tmp_path):
    out = tmp_path / "spectrum"
    assert main(SPECTRUM + ["-o", str(out)]) == cli.EXIT_OK
    lines = read_results(out)
    assert lines[0].startswith("# config_hash: ")
    assert lines[1].startswith("# timestamp: ")
    assert lines[2].startswith("N,")
    summary = json.loads((out / "summary.json").read_text())
    config = json.loads((out / "config.json").read_text())
    assert summary["experiment"] == "spectrum"
    assert summary["config_hash"] == config["config_hash"]
    assert lines[0].endswith(summary["config_hash"])
    assert config["config"]["n_values"] == 11
    assert not (out / "error.json").exists()


def test_runs_are_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(SPECTRUM + ["-o", str(first)]) == cli.EXIT_OK
    assert main(SPECTRUM + ["-o", str(second)]) == cli.EXIT_OK
    assert read_results(first)[0] == read_results(second)[0]
    assert read_results(first)[2:] == read_results(second)[2:]


def test_invalid_window_exits_with_input_error(tmp_path):
    out = tmp_path / "bad"
    assert main(["spectrum", "--window", "0.7,0.3", "-q", "-o", str(out)]) == cli.EXIT_INPUT
    error = json.loads((out / "error.json").read_text())
    assert error["exit_code"] == cli.EXIT_INPUT
    assert not (out / "results.csv").exists()


def test_cutoff_overflow_exits_with_numerical_failure(tmp_path):
    out = tmp_path / "egorov"
    cmdline = [
        "egorov", "--n", "11", "--mode-max", "1", "--threads", "1", "-q",
        "--set", "max_cutoff=1", "--set", "powers=1", "--set", "partition={L_max: 16}",
        "-o", str(out),
    ]
    assert main(cmdline) == cli.EXIT_NUMERICAL
    error = json.loads((out / "error.json").read_text())
    assert error["error"] == "CutoffOverflow"


def test_missing_runcard(tmp_path):
    assert main(["spectrum", str(tmp_path / "nope.yml"), "-q"]) == cli.EXIT_INPUT


def test_user_runcard_formats(tmp_path):
    toml = tmp_path / "card.toml"
    toml.write_text("n_values = [11, 13]\np_max = 100\n")
    config = cli.resolve_config("spectrum", toml, {"p_max": 50})
    assert config["n_values"] == [11, 13]
    assert config["p_max"] == 50
    assert config["cat_map"] == "DE"
    card = tmp_path / "card.json"
    card.write_text(json.dumps({"window": [0.2, 0.8]}))
    assert cli.resolve_config("spectrum", card)["window"] == [0.2, 0.8]


@pytest.mark.parametrize("content", ["- just\n- a list\n", "key: [unclosed\n"])
def test_bad_runcards(tmp_path, content):
    card = tmp_path / "card.yml"
    card.write_text(content)
    with pytest.raises(ConfigError):
        cli.load_runcard(card)


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        cli.resolve_config("train")


def test_config_hash_ignores_key_order():
    assert cli.config_hash({"a": 1, "b": [1, 2]}) == cli.config_hash({"b": [1, 2], "a": 1})
    assert cli.config_hash({"a": 1}) != cli.config_hash({"a": 2})


def test_husimi_grids_are_written(tmp_path):
    out = tmp_path / "wigner"
    cmdline = [
        "wigner", "--n", "11", "-q", "--set", "wigner_cutoff=1",
        "--set", "husimi_resolution=16", "-o", str(out),
    ]
    assert main(cmdline) == cli.EXIT_OK
    assert (out / "husimi_N11.pgm").read_bytes().startswith(b"P5\n16 16\n255\n")
    assert len((out / "husimi_N11.csv").read_text().splitlines()) == 16


def test_report(tmp_path):
    assert main(SPECTRUM + ["-o", str(tmp_path / "spectrum")]) == cli.EXIT_OK
    fup = ["fup", "--set", "fup_family=cantor:3:02:2-4", "--threads", "1", "-q"]
    assert main(fup + ["-o", str(tmp_path / "fup")]) == cli.EXIT_OK
    assert main(["report", str(tmp_path), "-q"]) == cli.EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert sorted(r["experiment"] for r in report["runs"]) == ["fup", "spectrum"]
    assert report["fup_pooled"]["N_values"] == [9, 27, 81]
    assert "Pooled FUP fit" in (tmp_path / "report.md").read_text()


def test_report_without_results(tmp_path):
    with pytest.raises(cli.MissingResults):
        cli.collect_report(tmp_path)
    assert main(["report", str(tmp_path), "-q"]) == cli.EXIT_INPUT
