# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
cli.py

Runs an experiment through the programmatic API and writes its results, and
collects finished runs into a report.

Every run directory holds ``results.csv`` (two ``#`` comment lines carrying
the config hash and a timestamp, then the table), ``summary.json`` and
``config.json``. A failed run leaves ``error.json`` instead.
"""
from datetime import datetime, timezone
import hashlib
import json
import logging
import pathlib
import tomllib

import numpy as np
import pandas as pd
import scipy.linalg

from reportengine.checks import CheckError
from reportengine.compat import yaml
from reportengine.configparser import ConfigError
from reportengine.resourcebuilder import ResourceError

from catmap.experiments import EXPERIMENTS
from catmap.fup import fit_beta
from catmap.observables import write_grid_csv, write_pgm
from catmap.runcards import runcard_path
from catmap.utils import InputError, InsufficientData, NumericalFailure

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class MissingResults(InputError):
    pass


def _native(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_native)


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON of the resolved runcard."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=_native)
    return hashlib.sha256(canonical.encode()).hexdigest()


def load_runcard(path) -> dict:
    """Read a YAML, JSON or TOML runcard, chosen by suffix."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise ConfigError(f"Runcard {path} not found.")
    try:
        if path.suffix == ".json":
            content = json.loads(path.read_text())
        elif path.suffix == ".toml":
            content = tomllib.loads(path.read_text())
        else:
            with open(path) as stream:
                content = yaml.safe_load(stream)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError, yaml.error.YAMLError) as e:
        raise ConfigError(f"Failed to parse runcard {path}: {e}")
    if not isinstance(content, dict):
        raise ConfigError(
            f"Expecting input runcard to be a mapping, not '{type(content)}'."
        )
    return content


def resolve_config(experiment: str, runcard=None, overrides: dict = None) -> dict:
    """The bundled runcard of ``experiment``, updated by ``runcard`` and then
    by ``overrides``."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"Unknown experiment {experiment}", experiment, EXPERIMENTS)
    config = load_runcard(runcard_path(experiment))
    if runcard is not None:
        config.update(load_runcard(runcard))
    config.update(overrides or {})
    return config


def _fail(output: pathlib.Path, error: Exception, code: int, digest: str) -> int:
    log.error(f"{type(error).__name__}: {error}")
    record = {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": code,
        "config_hash": digest,
    }
    (output / "error.json").write_text(dumps(record))
    return code


def write_results(result, config: dict, digest: str, output: pathlib.Path) -> None:
    timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with open(output / "results.csv", "w") as stream:
        stream.write(f"# config_hash: {digest}\n# timestamp: {timestamp}\n")
        result.table.to_csv(stream, index=False)
    (output / "summary.json").write_text(
        dumps({"experiment": result.name, "config_hash": digest, "summary": result.summary})
    )
    (output / "config.json").write_text(dumps({"config_hash": digest, "config": config}))
    for name, grid in result.grids.items():
        write_pgm(grid, output / f"{name}.pgm")
        write_grid_csv(grid, output / f"{name}.csv")
    log.info(f"Results of {result.name} written to {output}.")


def run(experiment: str, config: dict, output) -> int:
    """Evaluate ``<experiment>_experiment`` on ``config`` and write the
    results to ``output``.

    Returns
    -------
    int
        0 on success, 2 for an invalid request and 3 for a numerical
        failure.
    """
    # catmap.api imports the script module, which imports this one
    from catmap.api import API

    output = pathlib.Path(output)
    output.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)
    log.info(f"Running {experiment} with config hash {digest[:12]}.")
    try:
        result = getattr(API, f"{experiment}_experiment")(**config)
    except (ConfigError, CheckError, ResourceError, InputError) as e:
        return _fail(output, e, EXIT_INPUT, digest)
    except NumericalFailure as e:
        return _fail(output, e, EXIT_NUMERICAL, digest)
    except scipy.linalg.LinAlgError as e:
        return _fail(output, e, EXIT_NUMERICAL, digest)
    write_results(result, config, digest, output)
    return EXIT_OK


def _load_run(summary_path: pathlib.Path) -> dict:
    folder = summary_path.parent
    summary = json.loads(summary_path.read_text())
    table = pd.read_csv(folder / "results.csv", comment="#")
    return {"path": str(folder), **summary, "table": table}


def _pooled_fup(runs: list) -> dict:
    frames = [r["table"][["N", "norm"]] for r in runs]
    pooled = pd.concat(frames, ignore_index=True)
    try:
        return fit_beta(zip(pooled["N"], pooled["norm"])).as_dict()
    except InsufficientData as e:
        log.warning(f"No pooled FUP fit: {e}")
        return {"error": str(e)}


def collect_report(results_dir) -> dict:
    """Summaries of every run found under ``results_dir``.

    Raises
    ------
    MissingResults
    """
    results_dir = pathlib.Path(results_dir)
    runs = [_load_run(p) for p in sorted(results_dir.rglob("summary.json"))]
    if not runs:
        raise MissingResults(f"no results found under {results_dir}")
    by_experiment = {}
    for r in runs:
        by_experiment.setdefault(r["experiment"], []).append(r)

    report = {
        "runs": [
            {"path": r["path"], "experiment": r["experiment"], "config_hash": r["config_hash"]}
            for r in runs
        ]
    }
    if "fup" in by_experiment:
        report["fup_pooled"] = _pooled_fup(by_experiment["fup"])
    if "deloc" in by_experiment:
        report["deloc"] = [
            {
                "path": r["path"],
                "min_mass": r["summary"]["min_mass"],
                "min_mass_N": r["summary"]["min_mass_N"],
                "trend": r["summary"]["trend"],
            }
            for r in by_experiment["deloc"]
        ]
    if "qe" in by_experiment:
        report["qe"] = [
            {"path": r["path"], "variance_fit": r["summary"].get("variance_fit")}
            for r in by_experiment["qe"]
        ]
    for name in ("spectrum", "wigner", "egorov", "words", "porosity"):
        if name in by_experiment:
            report[name] = [{"path": r["path"], **r["summary"]} for r in by_experiment[name]]
    return report


def _markdown(report: dict) -> str:
    lines = ["# catmap report", "", "| run | experiment | config hash |", "|---|---|---|"]
    for r in report["runs"]:
        lines.append(f"| {r['path']} | {r['experiment']} | {r['config_hash'][:12]} |")
    if "fup_pooled" in report:
        fit = report["fup_pooled"]
        lines += ["", "## Pooled FUP fit", ""]
        if "beta_hat" in fit:
            lines.append(
                f"beta_hat = {fit['beta_hat']:.6f}, R^2 = {fit['r_squared']:.4f} "
                f"over {len(fit['N_values'])} points"
            )
        else:
            lines.append(fit["error"])
    if "deloc" in report:
        lines += ["", "## Delocalization", "", "| run | min mass | at N | tau | p |", "|---|---|---|---|---|"]
        for r in report["deloc"]:
            t = r["trend"]
            lines.append(
                f"| {r['path']} | {r['min_mass']:.6g} | {r['min_mass_N']} "
                f"| {t['tau']:.3f} | {t['p_value']:.3g} |"
            )
    if "qe" in report:
        lines += ["", "## Quantum variance", ""]
        for r in report["qe"]:
            fit = r["variance_fit"]
            slope = "n/a" if fit is None else f"{fit['slope']:.4f}"
            lines.append(f"- {r['path']}: log-log slope {slope}")
    for name in ("spectrum", "wigner", "egorov", "words", "porosity"):
        if name in report:
            lines += ["", f"## {name}", ""]
            for r in report[name]:
                scalars = {k: v for k, v in r.items() if isinstance(v, (int, float, str))}
                lines.append("- " + ", ".join(f"{k}: {v}" for k, v in sorted(scalars.items())))
    return "\n".join(lines) + "\n"


def report(results_dir) -> dict:
    """Write ``report.md`` and ``report.json`` into ``results_dir``."""
    results_dir = pathlib.Path(results_dir)
    collected = collect_report(results_dir)
    (results_dir / "report.json").write_text(dumps(collected))
    (results_dir / "report.md").write_text(_markdown(collected))
    log.info(f"Report on {len(collected['runs'])} run(s) written to {results_dir}.")
    return collected
