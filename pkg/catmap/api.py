# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
api.py

This module contains the ``reportengine`` programmatic API, initialized with the
``catmap`` providers, Config and Environment.

Example:
--------
Every experiment the ``catmap`` command runs is a provider, so it can be
evaluated directly in a python shell with runcard keys as keyword arguments:

>>> from catmap.api import API
>>> result = API.spectrum_experiment(cat_map="DE", n_values="11:17:2", threads=1)
>>> list(result.table["N"])
[11, 13, 15, 17]
>>> result.summary["max_unitarity_residual"] < 1e-8
True

Intermediate objects are reachable the same way:

>>> cell = API.lattice_cell(cat_map="DE", kappa=0.05)
>>> cell.integer_coords
((0, 1), (-1, 0))
>>> schedule = API.word_schedule(
...     cat_map="DE",
...     n_values=[101, 201],
...     schedule={"T": "auto", "delta": 0.5, "rho": 0.5},
... )
>>> schedule.T
1

Of course this is not limited to use in a python shell, and can be used in
jupyter notebooks, scripts, tests etc.

"""
import logging

from reportengine import api
from reportengine.environment import Environment

from catmap.scripts.catmap_run import PROVIDERS
from catmap.config import ConfigParser

log = logging.getLogger(__name__)

API = api.API(PROVIDERS, ConfigParser, Environment)
