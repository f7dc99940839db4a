# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
checks.py

Runcard checks evaluated before any experiment runs: kernel admissibility
at every N, word schedules short enough to enumerate, ordered porosity
scales and eigenstate indices within range.

"""
from math import gcd

from reportengine.checks import make_argcheck, CheckError

from catmap.propagator import kernel_admissible
from catmap.words import MAX_WORD_LENGTH


@make_argcheck
def check_kernel_admissible(cat_map, n_values):
    """Check that the quantized map has a kernel at every requested N, that
    is ``gcd(2b, N) = 1`` for ``gamma = [[a, b], [c, d]]``.
    """
    bad = [N for N in n_values if not kernel_admissible(cat_map, N)]
    if bad:
        b = cat_map.entries[0][1]
        raise CheckError(
            f"No quantization of {cat_map.entries} at N = {bad}: "
            f"gcd(2b, N) = {[gcd(2 * b, N) for N in bad]} should be 1."
        )


@make_argcheck
def check_word_schedule(word_schedule):
    """Check that words of length ``8T`` can be multiplied out."""
    if word_schedule.word_length > MAX_WORD_LENGTH:
        raise CheckError(
            f"Schedule T = {word_schedule.T} asks for words of length "
            f"{word_schedule.word_length}, above the limit of {MAX_WORD_LENGTH}."
        )


@make_argcheck
def check_scale_range(porosity_query):
    """Check that the porosity scales span more than a single point."""
    if porosity_query.tau0 >= porosity_query.tau1:
        raise CheckError(
            f"Porosity scales [{porosity_query.tau0}, {porosity_query.tau1}] are degenerate."
        )


@make_argcheck
def check_state_index(n_values, state_index=0):
    """Check that the requested eigenvector exists at every N."""
    if state_index >= min(n_values):
        raise CheckError(
            f"state_index = {state_index} is out of range for N = {min(n_values)}."
        )
