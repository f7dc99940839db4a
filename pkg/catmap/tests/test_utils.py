# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
test_utils.py

Unit test suite for utils.py

"""
import numpy as np
import pytest

from catmap.utils import (
    THREADS_ENV,
    InputError,
    InsufficientData,
    Multiprocessing,
    loglog_fit,
    mann_kendall,
    n_workers_from_env,
    spectral_norm,
)


def square(x):
    return x * x


@pytest.mark.parametrize("n_workers", [1, 3])
def test_multiprocessing_keeps_input_order(n_workers):
    def generator():
        for i in range(10):
            yield i

    assert Multiprocessing(square, generator, n_workers).ordered() == [i * i for i in range(10)]


def test_multiprocessing_empty_generator():
    def generator():
        return iter(())

    assert Multiprocessing(square, generator, 4).ordered() == []


def test_n_workers_from_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert n_workers_from_env() == 3
    assert n_workers_from_env(threads=2) == 2
    assert n_workers_from_env(threads=5, use_multiprocessing=False) == 1
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(InputError):
        n_workers_from_env()
    with pytest.raises(InputError):
        n_workers_from_env(threads=0)


def test_loglog_fit():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, intercept, r2 = loglog_fit(x, 5 * x**-1.5)
    assert slope == pytest.approx(-1.5)
    assert intercept == pytest.approx(np.log(5))
    assert r2 == pytest.approx(1.0)
    assert loglog_fit(x, np.ones(4)) == (0.0, 0.0, 0.0)
    with pytest.raises(InsufficientData):
        loglog_fit([1.0], [1.0])
    with pytest.raises(InsufficientData):
        loglog_fit(x, [1.0, 0.0, 1.0, 1.0])


def test_mann_kendall():
    assert mann_kendall(np.linspace(1, 0, 20))["decreasing"]
    assert not mann_kendall(np.linspace(0, 1, 20))["decreasing"]
    assert mann_kendall([1.0, 2.0]) == {"tau": 0.0, "p_value": 1.0, "decreasing": False}
    assert not mann_kendall(np.ones(10))["decreasing"]


def test_spectral_norm():
    rng = np.random.default_rng(0)
    mat = rng.standard_normal((20, 30)) + 1j * rng.standard_normal((20, 30))
    assert spectral_norm(mat) == pytest.approx(np.linalg.norm(mat, 2))
    assert spectral_norm(np.zeros((0, 0))) == 0.0
