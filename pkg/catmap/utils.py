# SPDX-License-Identifier: GPL-3.0-or-later
# Copywrite © 2026 catmap developers
"""
utils.py

Shared helpers: exception bases, the process pool used for N-sweeps and the
regression/trend statistics every scan reports.
"""
from itertools import islice
from math import ceil
import logging
import multiprocessing as mp
import os

import numpy as np
import scipy.linalg
import scipy.sparse.linalg
import scipy.stats
from tqdm import tqdm

log = logging.getLogger(__name__)

THREADS_ENV = "CATMAP_THREADS"


class InputError(ValueError):
    """Base class for requests that cannot be satisfied as stated."""


class NumericalFailure(RuntimeError):
    """Base class for computations that failed or could not be certified."""


class InsufficientData(InputError):
    pass


class ConvergenceFailure(NumericalFailure):
    pass


class Multiprocessing:
    """Evaluate ``func`` over the argument tuples of an N-sweep (or any other
    sweep) in forked worker processes, each taking a contiguous chunk.

    Parameters
    ----------
    func
        maps one argument tuple to one result row.
    generator
        zero-argument callable returning a fresh iterator over the argument
        tuples; each worker re-creates it and slices out its chunk.
    n_workers
        number of worker processes. With a single worker everything runs in
        the calling process.
    desc
        label of the progress bar.

    Notes
    -----
    Arguments never cross a pipe, so closures and unpicklable symbols are
    fine. Results are keyed by their position in the sweep and
    :py:meth:`ordered` returns them in sweep order. A worker that dies raises
    ``NumericalFailure``.
    """

    def __init__(self, func, generator, n_workers: int = 1, desc: str = None):
        self.func = func
        self.generator = generator
        self.desc = desc

        self.n_iters = sum(1 for _ in generator())
        self.n_cores = max(1, min(int(n_workers), self.n_iters))

        self.max_chunk = ceil(self.n_iters / self.n_cores) if self.n_iters else 0

    def target(self, k: int, output_dict: dict) -> None:
        """Function to be executed for each process."""
        generator_k = islice(
            self.generator(),
            k * self.max_chunk,
            min((k + 1) * self.max_chunk, self.n_iters),
        )
        i_glob = k * self.max_chunk  # global index
        pbar = tqdm(
            generator_k,
            total=min(self.max_chunk, self.n_iters - i_glob),
            desc=self.desc,
            position=k,
            leave=False,
            disable=self.desc is None,
        )
        for i, args in enumerate(pbar):
            output_dict[i_glob + i] = self.func(args)

    def __call__(self) -> dict:
        """Returns a dictionary containing the function outputs for each
        set of parameters taken from the generator. The dictionary keys are
        integers which label the order of parameter sets in the generator."""
        # don't use mp if single core.
        if self.n_cores == 1:
            output_dict = dict()
            self.target(0, output_dict)
            return output_dict

        # workers inherit the closure generator, which cannot be pickled
        ctx = mp.get_context("fork")
        manager = ctx.Manager()
        output_dict = manager.dict()

        procs = []
        for k in range(self.n_cores):
            p = ctx.Process(target=self.target, args=(k, output_dict))
            procs.append(p)
            p.start()

        # Kill the zombies
        for p in procs:
            p.join()

        failed = [p.exitcode for p in procs if p.exitcode != 0]
        if failed:
            raise NumericalFailure(
                f"{len(failed)} worker process(es) exited abnormally: {failed}"
            )
        return dict(output_dict)

    def ordered(self) -> list:
        """Outputs as a list in generator order."""
        out = self()
        return [out[i] for i in range(self.n_iters)]


def n_workers_from_env(threads=None, use_multiprocessing: bool = True) -> int:
    """Degree of parallelism: explicit ``threads``, else ``CATMAP_THREADS``,
    else the number of logical cores."""
    if not use_multiprocessing:
        return 1
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise InputError(f"{THREADS_ENV} must be an integer, got {env!r}")
    if threads is None:
        return mp.cpu_count()
    if threads < 1:
        raise InputError(f"number of threads must be positive, got {threads}")
    return int(threads)


def loglog_fit(x, y) -> tuple:
    r"""Ordinary least squares fit of :math:`\log y = c + s \log x`.

    Returns
    -------
    tuple
        ``(slope, intercept, r_squared)``. A constant ``y`` gives zero slope
        and ``r_squared = 0``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise InsufficientData("at least two points are needed for a fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InsufficientData("log-log fit requires positive data")
    logy = np.log(y)
    if np.ptp(logy) == 0:
        return 0.0, float(logy[0]), 0.0
    res = scipy.stats.linregress(np.log(x), logy)
    return float(res.slope), float(res.intercept), float(res.rvalue ** 2)


def mann_kendall(values, alpha: float = 0.05) -> dict:
    """Mann–Kendall trend test of a sequence against its index.

    The statistic is Kendall's tau between the sample order and the values;
    ``decreasing`` is set when tau is negative and significant at ``alpha``.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return {"tau": 0.0, "p_value": 1.0, "decreasing": False}
    if np.ptp(values) == 0:
        return {"tau": 0.0, "p_value": 1.0, "decreasing": False}
    tau, p_value = scipy.stats.kendalltau(np.arange(values.size), values)
    tau, p_value = float(tau), float(p_value)
    return {"tau": tau, "p_value": p_value, "decreasing": tau < 0 and p_value < alpha}


DENSE_SVD_LIMIT = 2048


def spectral_norm(matrix: np.ndarray) -> float:
    """Largest singular value: dense SVD up to ``DENSE_SVD_LIMIT``, an
    iterative solver above."""
    if matrix.size == 0:
        return 0.0
    try:
        if max(matrix.shape) <= DENSE_SVD_LIMIT:
            return float(scipy.linalg.svdvals(matrix)[0])
        log.warning("Matrix too large for dense SVD, using an iterative solver.")
        return float(scipy.sparse.linalg.svds(matrix, k=1, return_singular_vectors=False)[0])
    except (scipy.linalg.LinAlgError, scipy.sparse.linalg.ArpackError) as e:
        raise NumericalFailure(f"singular value computation failed: {e}")
