"""Hot Monte Carlo kernels: numba fast path, pure-numpy fallback.

Backend selection: set ``DBB_BACKEND=numpy`` to force the fallback, or
``DBB_BACKEND=numba`` to require the compiled path; by default numba is used
when importable. Both backends consume the same counter-based bit stream and
apply the same float64 operation sequence, so their outputs are bit-identical
(asserted in the test suite and in ``benchmarks/bench_backends.py``).

The kernel simulates, per replication, a reward history along a fixed
probability trajectory and records squared estimation errors at the requested
epochs: one error per discount factor for the DBB estimate, one for the point
estimate. Replication r draws only from stream ``keys[r]``, so any contiguous
chunking over replications (the parallel work unit) reproduces the same
numbers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from dbb.rng import _INV_2_53, _U11, GOLDEN, MASK64, mix64_array

_ENV_FLAG = "DBB_BACKEND"

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    _HAVE_NUMBA = False


def _select_backend() -> str:
    requested = os.environ.get(_ENV_FLAG, "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not _HAVE_NUMBA:
            raise ImportError("DBB_BACKEND=numba but numba is not importable")
        return "numba"
    if requested not in ("", "auto"):
        raise ValueError(f"unknown {_ENV_FLAG} value {requested!r}")
    return "numba" if _HAVE_NUMBA else "numpy"


BACKEND = _select_backend()


def _sweep_chunk_numpy(keys, probs, lambdas, n, eval_epochs, prior_alpha, prior_beta,
                       targets, sq_dbb, sq_pt):
    """Vectorized over replications; same op order per scalar as the numba path."""
    n_lam = lambdas.shape[0]
    reps = keys.shape[0]
    alpha = np.full((n_lam, reps), prior_alpha, dtype=np.float64)
    beta = np.full((n_lam, reps), prior_beta, dtype=np.float64)
    nf = float(n)
    counter = 1
    eval_pos = 0
    for k in range(probs.shape[0]):
        p = probs[k]
        successes = np.zeros(reps, dtype=np.int64)
        for _ in range(n):
            offset = np.uint64((counter * GOLDEN) & MASK64)
            values = mix64_array(keys + offset)
            uniforms = (values >> _U11).astype(np.float64) * _INV_2_53
            successes += uniforms < p
            counter += 1
        sf = successes.astype(np.float64)
        for li in range(n_lam):
            alpha[li] = lambdas[li] * alpha[li] + sf
            beta[li] = lambdas[li] * beta[li] + (nf - sf)
        if eval_pos < eval_epochs.shape[0] and eval_epochs[eval_pos] == k + 1:
            target = targets[eval_pos]
            diff = sf / nf - target
            sq_pt[:, eval_pos] = diff * diff
            for li in range(n_lam):
                mean = alpha[li] / (alpha[li] + beta[li])
                d = mean - target
                sq_dbb[:, li, eval_pos] = d * d
            eval_pos += 1


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _sweep_chunk_numba(keys, probs, lambdas, n, eval_epochs, prior_alpha, prior_beta,
                           targets, sq_dbb, sq_pt):
        n_lam = lambdas.shape[0]
        tau = probs.shape[0]
        n_eval = eval_epochs.shape[0]
        nf = np.float64(n)
        alpha = np.empty(n_lam, dtype=np.float64)
        beta = np.empty(n_lam, dtype=np.float64)
        for r in range(keys.shape[0]):
            key = keys[r]
            for li in range(n_lam):
                alpha[li] = prior_alpha
                beta[li] = prior_beta
            counter = np.uint64(0)
            eval_pos = 0
            for k in range(tau):
                p = probs[k]
                successes = 0
                for _ in range(n):
                    counter += np.uint64(1)
                    z = key + counter * np.uint64(0x9E3779B97F4A7C15)
                    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
                    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
                    z = z ^ (z >> np.uint64(31))
                    u = np.float64(z >> np.uint64(11)) * (2.0 ** -53)
                    if u < p:
                        successes += 1
                sf = np.float64(successes)
                for li in range(n_lam):
                    alpha[li] = lambdas[li] * alpha[li] + sf
                    beta[li] = lambdas[li] * beta[li] + (nf - sf)
                if eval_pos < n_eval and eval_epochs[eval_pos] == k + 1:
                    target = targets[eval_pos]
                    diff = sf / nf - target
                    sq_pt[r, eval_pos] = diff * diff
                    for li in range(n_lam):
                        mean = alpha[li] / (alpha[li] + beta[li])
                        d = mean - target
                        sq_dbb[r, li, eval_pos] = d * d
                    eval_pos += 1

else:  # pragma: no cover
    _sweep_chunk_numba = None


_CHUNK_FNS = {"numpy": _sweep_chunk_numpy}
if _HAVE_NUMBA:
    _CHUNK_FNS["numba"] = _sweep_chunk_numba


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_CHUNK_FNS))


def sweep_squared_errors(
    keys: np.ndarray,
    probs: np.ndarray,
    lambdas: np.ndarray,
    n: int,
    eval_epochs: np.ndarray,
    prior_alpha: float,
    prior_beta: float,
    targets: np.ndarray,
    workers: int = 1,
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Squared errors per (replication, lambda, eval epoch) and (replication, eval epoch).

    ``eval_epochs`` must be strictly increasing 1-based epochs; ``targets``
    holds the comparison value at each eval epoch. Results are independent of
    ``workers`` and of the backend.
    """
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    lambdas = np.ascontiguousarray(lambdas, dtype=np.float64)
    eval_epochs = np.ascontiguousarray(eval_epochs, dtype=np.int64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if eval_epochs.shape != targets.shape:
        raise ValueError("eval_epochs and targets must align")
    if eval_epochs.size and (eval_epochs[0] < 1 or eval_epochs[-1] > probs.size):
        raise ValueError("eval epochs outside trajectory")
    if np.any(np.diff(eval_epochs) <= 0):
        raise ValueError("eval epochs must be strictly increasing")

    reps = keys.shape[0]
    sq_dbb = np.empty((reps, lambdas.shape[0], eval_epochs.shape[0]), dtype=np.float64)
    sq_pt = np.empty((reps, eval_epochs.shape[0]), dtype=np.float64)
    chunk_fn = _CHUNK_FNS[backend if backend is not None else BACKEND]

    args = (probs, lambdas, n, eval_epochs, prior_alpha, prior_beta, targets)
    if workers <= 1 or reps < 2:
        chunk_fn(keys, *args, sq_dbb, sq_pt)
        return sq_dbb, sq_pt

    bounds = np.linspace(0, reps, num=min(workers, reps) + 1, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(chunk_fn, keys[a:b], *args, sq_dbb[a:b], sq_pt[a:b])
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for fut in futures:
            fut.result()
    return sq_dbb, sq_pt
