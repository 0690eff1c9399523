"""Deterministic chunked map-reduce over replica indices.

Replicas are keyed by (master seed, replica index) and grouped into chunks
whose boundaries depend only on the replica count, never on the worker
count.  Each chunk produces a partial reduction; partials are combined in
chunk order, so results are bit-identical for any number of workers.  All
replica math runs under a single BLAS thread to keep floating-point results
identical between in-process and pooled execution.
"""

from __future__ import annotations

import math
import multiprocessing

from threadpoolctl import threadpool_limits

MAX_CHUNK = 64
MIN_CHUNKS = 32


def chunk_bounds(replicas, chunk_size=None):
    """Chunk boundaries [(start, stop), ...] as a pure function of the count."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if chunk_size is None:
        chunk_size = min(MAX_CHUNK, max(1, math.ceil(replicas / MIN_CHUNKS)))
    return [(s, min(s + chunk_size, replicas)) for s in range(0, replicas, chunk_size)]


def _run_chunk(payload):
    kernel, task, start, stop = payload
    with threadpool_limits(limits=1):
        return kernel(task, start, stop)


def map_chunks(kernel, task, replicas, workers=1, chunk_size=None):
    """Run ``kernel(task, start, stop)`` over all chunks; partials in chunk order.

    ``kernel`` must be a module-level callable (picklable) returning a
    per-chunk partial; ``task`` must be picklable.  Workers fork from the
    parent; the single-thread BLAS limit inside each chunk makes the forked
    and in-process code paths produce identical floating-point results.
    """
    bounds = chunk_bounds(replicas, chunk_size)
    payloads = [(kernel, task, s, t) for s, t in bounds]
    if workers <= 1 or len(payloads) == 1:
        return [_run_chunk(p) for p in payloads]
    workers = min(workers, len(payloads))
    method = "fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn"
    ctx = multiprocessing.get_context(method)
    with ctx.Pool(processes=workers) as pool:
        return list(pool.imap(_run_chunk, payloads, chunksize=1))


def combine_sums(partials, keys):
    """Sum the named array/scalar entries of the chunk partials, in order."""
    total = {k: None for k in keys}
    for part in partials:
        for k in keys:
            v = part[k]
            total[k] = v if total[k] is None else total[k] + v
    return total


def jackknife_chunks(partials, keys, statistic):
    """Leave-one-chunk-out jackknife of ``statistic(totals_dict)``.

    Returns (value, stderr) where value is the full-sample statistic and
    stderr combines real and imaginary jackknife variances.  Deterministic:
    chunks are a pure function of the replica count.
    """
    total = combine_sums(partials, keys)
    value = statistic(total)
    B = len(partials)
    if B < 2:
        return value, float("nan")
    loo = []
    for part in partials:
        sub = {k: total[k] - part[k] for k in keys}
        loo.append(statistic(sub))
    mean_re = sum(complex(v).real for v in loo) / B
    mean_im = sum(complex(v).imag for v in loo) / B
    var = sum((complex(v).real - mean_re) ** 2 + (complex(v).imag - mean_im) ** 2
              for v in loo)
    se = math.sqrt((B - 1) / B * var)
    return value, se
