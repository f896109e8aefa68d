"""Chunked work distribution with worker-count-independent results.

Callers split their enumeration space into an ordered list of chunk
arguments whose layout must not depend on the worker count.  ``run_chunks``
returns one result per chunk in submission order, so merging is
deterministic whether the chunks ran on 1 worker or 8.
"""

from __future__ import annotations

import os
from multiprocessing import get_context


def default_threads() -> int:
    raw = os.environ.get("ERLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_chunks(fn, chunk_args, workers: int = 1) -> list:
    """Map ``fn`` over ``chunk_args``, in order, on up to ``workers`` processes.

    ``fn`` must be a module-level callable taking a single picklable argument.
    """
    chunk_args = list(chunk_args)
    if workers <= 1 or len(chunk_args) <= 1:
        return [fn(a) for a in chunk_args]
    ctx = get_context("fork")
    with ctx.Pool(processes=min(workers, len(chunk_args))) as pool:
        return pool.map(fn, chunk_args, chunksize=1)
