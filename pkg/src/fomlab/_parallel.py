"""Deterministic chunked execution, optionally across processes.

Work is split into fixed-size chunks keyed by chunk id; each chunk derives
its own RNG substream, so results are bitwise identical for any worker
count.  Reduction happens in chunk-id order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

CHUNK_SIZE = 4096


def resolve_workers(workers=None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("FOMLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunk_sizes(total: int, chunk_size: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_chunked(worker_fn, args_list, workers=None):
    """Apply worker_fn to each args tuple; results returned in input order."""
    nworkers = resolve_workers(workers)
    if nworkers <= 1 or len(args_list) <= 1:
        return [worker_fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=nworkers) as pool:
        return list(pool.map(worker_fn, args_list))
