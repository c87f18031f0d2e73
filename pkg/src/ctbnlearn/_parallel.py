"""Order-preserving process pool map used for per-node and per-replicate work."""
from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor

_SHARED = {}


def _init(payload):
    _SHARED["payload"] = payload


def _call(args):
    fn, item = args
    return fn(_SHARED["payload"], item)


def ordered_imap(fn, payload, items, jobs: int = 1):
    """Yield ``fn(payload, item)`` for each item, in input order.

    With ``jobs > 1`` the calls run in worker processes and ``payload`` is
    shipped once per worker. The output never depends on ``jobs``.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        for item in items:
            yield fn(payload, item)
        return
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
    with ProcessPoolExecutor(max_workers=min(jobs, len(items)), mp_context=ctx,
                             initializer=_init, initargs=(payload,)) as ex:
        yield from ex.map(_call, [(fn, item) for item in items])


def ordered_map(fn, payload, items, jobs: int = 1) -> list:
    return list(ordered_imap(fn, payload, items, jobs))
