"""Shared record of acceptance outcomes, printed by the conftest summary hook."""

import functools
import time

RESULTS: dict[int, str] = {}


def criterion(number: int, title: str, limit_s: float | None = None):
    """Time the wrapped test, enforce ``limit_s`` and record one summary line."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                took = time.perf_counter() - start
                RESULTS[number] = f"criterion {number:2d} FAIL  {title}  ({took:.2f}s)  {type(exc).__name__}: {exc}"
                raise
            took = time.perf_counter() - start
            if limit_s is not None and took > limit_s:
                RESULTS[number] = f"criterion {number:2d} FAIL  {title}  ({took:.2f}s > {limit_s}s limit)"
                raise AssertionError(f"criterion {number} took {took:.2f}s, limit {limit_s}s")
            RESULTS[number] = f"criterion {number:2d} PASS  {title}  ({took:.2f}s)"

        return run

    return wrap
