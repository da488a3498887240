"""Deterministic range-parallel execution of the pure scan kernels.

Ranges are split contiguously and merged back in range order.  Because every
accumulator is an exact integer, any worker count produces identical results;
the floating-point post-processing happens once, after the merge.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from functools import reduce

from . import divisibility, empirical
from .divisibility import ValuationHistograms, merge_valuation_histograms
from .empirical import DigitPairTable, EmpiricalSummary, ScanConfig
from .sequences import SequenceSpec

__all__ = [
    "default_workers",
    "split_range",
    "parallel_empirical_scan",
    "parallel_digit_pair_scan",
    "parallel_value_histogram",
    "parallel_histogram_scan",
    "parallel_joint_divisible",
    "parallel_trend_segments",
]

WORKERS_ENV = "DIGITLAB_WORKERS"


def default_workers() -> int:
    """Worker count from the DIGITLAB_WORKERS environment variable, else 1."""
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1, got {value}")
    return value


def split_range(lo: int, hi: int, pieces: int) -> list[tuple[int, int]]:
    """Split [lo, hi) into at most `pieces` contiguous nonempty subranges."""
    width = hi - lo
    pieces = max(1, min(pieces, width)) if width else 1
    bounds = [lo + (width * k) // pieces for k in range(pieces + 1)]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if a < b] or [(lo, hi)]


def _invoke(item):
    fn, args = item
    return fn(*args)


def _map_ordered(fn, arg_tuples: list[tuple], workers: int) -> list:
    if workers <= 1 or len(arg_tuples) <= 1:
        return [fn(*args) for args in arg_tuples]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_invoke, [(fn, args) for args in arg_tuples]))


def parallel_empirical_scan(config: ScanConfig, workers: int = 1) -> EmpiricalSummary:
    ranges = split_range(0, config.n_limit, workers)
    parts = _map_ordered(empirical.scan, [(config, lo, hi) for lo, hi in ranges], workers)
    return reduce(empirical.merge, parts, EmpiricalSummary.empty(config))


def parallel_digit_pair_scan(
    q: int, a1: int, a2: int, i: int, j: int, n_limit: int, workers: int = 1
) -> DigitPairTable:
    ranges = split_range(0, n_limit, workers)
    parts = _map_ordered(
        empirical.digit_pair_counts,
        [(q, a1, a2, i, j, lo, hi) for lo, hi in ranges],
        workers,
    )
    counts = [[sum(p[a][b] for p in parts) for b in range(q)] for a in range(q)]
    return DigitPairTable(q=q, a1=a1, a2=a2, i=i, j=j, n_limit=n_limit, counts=counts)


def parallel_value_histogram(q: int, multiplier: int, n_limit: int, workers: int = 1) -> dict[int, int]:
    ranges = split_range(0, n_limit, workers)
    parts = _map_ordered(
        empirical.value_histogram,
        [(q, multiplier, lo, hi) for lo, hi in ranges],
        workers,
    )
    return reduce(empirical.merge_histograms, parts, {})


def parallel_histogram_scan(
    spec: SequenceSpec, primes: tuple[int, ...], n_limit: int, workers: int = 1
) -> ValuationHistograms:
    ranges = split_range(0, n_limit, workers)
    parts = _map_ordered(
        divisibility.histogram_scan,
        [(spec, primes, lo, hi) for lo, hi in ranges],
        workers,
    )
    return reduce(merge_valuation_histograms, parts, ValuationHistograms.empty(primes))


def parallel_joint_divisible(
    spec: SequenceSpec, factors: tuple[tuple[int, int], ...], n_limit: int, workers: int = 1
) -> int:
    ranges = split_range(0, n_limit, workers)
    parts = _map_ordered(
        divisibility.joint_divisible_scan,
        [(spec, factors, lo, hi) for lo, hi in ranges],
        workers,
    )
    return sum(parts)


def parallel_trend_segments(
    spec: SequenceSpec, p: int, n_limits: list[int], workers: int = 1
) -> list[ValuationHistograms]:
    """Per-segment histograms between consecutive bounds, each range-parallel."""
    segments = []
    prev = 0
    for n_limit in n_limits:
        ranges = split_range(prev, n_limit, workers)
        parts = _map_ordered(
            divisibility.histogram_scan,
            [(spec, (p,), lo, hi) for lo, hi in ranges],
            workers,
        )
        segments.append(reduce(merge_valuation_histograms, parts, ValuationHistograms.empty((p,))))
        prev = n_limit
    return segments
