"""Divisibility scans for factorial-ratio sequences.

All counting is exact: a scan walks n in ascending order, computes
v_p(S(n)) from digit sums, and accumulates per-prime valuation histograms.
Range pieces merge by plain addition, so partitioning across workers cannot
change any reported number.  The *_scan functions here are the pure range
kernels; report assembly happens on merged results.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .digits import is_prime
from .sequences import SequenceSpec

__all__ = [
    "DivisibilityReport",
    "TrendPoint",
    "TrendReport",
    "ValuationHistograms",
    "histogram_scan",
    "joint_divisible_scan",
    "merge_valuation_histograms",
    "assemble_report",
    "scan_divisibility",
    "divisibility_by_m",
    "small_valuation_count",
    "small_valuation_threshold",
    "trend",
    "trend_from_histograms",
    "factorize",
]


def factorize(m: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of m >= 2 as ((p, alpha), ...), ascending."""
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            a = 0
            while m % p == 0:
                m //= p
                a += 1
            out.append((p, a))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return tuple(out)


@dataclass
class ValuationHistograms:
    """Per-prime valuation counts over a scanned range, plus skipped poles."""

    primes: tuple[int, ...]
    count: int
    skipped: int
    hists: dict[int, Counter]

    @classmethod
    def empty(cls, primes: tuple[int, ...]) -> "ValuationHistograms":
        return cls(primes=primes, count=0, skipped=0, hists={p: Counter() for p in primes})


def merge_valuation_histograms(x: ValuationHistograms, y: ValuationHistograms) -> ValuationHistograms:
    if x.primes != y.primes:
        raise ValueError(f"prime sets differ: {x.primes} vs {y.primes}")
    return ValuationHistograms(
        primes=x.primes,
        count=x.count + y.count,
        skipped=x.skipped + y.skipped,
        hists={p: x.hists[p] + y.hists[p] for p in x.primes},
    )


def histogram_scan(spec: SequenceSpec, primes: tuple[int, ...], lo: int, hi: int) -> ValuationHistograms:
    """Exact valuation histograms of S(n) for n in [lo, hi), one per prime."""
    for p in primes:
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
    poles = spec.pole_positions()
    out = ValuationHistograms.empty(primes)
    out.count = hi - lo
    for n in range(lo, hi):
        if n in poles:
            out.skipped += 1
            continue
        for p in primes:
            out.hists[p][spec.valuation(n, p)] += 1
    return out


def joint_divisible_scan(
    spec: SequenceSpec, factors: tuple[tuple[int, int], ...], lo: int, hi: int
) -> int:
    """Count n in [lo, hi) with v_p(S(n)) >= alpha for every (p, alpha) jointly.

    Needed for composite moduli: the joint condition cannot be read off the
    per-prime histograms.
    """
    poles = spec.pole_positions()
    divisible = 0
    for n in range(lo, hi):
        if n in poles:
            continue
        if all(spec.valuation(n, p) >= a for p, a in factors):
            divisible += 1
    return divisible


def _divisible_count(hist: Counter, alpha: int) -> int:
    return sum(c for v, c in hist.items() if v >= alpha)


@dataclass
class DivisibilityReport:
    """How often p^alpha (or a composite modulus) divides S(n) for n < N."""

    spec_name: str | None
    modulus: int
    factors: tuple[tuple[int, int], ...]
    n_limit: int
    divisible_count: int
    skipped_count: int
    histograms: dict[int, dict[int | float, int]]

    @property
    def considered(self) -> int:
        return self.n_limit - self.skipped_count

    @property
    def fraction(self) -> float:
        if self.considered == 0:
            return 0.0
        return self.divisible_count / self.considered


def assemble_report(
    spec: SequenceSpec,
    m: int,
    n_limit: int,
    hists: ValuationHistograms,
    joint_divisible: int | None,
) -> DivisibilityReport:
    """Build a report from merged scan results (single- or multi-worker alike)."""
    factors = factorize(m)
    if len(factors) == 1:
        p, a = factors[0]
        divisible = _divisible_count(hists.hists[p], a)
    else:
        if joint_divisible is None:
            raise ValueError("composite modulus needs the joint divisible count")
        divisible = joint_divisible
    return DivisibilityReport(
        spec_name=spec.name,
        modulus=m,
        factors=factors,
        n_limit=n_limit,
        divisible_count=divisible,
        skipped_count=hists.skipped,
        histograms={p: dict(hists.hists[p]) for p in hists.primes},
    )


def divisibility_by_m(spec: SequenceSpec, m: int, n_limit: int) -> DivisibilityReport:
    """Count n < N with S(n) divisible by m (every prime power of m at once)."""
    factors = factorize(m)
    primes = tuple(p for p, _ in factors)
    hists = histogram_scan(spec, primes, 0, n_limit)
    joint = joint_divisible_scan(spec, factors, 0, n_limit) if len(factors) > 1 else None
    return assemble_report(spec, m, n_limit, hists, joint)


def scan_divisibility(spec: SequenceSpec, p: int, alpha: int, n_limit: int) -> DivisibilityReport:
    """Count n < N with v_p(S(n)) >= alpha; digit sums only, no big products."""
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return divisibility_by_m(spec, p**alpha, n_limit)


def small_valuation_threshold(eta: float, n_limit: int) -> float:
    # natural log; eta is a free scale so the log base only renames eta
    return eta * math.log(n_limit)


def small_valuation_count(spec: SequenceSpec, p: int, eta: float, n_limit: int) -> int:
    """Exact count of n < N with v_p(S(n)) < eta * ln N (poles excluded)."""
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    hists = histogram_scan(spec, (p,), 0, n_limit)
    threshold = small_valuation_threshold(eta, n_limit)
    return sum(c for v, c in hists.hists[p].items() if v < threshold)


@dataclass
class TrendPoint:
    n_limit: int
    divisible_count: int
    skipped_count: int
    fraction: float
    small_valuation_count: int | None = None
    small_valuation_threshold: float | None = None


@dataclass
class TrendReport:
    spec_name: str | None
    p: int
    alpha: int
    eta: float | None
    points: list[TrendPoint] = field(default_factory=list)


def trend_from_histograms(
    spec: SequenceSpec,
    p: int,
    alpha: int,
    n_limits: list[int],
    segments: list[ValuationHistograms],
    eta: float | None = None,
) -> TrendReport:
    """Assemble a trend report from per-segment histograms in range order."""
    report = TrendReport(spec_name=spec.name, p=p, alpha=alpha, eta=eta)
    acc = ValuationHistograms.empty((p,))
    for n_limit, segment in zip(n_limits, segments):
        acc = merge_valuation_histograms(acc, segment)
        divisible = _divisible_count(acc.hists[p], alpha)
        considered = n_limit - acc.skipped
        point = TrendPoint(
            n_limit=n_limit,
            divisible_count=divisible,
            skipped_count=acc.skipped,
            fraction=divisible / considered if considered else 0.0,
        )
        if eta is not None:
            threshold = small_valuation_threshold(eta, n_limit)
            point.small_valuation_threshold = threshold
            point.small_valuation_count = sum(
                c for v, c in acc.hists[p].items() if v < threshold
            )
        report.points.append(point)
    return report


def trend(
    spec: SequenceSpec,
    p: int,
    alpha: int,
    n_limits: list[int],
    eta: float | None = None,
) -> TrendReport:
    """Divisibility fractions at several range bounds from one ascending pass.

    The scan over the largest bound yields every smaller prefix, so all
    points come from the same deterministic enumeration.
    """
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if list(n_limits) != sorted(set(n_limits)):
        raise ValueError(f"range bounds must be strictly increasing: {n_limits}")
    segments = []
    prev = 0
    for n_limit in n_limits:
        segments.append(histogram_scan(spec, (p,), prev, n_limit))
        prev = n_limit
    return trend_from_histograms(spec, p, alpha, n_limits, segments, eta)
