"""Streaming, mergeable, exact-integer accumulation of digit statistics.

Every accumulator in this module is a plain Python integer, so partitioning
a range across workers and merging the pieces reproduces a single-pass scan
bit for bit.  Floating point enters only when moments or distances are
finally extracted from a summary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "ScanConfig",
    "EmpiricalSummary",
    "DigitPairTable",
    "Histogram",
    "scan",
    "merge",
    "empirical_moments",
    "exact_moments",
    "digit_pair_scan",
    "value_histogram",
    "clt_distance",
    "standard_normal_cdf",
]


@lru_cache(maxsize=16)
def _digit_block(q: int) -> tuple[int, list[int]]:
    """Digit-sum lookup table for one base-q block of at most 2^16 values."""
    width = 1
    while q ** (width + 1) <= 1 << 16:
        width += 1
    block = q**width
    table = [0] * block
    for m in range(1, block):
        table[m] = table[m // q] + m % q
    return block, table


def _digit_sum_fn(q: int):
    """Return a fast s_q closure; bit_count for q = 2, chunked lookups otherwise."""
    if q == 2:
        return int.bit_count
    block, table = _digit_block(q)

    def s(m: int) -> int:
        acc = 0
        while m:
            m, r = divmod(m, block)
            acc += table[r]
        return acc

    return s


@dataclass(frozen=True)
class ScanConfig:
    """A digit-sum experiment: base q, multipliers A_1..A_d, range bound N."""

    q: int
    multipliers: tuple[int, ...]
    n_limit: int

    def __post_init__(self) -> None:
        if self.q < 2:
            raise ValueError(f"base must be >= 2, got {self.q}")
        if not self.multipliers:
            raise ValueError("need at least one multiplier")
        if any(a < 1 for a in self.multipliers):
            raise ValueError(f"multipliers must be positive: {self.multipliers}")
        if self.n_limit < 1:
            raise ValueError(f"range bound must be >= 1, got {self.n_limit}")
        object.__setattr__(self, "multipliers", tuple(self.multipliers))


@dataclass
class EmpiricalSummary:
    """Exact sums and pairwise product sums of s_q(A_j n) over a scanned range."""

    config: ScanConfig
    count: int
    sums: list[int]
    product_sums: list[list[int]]

    @classmethod
    def empty(cls, config: ScanConfig) -> "EmpiricalSummary":
        d = len(config.multipliers)
        return cls(
            config=config,
            count=0,
            sums=[0] * d,
            product_sums=[[0] * d for _ in range(d)],
        )


def scan(config: ScanConfig, lo: int, hi: int) -> EmpiricalSummary:
    """Exact digit-sum summary of the half-open range [lo, hi)."""
    if not 0 <= lo <= hi <= config.n_limit:
        raise ValueError(f"range [{lo}, {hi}) not inside [0, {config.n_limit})")
    mult = config.multipliers
    d = len(mult)
    s_of = _digit_sum_fn(config.q)
    sums = [0] * d
    prods = [[0] * d for _ in range(d)]
    sv = [0] * d
    for n in range(lo, hi):
        for j in range(d):
            sv[j] = s_of(mult[j] * n)
        for i in range(d):
            si = sv[i]
            sums[i] += si
            row = prods[i]
            for j in range(i + 1):
                row[j] += si * sv[j]
    for i in range(d):
        for j in range(i + 1, d):
            prods[i][j] = prods[j][i]
    return EmpiricalSummary(config=config, count=hi - lo, sums=sums, product_sums=prods)


def merge(x: EmpiricalSummary, y: EmpiricalSummary) -> EmpiricalSummary:
    """Combine summaries of disjoint ranges; exact, associative, commutative."""
    if x.config != y.config:
        raise ValueError(f"cannot merge summaries of different configs: {x.config} vs {y.config}")
    d = len(x.config.multipliers)
    return EmpiricalSummary(
        config=x.config,
        count=x.count + y.count,
        sums=[a + b for a, b in zip(x.sums, y.sums)],
        product_sums=[
            [x.product_sums[i][j] + y.product_sums[i][j] for j in range(d)]
            for i in range(d)
        ],
    )


def exact_moments(s: EmpiricalSummary) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Mean vector and covariance matrix as exact rationals."""
    if s.count < 2:
        raise ValueError(f"need at least 2 samples for a covariance, got {s.count}")
    n = s.count
    mean = [Fraction(v, n) for v in s.sums]
    cov = [
        [Fraction(s.product_sums[i][j], n) - mean[i] * mean[j] for j in range(len(mean))]
        for i in range(len(mean))
    ]
    return mean, cov


def empirical_moments(s: EmpiricalSummary) -> tuple[list[float], list[list[float]]]:
    """Mean vector and covariance matrix as floats (the only lossy step)."""
    mean, cov = exact_moments(s)
    return [float(m) for m in mean], [[float(c) for c in row] for row in cov]


@dataclass
class DigitPairTable:
    """Exact q x q counts of the digit pair (eps_i(A1 n), eps_j(A2 n)), n < N."""

    q: int
    a1: int
    a2: int
    i: int
    j: int
    n_limit: int
    counts: list[list[int]]

    def frequencies(self) -> list[list[float]]:
        return [[c / self.n_limit for c in row] for row in self.counts]


def digit_pair_counts(q: int, a1: int, a2: int, i: int, j: int, lo: int, hi: int) -> list[list[int]]:
    """Raw pair counts over [lo, hi); the mergeable kernel behind digit_pair_scan."""
    qi = q**i
    qj = q**j
    flat = [0] * (q * q)
    if q == 2:
        for n in range(lo, hi):
            flat[(((a1 * n) >> i) & 1) * 2 + (((a2 * n) >> j) & 1)] += 1
    else:
        for n in range(lo, hi):
            flat[((a1 * n // qi) % q) * q + (a2 * n // qj) % q] += 1
    return [flat[a * q : (a + 1) * q] for a in range(q)]


def digit_pair_scan(q: int, a1: int, a2: int, i: int, j: int, n_limit: int) -> DigitPairTable:
    """Exact joint counts of (eps_i(A1 n), eps_j(A2 n)) for 0 <= n < N."""
    if q < 2:
        raise ValueError(f"base must be >= 2, got {q}")
    if i < 0 or j < 0:
        raise ValueError(f"digit positions must be >= 0, got i={i}, j={j}")
    if n_limit < 1:
        raise ValueError(f"range bound must be >= 1, got {n_limit}")
    counts = digit_pair_counts(q, a1, a2, i, j, 0, n_limit)
    return DigitPairTable(q=q, a1=a1, a2=a2, i=i, j=j, n_limit=n_limit, counts=counts)


def value_histogram(q: int, multiplier: int, lo: int, hi: int) -> dict[int, int]:
    """Exact counts of each attained value of s_q(A n) for n in [lo, hi)."""
    s_of = _digit_sum_fn(q)
    hist: dict[int, int] = {}
    if multiplier == 1 and q == 2:
        for n in range(lo, hi):
            v = n.bit_count()
            hist[v] = hist.get(v, 0) + 1
    else:
        for n in range(lo, hi):
            v = s_of(multiplier * n)
            hist[v] = hist.get(v, 0) + 1
    return hist


def merge_histograms(x: dict[int, int], y: dict[int, int]) -> dict[int, int]:
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, 0) + v
    return out


def standard_normal_cdf(t: float) -> float:
    return 0.5 * math.erfc(-t / math.sqrt(2.0))


@dataclass
class Histogram:
    """Counts of integer digit-sum values plus the standardization applied to them."""

    values: list[int]
    counts: list[int]
    center: float
    scale: float

    @property
    def edges(self) -> list[float]:
        # standardized midpoints between consecutive integer values
        return [(v + 0.5 - self.center) / self.scale for v in [self.values[0] - 1] + self.values]


def histogram_from_counts(hist: dict[int, int], q: int, n_limit: int) -> Histogram:
    log_n = math.log(n_limit) / math.log(q)
    mu = (q - 1) / 2 * log_n
    sigma = math.sqrt((q * q - 1) / 12 * log_n)
    values = sorted(hist)
    return Histogram(
        values=values,
        counts=[hist[v] for v in values],
        center=mu,
        scale=sigma,
    )


def ks_from_histogram(hist: Histogram, bin_width: int = 1) -> float:
    """Sup distance between the standardized value CDF and the Gaussian CDF.

    The comparison happens at midpoints between attainable values (the
    continuity correction for an integer-valued statistic); bin_width > 1
    coarsens the lattice by grouping that many consecutive values.
    """
    if bin_width < 1:
        raise ValueError(f"bin width must be >= 1, got {bin_width}")
    total = sum(hist.counts)
    lookup = dict(zip(hist.values, hist.counts))
    lo = hist.values[0] - 1
    hi = hist.values[-1]
    cum = 0
    worst = 0.0
    for v in range(lo, hi + 1):
        cum += lookup.get(v, 0)
        if (v - lo) % bin_width and v != hi:
            continue
        emp = cum / total
        ref = standard_normal_cdf((v + 0.5 - hist.center) / hist.scale)
        worst = max(worst, abs(emp - ref))
    return worst


def clt_distance(q: int, multiplier: int, n_limit: int, bin_width: int = 1) -> float:
    """KS distance of standardized s_q(A n), n < N, to the standard Gaussian.

    Standardization uses ((q-1)/2) log_q N and ((q^2-1)/12) log_q N; the
    digit sums themselves count all digits of A n.
    """
    if n_limit < q * q:
        raise ValueError(f"need N >= q^2 = {q * q}, got {n_limit}")
    hist = value_histogram(q, multiplier, 0, n_limit)
    return ks_from_histogram(histogram_from_counts(hist, q, n_limit), bin_width)
