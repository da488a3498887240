"""Closed-form predictions for digit-sum statistics.

Exact rationals are used wherever a closed form exists; the truncated
Fourier series routines work in double-precision complex arithmetic and
always report a rigorous truncation bound next to the truncated value.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .digits import is_prime

__all__ = [
    "CltParams",
    "CovariancePrediction",
    "LinearValuationMoments",
    "clt_params",
    "covariance_matrix",
    "fourier_coeff",
    "joint_digit_prediction",
    "covariance_from_series",
    "linear_valuation_moments",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CltParams:
    """Per-digit mean (q-1)/2 and variance (q^2-1)/12 of a uniform base-q digit."""

    mu: Fraction
    sigma2: Fraction


@dataclass(frozen=True)
class CovariancePrediction:
    """Predicted per-log_q(N) covariance of the digit-sum vector (s_q(A_j n))_j.

    Entry (i, j) is (q^2-1)/12 * gcd(A_i, A_j)^2 / (A_i A_j), valid for prime
    q with no multiplier divisible by q.
    """

    q: int
    multipliers: tuple[int, ...]
    entries: tuple[tuple[Fraction, ...], ...]
    valid: bool = True

    @property
    def dim(self) -> int:
        return len(self.multipliers)


@dataclass(frozen=True)
class LinearValuationMoments:
    """Limiting mean and variance of v_p(E n + F) over n < N."""

    mean: Fraction
    variance: Fraction


def clt_params(q: int) -> CltParams:
    """Mean and variance constants of the digit-sum central limit theorem."""
    if q < 2:
        raise ValueError(f"base must be >= 2, got {q}")
    return CltParams(mu=Fraction(q - 1, 2), sigma2=Fraction(q * q - 1, 12))


def _check_prime_multipliers(q: int, multipliers: tuple[int, ...]) -> None:
    if not is_prime(q):
        raise ValueError(
            f"q = {q} is not prime; the closed-form covariance only exists for "
            "prime bases (only positive semi-definiteness holds in general)"
        )
    for a in multipliers:
        if a < 1:
            raise ValueError(f"multipliers must be positive, got {a}")
        if a % q == 0:
            raise ValueError(
                f"multiplier {a} is divisible by q = {q}; the closed-form "
                "covariance requires q-free multipliers"
            )


def covariance_matrix(q: int, multipliers: list[int] | tuple[int, ...]) -> CovariancePrediction:
    """Exact covariance prediction for the vector of digit sums s_q(A_j n).

    Raises ValueError when q is not prime or some A_j is divisible by q;
    the formula is invalid in those cases.
    """
    mult = tuple(multipliers)
    if not mult:
        raise ValueError("need at least one multiplier")
    _check_prime_multipliers(q, mult)
    scale = Fraction(q * q - 1, 12)
    entries = tuple(
        tuple(scale * Fraction(math.gcd(ai, aj) ** 2, ai * aj) for aj in mult)
        for ai in mult
    )
    return CovariancePrediction(q=q, multipliers=mult, entries=entries, valid=True)


def fourier_coeff(m: int, a: int, q: int) -> complex:
    """Fourier coefficient d_m(a) of the indicator of [a/q, (a+1)/q) on the circle.

    d_0(a) = 1/q, and d_m(a) = (e(-ma/q) - e(-m(a+1)/q)) / (2 pi i m) otherwise,
    with e(x) = exp(2 pi i x).  Vanishes exactly for m != 0 with q | m.
    """
    if q < 2:
        raise ValueError(f"base must be >= 2, got {q}")
    if not 0 <= a < q:
        raise ValueError(f"digit a must lie in [0, {q}), got {a}")
    if m == 0:
        return complex(1.0 / q)
    if m % q == 0:
        return 0j
    num = cmath.exp(-2j * math.pi * m * a / q) - cmath.exp(-2j * math.pi * m * (a + 1) / q)
    return num / (2j * math.pi * m)


def _series_tail_bound(a1: int, a2: int, terms: int) -> float:
    # |d_m(a)| <= 1/(pi |m|) bounds each dropped product by
    # D^2 / (pi^2 A1 A2 l^2); summing both signs over l > terms gives this.
    d = math.gcd(a1, a2)
    return 2.0 * d * d / (math.pi**2 * a1 * a2 * terms)


def joint_digit_prediction(
    q: int,
    a1: int,
    a2: int,
    same_position: bool,
    terms: int = 100_000,
) -> tuple[list[list[float]], float]:
    """Limiting joint distribution of the digit pair (eps_i(A1 n), eps_j(A2 n)).

    For distinct positions every cell is exactly 1/q^2.  For equal positions
    cell (a, b) is 1/q^2 plus the truncated two-sided coefficient series
    sum over 1 <= |l| <= terms of d_{l A2/D}(a) d_{-l A1/D}(b), D = gcd(A1, A2).
    Returns (matrix, tail_bound); the bound dominates the truncation error.
    """
    _check_prime_multipliers(q, (a1, a2))
    if terms < 1:
        raise ValueError(f"series truncation must be >= 1, got {terms}")
    base = 1.0 / (q * q)
    if not same_position:
        return [[base] * q for _ in range(q)], 0.0
    d = math.gcd(a1, a2)
    m1_step = a2 // d
    m2_step = a1 // d
    acc = [[0j] * q for _ in range(q)]
    for ell in range(1, terms + 1):
        if ell % q == 0:
            continue
        da_pos = [fourier_coeff(ell * m1_step, a, q) for a in range(q)]
        db_pos = [fourier_coeff(-ell * m2_step, b, q) for b in range(q)]
        da_neg = [c.conjugate() for c in da_pos]
        db_neg = [c.conjugate() for c in db_pos]
        for a in range(q):
            row = acc[a]
            pa, na = da_pos[a], da_neg[a]
            for b in range(q):
                row[b] += pa * db_pos[b] + na * db_neg[b]
    worst_imag = max(abs(c.imag) for row in acc for c in row)
    assert worst_imag < 1e-9, f"series lost conjugate symmetry: {worst_imag}"
    matrix = [[base + acc[a][b].real for b in range(q)] for a in range(q)]
    return matrix, _series_tail_bound(a1, a2, terms)


def covariance_from_series(q: int, a1: int, a2: int, terms: int = 100_000) -> float:
    """Per-position digit covariance summed from the truncated coefficient series.

    Converges to (q^2-1)/12 * gcd(A1,A2)^2 / (A1 A2) as the truncation grows;
    validating that limit against covariance_matrix cross-checks the identity
    sum_a a e(ak/q) = q / (e(k/q) - 1) for q-free k.
    """
    _check_prime_multipliers(q, (a1, a2))
    if terms < 1:
        raise ValueError(f"series truncation must be >= 1, got {terms}")
    d = math.gcd(a1, a2)
    m1_step = a2 // d
    m2_step = a1 // d
    total = 0.0
    for ell in range(1, terms + 1):
        if ell % q == 0:
            continue
        sa = sum(a * fourier_coeff(ell * m1_step, a, q) for a in range(1, q))
        sb = sum(b * fourier_coeff(-ell * m2_step, b, q) for b in range(1, q))
        # the -l term is the complex conjugate of the +l term
        total += 2.0 * (sa * sb).real
    return total


def linear_valuation_moments(p: int, e: int, f: int) -> LinearValuationMoments:
    """Limiting mean and variance of v_p(E n + F), E > 0, over n < N.

    (0, 0) when p | E (the form is never divisible by p), otherwise
    (1/(p-1), p/(p-1)^2).  Requires p prime and p not dividing both E and F.
    """
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if e <= 0:
        raise ValueError(f"E must be positive, got {e}")
    if e % p == 0 and f % p == 0:
        raise ValueError(
            f"p = {p} divides both E = {e} and F = {f}; divide the common "
            "power of p out first"
        )
    if e % p == 0:
        return LinearValuationMoments(mean=Fraction(0), variance=Fraction(0))
    return LinearValuationMoments(
        mean=Fraction(1, p - 1),
        variance=Fraction(p, (p - 1) ** 2),
    )
