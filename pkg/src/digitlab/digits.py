"""Exact base-q digit arithmetic on arbitrary-precision integers.

Everything here is a pure function of its arguments and safe to call from
any number of workers.  The functions are deliberately definitional; the
performance-tuned scan loops live in :mod:`digitlab.empirical`.
"""

from __future__ import annotations

import math

__all__ = [
    "digits",
    "digit_at",
    "sum_digits",
    "valuation",
    "factorial_valuation",
    "is_prime",
]

INFINITE = math.inf


def _check_base(q: int) -> None:
    if q < 2:
        raise ValueError(f"base must be >= 2, got {q}")


def _check_natural(n: int) -> None:
    if n < 0:
        raise ValueError(f"expected a nonnegative integer, got {n}")


def is_prime(n: int) -> bool:
    """Trial-division primality test (bases here are small, not cryptographic)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def digits(n: int, q: int) -> list[int]:
    """Base-q digits of n, least-significant first; digits(0, q) == []."""
    _check_base(q)
    _check_natural(n)
    out = []
    while n:
        n, r = divmod(n, q)
        out.append(r)
    return out


def digit_at(n: int, q: int, j: int) -> int:
    """The digit of n in position j (0 = least significant); 0 beyond the length."""
    _check_base(q)
    _check_natural(n)
    if j < 0:
        raise ValueError(f"digit position must be >= 0, got {j}")
    return (n // q**j) % q


def sum_digits(n: int, q: int) -> int:
    """Sum of the base-q digits of n."""
    _check_base(q)
    _check_natural(n)
    if q == 2:
        return n.bit_count()
    s = 0
    while n:
        n, r = divmod(n, q)
        s += r
    return s


def valuation(n: int, p: int) -> int | float:
    """Largest e with p**e dividing n; INFINITE for n == 0.

    The infinite value compares greater than every finite valuation, which
    is exactly what divisibility scans need when they hit a zero term.
    """
    _check_base(p)
    _check_natural(n)
    if n == 0:
        return INFINITE
    if p == 2:
        return ((n & -n).bit_length()) - 1
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def factorial_valuation(n: int, p: int) -> int:
    """Exponent of the prime p in n!, computed as (n - sum_digits(n, p)) / (p - 1).

    Never builds n! itself, so it stays cheap for huge n.
    """
    _check_natural(n)
    if not is_prime(p):
        raise ValueError(f"factorial_valuation requires a prime base, got {p}")
    num = n - sum_digits(n, p)
    assert num % (p - 1) == 0
    return num // (p - 1)
