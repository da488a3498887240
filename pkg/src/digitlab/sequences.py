"""Factorial-ratio sequence specifications: parsing, validation, valuations.

A sequence spec describes S(n) = P(n) * g^n / prod(E_i n + F_i)
* prod((C_i n)!) / prod((D_i n)!) in fully normalized form.  Valuations are
computed from digit sums alone; S(n) itself is never multiplied out.

Grammar for the text form (whitespace insignificant, INT signed decimal):

    expr     := term (('*' | '/') term)*
    term     := INT | INT '^' 'n' | 'n' '!'? | '(' linear ')' '!'?
              | 'binom' '(' linear ',' linear ')' | poly
    linear   := INT? 'n' (('+' | '-') INT)? | INT
    poly     := 'poly' '[' INT (',' INT)* ']'

'binom(a, b)' is sugar for a!/(b!(a-b)!).  A shifted factorial (an+b)! with
b >= 1 is rewritten as (an)! times the linear factors (an+1)..(an+b), which
land in the numerator polynomial or the denominator factor list depending on
which side the factorial sits; negative shifts are rejected.  The geometric
'g^n' atom covers counting sequences that carry a pure exponential factor.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .digits import INFINITE, factorial_valuation, is_prime, sum_digits, valuation

__all__ = [
    "SequenceSpec",
    "ValidationReport",
    "LandauVerdict",
    "SpecParseError",
    "SpecValidationError",
    "PoleError",
    "parse",
    "render",
    "landau_check",
    "load_corpus",
    "corpus_path",
]


class SpecParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        if position is None:
            super().__init__(message)
        else:
            super().__init__(f"{message} (at position {position})")
        self.position = position


class SpecValidationError(ValueError):
    pass


class PoleError(ValueError):
    """A linear denominator factor vanishes at this n."""

    def __init__(self, n: int, factor: tuple[int, int]):
        e, f = factor
        super().__init__(f"denominator factor {e}n+{f} vanishes at n={n}")
        self.n = n
        self.factor = factor


# ---------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class SequenceSpec:
    """Normalized description of a factorial-ratio sequence."""

    poly: tuple[int, ...]                      # numerator P(n), constant first
    linear_factors: tuple[tuple[int, int], ...]  # denominator (E, F) with E > 0
    c_factors: tuple[int, ...]                 # numerator factorial multipliers
    d_factors: tuple[int, ...]                 # denominator factorial multipliers
    geom_num: int = 1                          # numerator g in g^n
    geom_den: int = 1
    name: str | None = None

    @property
    def trivial(self) -> bool:
        return sorted(self.c_factors) == sorted(self.d_factors)

    def poly_eval(self, n: int) -> int:
        acc = 0
        for c in reversed(self.poly):
            acc = acc * n + c
        return acc

    def pole_positions(self) -> frozenset[int]:
        """Nonnegative n at which some denominator factor vanishes."""
        poles = set()
        for e, f in self.linear_factors:
            if f <= 0 and (-f) % e == 0:
                poles.add((-f) // e)
        return frozenset(poles)

    def validate(self) -> "ValidationReport":
        return validate(self)

    def valuation(self, n: int, p: int) -> int | float:
        """Exact v_p(S(n)) via Legendre's formula; INFINITE iff P(n) = 0.

        May be negative; a negative value witnesses non-integrality at n.
        """
        _check_prime(p)
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        lf_val = 0
        for e, f in self.linear_factors:
            v = e * n + f
            if v == 0:
                raise PoleError(n, (e, f))
            lf_val += _vp(abs(v), p)
        pn = self.poly_eval(n)
        if pn == 0:
            return INFINITE
        val = _vp(abs(pn), p) - lf_val
        if self.geom_num > 1:
            val += n * _vp(self.geom_num, p)
        if self.geom_den > 1:
            val -= n * _vp(self.geom_den, p)
        for c in self.c_factors:
            val += factorial_valuation(c * n, p)
        for d in self.d_factors:
            val -= factorial_valuation(d * n, p)
        return val

    def valuation_lower_bound(self, n: int, p: int) -> Fraction:
        """The digit-sum lower bound on v_p(S(n)).

        Exactly v_p(S(n)) - v_p(P(n)) whenever P(n) != 0: dropping the
        nonnegative polynomial term is the only inequality involved.
        """
        _check_prime(p)
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        bound = Fraction(0)
        for e, f in self.linear_factors:
            v = e * n + f
            if v == 0:
                raise PoleError(n, (e, f))
            bound -= _vp(abs(v), p)
        if self.geom_num > 1:
            bound += n * _vp(self.geom_num, p)
        if self.geom_den > 1:
            bound -= n * _vp(self.geom_den, p)
        digit_sum = sum(sum_digits(c * n, p) for c in self.c_factors)
        digit_sum -= sum(sum_digits(d * n, p) for d in self.d_factors)
        return bound - Fraction(digit_sum, p - 1)

    def render(self) -> str:
        return render(self)


def _vp(n: int, p: int) -> int:
    v = valuation(n, p)
    assert v is not INFINITE
    return int(v)


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")


@dataclass
class ValidationReport:
    """Outcome of the structural checks on a spec."""

    trivial: bool
    c_reduced: tuple[int, ...]
    d_reduced: tuple[int, ...]
    warnings: list[str] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.c_reduced)

    @property
    def s(self) -> int:
        return len(self.d_reduced)

    @property
    def r_less_than_s(self) -> bool:
        return self.r < self.s


def validate(spec: SequenceSpec) -> ValidationReport:
    """Check the factorial balance condition and report structural facts.

    An unbalanced spec (sum C != sum D) is rejected outright.  Triviality
    (equal multisets) and the reduced-count comparison r < s are reported,
    not enforced: a trivial spec has constant factorial part and the
    almost-all divisibility behavior does not apply to it.
    """
    if sum(spec.c_factors) != sum(spec.d_factors):
        raise SpecValidationError(
            f"factorial multipliers are unbalanced: sum C = {sum(spec.c_factors)}"
            f" != sum D = {sum(spec.d_factors)}"
        )
    c_count = Counter(spec.c_factors)
    d_count = Counter(spec.d_factors)
    c_red = tuple(sorted((c_count - d_count).elements()))
    d_red = tuple(sorted((d_count - c_count).elements()))
    report = ValidationReport(trivial=spec.trivial, c_reduced=c_red, d_reduced=d_red)
    if report.trivial:
        report.warnings.append(
            "trivial spec: numerator and denominator factorial multisets are equal"
        )
    elif not report.r_less_than_s:
        report.warnings.append(
            f"after cancellation r = {report.r} >= s = {report.s}; integrality of "
            "the factorial ratio for all n is then impossible"
        )
    return report


# ---------------------------------------------------------------------------
# Landau integrality criterion


@dataclass
class LandauVerdict:
    passed: bool
    witness: Fraction | None
    value_at_witness: int | None
    min_value: int
    argmin: Fraction
    breakpoints: int


def landau_check(c_factors, d_factors) -> LandauVerdict:
    """Decide whether prod((C_i n)!) / prod((D_i n)!) is integral for every n.

    The criterion: f(x) = sum floor(C_i x) - sum floor(D_i x) >= 0 for all
    real x.  Under the balance condition f is 1-periodic and right-continuous,
    constant between the rationals k/m with m a multiplier, so evaluating f at
    every such breakpoint in [0, 1) with exact rational arithmetic is an exact
    decision procedure.  The left limit at each breakpoint equals the value at
    the previous one; it is recomputed independently as a consistency check.
    """
    c = tuple(int(x) for x in c_factors)
    d = tuple(int(x) for x in d_factors)
    if any(x < 1 for x in c + d):
        raise ValueError("factorial multipliers must be positive integers")
    if sum(c) != sum(d):
        raise SpecValidationError(
            f"factorial multipliers are unbalanced: sum C = {sum(c)} != sum D = {sum(d)}"
        )
    points = sorted({Fraction(k, m) for m in set(c) | set(d) for k in range(m)})

    def value_at(x: Fraction) -> int:
        return sum(m * x.numerator // x.denominator for m in c) - sum(
            m * x.numerator // x.denominator for m in d
        )

    def left_limit_at(x: Fraction) -> int:
        # lim f(t) as t -> x from below: floor(mx) drops to ceil(mx) - 1
        return sum(-((-m * x.numerator) // x.denominator) - 1 for m in c) - sum(
            -((-m * x.numerator) // x.denominator) - 1 for m in d
        )

    witness = None
    value_at_witness = None
    min_value = None
    argmin = points[0]
    prev_value = value_at(points[-1])  # f(1-) wraps to the last interval's value
    for idx, x in enumerate(points):
        if idx > 0:
            assert left_limit_at(x) == prev_value
        v = value_at(x)
        prev_value = v
        if min_value is None or v < min_value:
            min_value = v
            argmin = x
        if v < 0 and witness is None:
            witness = x
            value_at_witness = v
    return LandauVerdict(
        passed=witness is None,
        witness=witness,
        value_at_witness=value_at_witness,
        min_value=min_value,
        argmin=argmin,
        breakpoints=len(points),
    )


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    text = text.replace("−", "-").replace("·", "*")
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append(("NUM", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("NAME", m.group(2), m.start(2)))
        else:
            ch = m.group(3)
            if ch not in "()[]!*/+-^,":
                raise SpecParseError(f"unexpected character {ch!r}", m.start(3))
            tokens.append(("OP", ch, m.start(3)))
        pos = m.end()
    tokens.append(("END", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.idx = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def expect_op(self, ch: str) -> None:
        kind, val, pos = self.next()
        if kind != "OP" or val != ch:
            raise SpecParseError(f"expected {ch!r}, found {val or 'end of input'!r}", pos)

    def fail(self, message: str) -> SpecParseError:
        return SpecParseError(message, self.peek()[2])

    # -- grammar productions ------------------------------------------------

    def parse_expr(self) -> list[tuple[tuple, int]]:
        factors = self.parse_product()
        kind, val, _ = self.peek()
        if kind != "END":
            raise self.fail(f"expected '*', '/' or end of input, found {val!r}")
        return factors

    def parse_product(self) -> list[tuple[tuple, int]]:
        factors = self.parse_term(+1)
        while True:
            kind, val, _ = self.peek()
            if kind == "OP" and val in "*/":
                self.next()
                factors.extend(self.parse_term(+1 if val == "*" else -1))
            else:
                return factors

    def parse_term(self, exp: int) -> list[tuple[tuple, int]]:
        kind, val, pos = self.peek()
        if kind == "NUM" or (kind == "OP" and val in "+-"):
            value = self.signed_int()
            kind2, val2, _ = self.peek()
            if kind2 == "OP" and val2 == "^":
                self.next()
                kind3, val3, pos3 = self.next()
                if kind3 != "NAME" or val3 != "n":
                    raise SpecParseError("expected 'n' after '^'", pos3)
                if value < 1:
                    raise SpecParseError(f"geometric base must be >= 1, got {value}", pos)
                return [(("geom", value), exp)]
            return [(("const", value), exp)]
        if kind == "NAME" and val == "n":
            self.next()
            return [(self.maybe_factorial((1, 0)), exp)]
        if kind == "NAME" and val == "binom":
            self.next()
            self.expect_op("(")
            top = self.parse_linear()
            self.expect_op(",")
            bottom = self.parse_linear()
            self.expect_op(")")
            rest = (top[0] - bottom[0], top[1] - bottom[1])
            return [
                (("fact", top), exp),
                (("fact", bottom), -exp),
                (("fact", rest), -exp),
            ]
        if kind == "NAME" and val == "poly":
            self.next()
            self.expect_op("[")
            coeffs = [self.signed_int()]
            while self.peek()[:2] == ("OP", ","):
                self.next()
                coeffs.append(self.signed_int())
            self.expect_op("]")
            return [(("poly", tuple(coeffs)), exp)]
        if kind == "OP" and val == "(":
            # '(linear)' with optional '!', or a parenthesized subexpression;
            # try the linear reading first and backtrack if it does not close.
            saved = self.idx
            self.next()
            try:
                lin = self.parse_linear()
                if self.peek()[:2] == ("OP", ")"):
                    self.next()
                    return [(self.maybe_factorial(lin), exp)]
            except SpecParseError:
                pass
            self.idx = saved
            self.next()
            inner = self.parse_product()
            self.expect_op(")")
            return [(atom, e * exp) for atom, e in inner]
        raise self.fail(f"expected a factor, found {val or 'end of input'!r}")

    def maybe_factorial(self, lin: tuple[int, int]) -> tuple:
        if self.peek()[:2] == ("OP", "!"):
            self.next()
            return ("fact", lin)
        return ("linear", lin)

    def signed_int(self) -> int:
        sign = 1
        kind, val, pos = self.peek()
        if kind == "OP" and val in "+-":
            self.next()
            sign = -1 if val == "-" else 1
            kind, val, pos = self.peek()
        if kind != "NUM":
            raise SpecParseError(f"expected an integer, found {val or 'end of input'!r}", pos)
        self.next()
        return sign * int(val)

    def parse_linear(self) -> tuple[int, int]:
        kind, val, pos = self.peek()
        if kind == "NAME" and val == "n":
            self.next()
            e = 1
        else:
            e = self.signed_int()
            kind, val, _ = self.peek()
            if kind == "NAME" and val == "n":
                self.next()
            else:
                return (0, e)  # plain constant
        kind, val, _ = self.peek()
        if kind == "OP" and val in "+-":
            self.next()
            op = val
            kind2, val2, pos2 = self.peek()
            if kind2 != "NUM":
                raise SpecParseError(f"expected an integer after {op!r}", pos2)
            self.next()
            f = int(val2) if op == "+" else -int(val2)
            return (e, f)
        return (e, 0)


def parse(text: str, name: str | None = None) -> SequenceSpec:
    """Parse a sequence expression into normalized SequenceSpec form."""
    factors = _Parser(text).parse_expr()
    return _normalize(factors, name)


def _poly_mul(a: list[int], b: tuple[int, ...] | list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _normalize(factors: list[tuple[tuple, int]], name: str | None) -> SequenceSpec:
    poly = [1]
    den_const = 1
    linear_den: list[tuple[int, int]] = []
    c_list: list[int] = []
    d_list: list[int] = []
    geom_num = 1
    geom_den = 1

    def fold_const(c: int, exp: int) -> None:
        nonlocal poly, den_const
        if c == 0:
            raise SpecParseError("zero factor makes the sequence identically zero")
        if exp > 0:
            poly = [x * c for x in poly]
        else:
            if c < 0:
                poly = [-x for x in poly]
                c = -c
            den_const *= c

    def fold_linear(e: int, f: int, exp: int) -> None:
        nonlocal poly
        if e == 0:
            fold_const(f, exp)
            return
        if e < 0:
            e, f = -e, -f
            poly = [-x for x in poly]
        if exp > 0:
            poly = _poly_mul(poly, (f, e))
        else:
            linear_den.append((e, f))

    for (atom, exp) in factors:
        kind = atom[0]
        if kind == "const":
            fold_const(atom[1], exp)
        elif kind == "linear":
            e, f = atom[1]
            fold_linear(e, f, exp)
        elif kind == "fact":
            e, f = atom[1]
            if e == 0:
                if f < 0:
                    raise SpecParseError(f"factorial of a negative constant: ({f})!")
                fold_const(math.factorial(f), exp)
                continue
            if e < 0:
                raise SpecParseError(
                    f"factorial argument {e}n{f:+d} has negative leading coefficient"
                )
            if f < 0:
                raise SpecParseError(
                    f"shifted factorial ({e}n{f:+d})! has a negative shift; "
                    "rewrite it with an explicit (an)! and linear factors"
                )
            (c_list if exp > 0 else d_list).append(e)
            for j in range(1, f + 1):
                fold_linear(e, j, exp)
        elif kind == "poly":
            coeffs = list(atom[1])
            while len(coeffs) > 1 and coeffs[-1] == 0:
                coeffs.pop()
            if len(coeffs) == 1:
                fold_const(coeffs[0], exp)
            elif len(coeffs) == 2:
                fold_linear(coeffs[1], coeffs[0], exp)
            elif exp > 0:
                poly = _poly_mul(poly, coeffs)
            else:
                raise SpecParseError(
                    "denominator polynomial of degree >= 2; factor it into linear terms"
                )
        elif kind == "geom":
            g = atom[1]
            if g > 1:
                if exp > 0:
                    geom_num *= g
                else:
                    geom_den *= g
        else:  # pragma: no cover
            raise AssertionError(f"unknown atom {kind}")

    if den_const > 1:
        if any(c % den_const for c in poly):
            raise SpecParseError(
                f"constant denominator {den_const} does not divide the numerator "
                "polynomial; the sequence is not in factorial-ratio form"
            )
        poly = [c // den_const for c in poly]
    g = math.gcd(geom_num, geom_den)
    geom_num //= g
    geom_den //= g
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return SequenceSpec(
        poly=tuple(poly),
        linear_factors=tuple(sorted(linear_den)),
        c_factors=tuple(sorted(c_list)),
        d_factors=tuple(sorted(d_list)),
        geom_num=geom_num,
        geom_den=geom_den,
        name=name,
    )


# ---------------------------------------------------------------------------
# rendering and corpus loading


def _render_linear(e: int, f: int) -> str:
    head = "n" if e == 1 else f"{e}n"
    if f > 0:
        return f"{head} + {f}"
    if f < 0:
        return f"{head} - {-f}"
    return head


def render(spec: SequenceSpec) -> str:
    """Canonical text form; parsing it back yields an identical spec."""
    if len(spec.poly) == 1:
        head = str(spec.poly[0])
    else:
        head = "poly[" + ", ".join(str(c) for c in spec.poly) + "]"
    parts = [head]
    if spec.geom_num > 1:
        parts.append(f"* {spec.geom_num}^n")
    for c in spec.c_factors:
        parts.append(f"* ({_render_linear(c, 0)})!")
    if spec.geom_den > 1:
        parts.append(f"/ {spec.geom_den}^n")
    for e, f in spec.linear_factors:
        parts.append(f"/ ({_render_linear(e, f)})")
    for d in spec.d_factors:
        parts.append(f"/ ({_render_linear(d, 0)})!")
    return " ".join(parts)


def corpus_path() -> str:
    from importlib.resources import files

    return str(files("digitlab").joinpath("corpus/catalan_like.txt"))


def load_corpus(path: str | None = None) -> dict[str, SequenceSpec]:
    """Load named specs from a corpus file (one 'name : expr' per line)."""
    if path is None:
        path = corpus_path()
    specs: dict[str, SequenceSpec] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, expr = line.partition(":")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'name : expr'")
            name = name.strip()
            if name in specs:
                raise ValueError(f"{path}:{lineno}: duplicate spec name {name!r}")
            specs[name] = parse(expr.strip(), name=name)
    return specs
