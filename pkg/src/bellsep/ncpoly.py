"""Exact polynomials in per-site dichotomic generators.

Each site carries three generators: ``A`` (symbol 0), ``A'`` (1) and ``A''``
(2). Two rewrite regimes are supported:

* classical: generators commute and square to one, so every site word becomes
  a set of distinct symbols;
* quantum: on each site the generators form an anticommuting involutive
  triple, ``A A' = i A''`` and cyclic, so every site word reduces to at most
  one symbol times a power of ``i``.

Generators on different sites always commute; a term stores one word per site.

Text grammar (whitespace is insignificant)::

    poly   := ['+'|'-'] term (('+'|'-') term)*
    term   := coeff ['*'] factor ('*'? factor)* | coeff | factor ('*'? factor)*
    coeff  := scalar | '(' ['+'|'-'] scalar (('+'|'-') scalar)* ')'
    scalar := INT ['i'] ['/' INT] | 'i' ['/' INT]
    factor := 'A'..'Z' followed by zero, one or two "'" marks

``3i/4`` means 3i/4 and ``(1/2+i/2)`` is a mixed Gaussian rational.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .bell_operators import MeasurementSettings, mk_coefficients
from .config import CLASSICAL_MAX_SITES
from .errors import CapacityError, InvalidInputError, ParseError
from .tensor_core import kron_all

SYMBOL_MARKS = ("", "'", "''")


class Mode(str, enum.Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"


@total_ordering
@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            raise TypeError("floating-point complex values are not exact")
        return cls(Fraction(value), Fraction(0))

    def __add__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.of(other))

    def __mul__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def times_i_power(self, p: int) -> "GaussianRational":
        p %= 4
        re, im = self.re, self.im
        for _ in range(p):
            re, im = -im, re
        return GaussianRational(re, im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __lt__(self, other):
        o = GaussianRational.of(other)
        return (self.re, self.im) < (o.re, o.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        return _format_coefficient(self, bare_unit=False)


ZERO = GaussianRational()
ONE = GaussianRational(Fraction(1))
I_UNIT = GaussianRational(Fraction(0), Fraction(1))

Word = tuple  # tuple[int, ...] of symbols at one site


@dataclass(frozen=True)
class NCTerm:
    coefficient: GaussianRational
    words: tuple  # one Word per site

    @property
    def key(self) -> tuple:
        return self.words

    def is_constant(self) -> bool:
        return all(len(w) == 0 for w in self.words)


@dataclass(frozen=True)
class NCPolynomial:
    """Polynomial over ``n_parties`` sites; ``mode`` records the canonical form, if any."""

    n_parties: int
    terms: tuple
    mode: Mode | None = field(default=None, compare=False)

    def __str__(self):
        return serialize(self)

    def __len__(self):
        return len(self.terms)

    def as_dict(self) -> dict:
        return {t.words: t.coefficient for t in self.terms}


# ---------------------------------------------------------------- construction

def constant(value, n_parties: int) -> NCPolynomial:
    c = GaussianRational.of(value)
    terms = (NCTerm(c, ((),) * n_parties),) if c else ()
    return NCPolynomial(n_parties, terms)


def generator(site: int, symbol: int, n_parties: int) -> NCPolynomial:
    if not 0 <= site < n_parties or symbol not in (0, 1, 2):
        raise InvalidInputError(f"no generator ({site}, {symbol}) on {n_parties} sites")
    words = tuple((symbol,) if s == site else () for s in range(n_parties))
    return NCPolynomial(n_parties, (NCTerm(ONE, words),))


def mk_polynomial(n: int) -> NCPolynomial:
    """Symbolic MK polynomial, one term per nonzero coefficient of ``mk_coefficients``."""
    coeffs = mk_coefficients(n)
    terms = [NCTerm(GaussianRational.of(c), tuple((ki,) for ki in k)) for k, c in coeffs.nonzero().items()]
    return canonicalize(NCPolynomial(n, tuple(terms)), Mode.QUANTUM)


# ---------------------------------------------------------------- rewriting

def _reduce_classical(word: Sequence[int]) -> tuple:
    counts = [0, 0, 0]
    for s in word:
        counts[s] += 1
    return tuple(s for s in range(3) if counts[s] % 2), 0


def _reduce_quantum(word: Sequence[int]) -> tuple:
    """Reduce a site word in the anticommuting triple; returns (word, power of i)."""
    current = None
    phase = 0
    for s in word:
        if current is None:
            current = s
        elif current == s:
            current = None
        else:
            third = 3 - current - s
            # (0,1), (1,2), (2,0) pick up +i; reversed order -i
            phase += 1 if (s - current) % 3 == 1 else 3
            current = third
    return ((current,) if current is not None else ()), phase % 4


def canonicalize(p: NCPolynomial, mode: Mode | str) -> NCPolynomial:
    mode = Mode(mode)
    reduce_word = _reduce_classical if mode is Mode.CLASSICAL else _reduce_quantum
    merged: dict = {}
    for term in p.terms:
        phase = 0
        words = []
        for w in term.words:
            reduced, ph = reduce_word(w)
            words.append(reduced)
            phase += ph
        key = tuple(words)
        merged[key] = merged.get(key, ZERO) + term.coefficient.times_i_power(phase)
    terms = tuple(NCTerm(c, k) for k, c in sorted(merged.items()) if c)
    return NCPolynomial(p.n_parties, terms, mode)


def is_canonical(p: NCPolynomial, mode: Mode | str) -> bool:
    return canonicalize(p, mode) == p


def add(p: NCPolynomial, q: NCPolynomial, mode: Mode | str | None = None) -> NCPolynomial:
    _same_sites(p, q)
    out = NCPolynomial(p.n_parties, p.terms + q.terms)
    return canonicalize(out, mode) if mode is not None else out


def scale(p: NCPolynomial, factor) -> NCPolynomial:
    c = GaussianRational.of(factor)
    terms = tuple(NCTerm(t.coefficient * c, t.words) for t in p.terms if t.coefficient * c)
    return NCPolynomial(p.n_parties, terms, p.mode)


def multiply(p: NCPolynomial, q: NCPolynomial, mode: Mode | str) -> NCPolynomial:
    _same_sites(p, q)
    terms = []
    for a in p.terms:
        for b in q.terms:
            words = tuple(wa + wb for wa, wb in zip(a.words, b.words))
            terms.append(NCTerm(a.coefficient * b.coefficient, words))
    return canonicalize(NCPolynomial(p.n_parties, tuple(terms)), mode)


def _same_sites(p: NCPolynomial, q: NCPolynomial):
    if p.n_parties != q.n_parties:
        raise InvalidInputError(f"site counts differ: {p.n_parties} vs {q.n_parties}")


# ---------------------------------------------------------------- classical evaluation

def classical_max(p: NCPolynomial, max_sites: int = CLASSICAL_MAX_SITES) -> Fraction:
    """Exact maximum over +-1 assignments to every (site, symbol) generator present."""
    if p.n_parties > max_sites:
        raise CapacityError(f"classical enumeration limited to {max_sites} sites, got {p.n_parties}")
    if not is_canonical(p, Mode.CLASSICAL):
        raise InvalidInputError("classical_max needs a polynomial in canonical classical form")
    if any(not t.coefficient.is_real for t in p.terms):
        raise InvalidInputError("classical_max needs real coefficients")
    variables = sorted({(site, s) for t in p.terms for site, w in enumerate(t.words) for s in w})
    bit = {v: j for j, v in enumerate(variables)}
    denom = 1
    for t in p.terms:
        denom = math.lcm(denom, t.coefficient.re.denominator)
    table = np.zeros(1 << len(variables), dtype=np.int64)
    for t in p.terms:
        mask = 0
        for site, w in enumerate(t.words):
            for s in w:
                mask |= 1 << bit[(site, s)]
        table[mask] += int(t.coefficient.re * denom)
    best, _ = kernels.walsh_max(table)
    return Fraction(best, denom)


@dataclass(frozen=True)
class Counterpart:
    poly: NCPolynomial
    max: Fraction


def lhv_counterpart(p_quantum: NCPolynomial, max_sites: int = CLASSICAL_MAX_SITES) -> Counterpart:
    """Read each canonical quantum term as a product of independent +-1 variables.

    ``A''`` becomes a fresh classical variable rather than a product of ``A``
    and ``A'``. Beyond two sites this construction is an extrapolation of the
    two-site counterpart.
    """
    if not is_canonical(p_quantum, Mode.QUANTUM):
        raise InvalidInputError("lhv_counterpart needs a polynomial in canonical quantum form")
    if any(not t.coefficient.is_real for t in p_quantum.terms):
        raise InvalidInputError("non-Hermitian input: imaginary coefficients survive canonicalization")
    poly = NCPolynomial(p_quantum.n_parties, p_quantum.terms, Mode.CLASSICAL)
    return Counterpart(poly, classical_max(poly, max_sites=max_sites))


# ---------------------------------------------------------------- matrices

def to_matrix(p: NCPolynomial, settings: MeasurementSettings) -> np.ndarray:
    """Substitute the measurement operators; ``A''`` becomes [A, A']/2i."""
    n = p.n_parties
    if settings.n_parties != n:
        raise InvalidInputError(f"settings cover {settings.n_parties} parties, polynomial has {n}")
    gens = [
        [settings.observable(i, 0), settings.observable(i, 1), settings.double_primed(i)]
        for i in range(n)
    ]
    eye = np.eye(2, dtype=complex)
    out = np.zeros((2**n, 2**n), dtype=complex)
    for t in p.terms:
        factors = []
        for i, w in enumerate(t.words):
            m = eye
            for s in w:
                m = m @ gens[i][s]
            factors.append(m)
        out += complex(t.coefficient) * kron_all(factors)
    return out


# ---------------------------------------------------------------- text

def _format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _format_imag(b: Fraction) -> str:
    num = "" if b.numerator == 1 else str(b.numerator)
    return f"{num}i" if b.denominator == 1 else f"{num}i/{b.denominator}"


def _format_coefficient(c: GaussianRational, bare_unit: bool) -> str:
    """Unsigned magnitude for real or imaginary ``c``; parenthesized otherwise."""
    if c.is_real:
        mag = abs(c.re)
        return "" if bare_unit and mag == 1 else _format_fraction(mag)
    if c.re == 0:
        return _format_imag(abs(c.im))
    sign = "+" if c.im > 0 else "-"
    return f"({_format_fraction(c.re)}{sign}{_format_imag(abs(c.im))})"


def _is_negative(c: GaussianRational) -> bool:
    if c.is_real:
        return c.re < 0
    return c.re == 0 and c.im < 0


def _format_term(t: NCTerm) -> tuple:
    factors = [
        chr(ord("A") + site) + SYMBOL_MARKS[s] for site, w in enumerate(t.words) for s in w
    ]
    negative = _is_negative(t.coefficient)
    c = -t.coefficient if negative else t.coefficient
    head = _format_coefficient(c, bare_unit=bool(factors))
    body = " ".join(([head] if head else []) + factors)
    return negative, body


def serialize(p: NCPolynomial) -> str:
    if not p.terms:
        return "0"
    parts = []
    for j, t in enumerate(p.terms):
        negative, body = _format_term(t)
        if j == 0:
            parts.append(("-" if negative else "") + body)
        else:
            parts.append(("- " if negative else "+ ") + body)
    return " ".join(parts)


class _Parser:
    def __init__(self, text: str, n_parties: int | None):
        self.text = text
        self.pos = 0
        self.n_parties = n_parties

    def error(self, message, pos=None):
        raise ParseError(message, position=self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def scalar(self) -> GaussianRational:
        start = self.pos
        num = 1
        ch = self.peek()
        if ch.isdigit():
            num = self.integer()
        elif ch != "i":
            self.error("expected a coefficient")
        imaginary = False
        if self.peek() == "i":
            self.take()
            imaginary = True
        den = 1
        if self.peek() == "/":
            self.take()
            den = self.integer()
            if den == 0:
                self.error("zero denominator", start)
        value = Fraction(num, den)
        return GaussianRational(Fraction(0), value) if imaginary else GaussianRational(value)

    def coefficient(self) -> GaussianRational:
        if self.peek() != "(":
            return self.scalar()
        self.take()
        total = ZERO
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.take() == "-" else 1
        while True:
            total = total + self.scalar() * sign
            ch = self.peek()
            if ch == ")":
                self.take()
                return total
            if ch not in ("+", "-") or ch == "":
                self.error("expected '+', '-' or ')' in coefficient")
            sign = -1 if self.take() == "-" else 1

    def factor(self) -> tuple:
        start = self.pos
        ch = self.take()
        site = ord(ch) - ord("A")
        marks = 0
        while self.pos < len(self.text) and self.text[self.pos] == "'":
            marks += 1
            self.pos += 1
        if marks > 2:
            self.error("at most two prime marks per generator", start)
        if self.n_parties is not None and site >= self.n_parties:
            self.error(f"site {ch} exceeds the configured {self.n_parties} sites", start)
        return site, marks

    def term(self):
        self.skip()
        start = self.pos
        coeff = ONE
        factors = []
        ch = self.peek()
        if ch.isdigit() or ch in ("i", "("):
            coeff = self.coefficient()
            if self.peek() == "*":
                self.take()
        while True:
            ch = self.peek()
            if ch and "A" <= ch <= "Z":
                factors.append(self.factor())
                if self.peek() == "*":
                    self.take()
                    if not ("A" <= self.peek() <= "Z") or self.peek() == "":
                        self.error("expected a generator after '*'")
                continue
            break
        if self.pos == start:
            self.error("expected a term")
        return coeff, factors

    def polynomial(self):
        terms = []
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        while True:
            coeff, factors = self.term()
            terms.append((coeff * sign, factors))
            ch = self.peek()
            if ch == "":
                return terms
            if ch not in ("+", "-"):
                self.error(f"unexpected character {ch!r}")
            sign = -1 if self.take() == "-" else 1


def parse_polynomial(text: str, n_parties: int | None = None) -> NCPolynomial:
    """Parse text into an unreduced polynomial; zero-coefficient terms are dropped."""
    raw = _Parser(text, n_parties).polynomial()
    n = n_parties
    if n is None:
        n = max((site + 1 for _, fs in raw for site, _ in fs), default=1)
    terms = []
    for coeff, factors in raw:
        if not coeff:
            continue
        words = [[] for _ in range(n)]
        for site, s in factors:
            words[site].append(s)
        terms.append(NCTerm(coeff, tuple(tuple(w) for w in words)))
    return NCPolynomial(n, tuple(terms))


def from_terms(n_parties: int, items: Iterable) -> NCPolynomial:
    """Build from ``(coefficient, words)`` pairs without rewriting."""
    terms = tuple(NCTerm(GaussianRational.of(c), tuple(tuple(w) for w in words)) for c, words in items)
    return NCPolynomial(n_parties, terms)
