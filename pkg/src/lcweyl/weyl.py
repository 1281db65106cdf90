"""The Weyl algebra ``A_m(Q)`` in normal order (all X's left of all d's).

An element is a finite sum ``sum c * X^alpha d^beta``.  Products are
re-normalized eagerly using, per variable,

    d^b X^c = sum_k  C(b, k) * c!/(c-k)! * X^(c-k) d^(b-k)

and commutativity of distinct variables.  Grading: ``deg X_i = 1``,
``deg d_i = -1``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import comb
from typing import Iterator, Mapping, Sequence

from .exactlinalg import RatMatrix, as_fraction

__all__ = [
    "ParseError",
    "WeylElement",
    "WindowOverflowError",
    "MonomialBasis",
    "action_matrix",
    "apply",
    "degree",
    "euler",
    "fourier",
    "inverse_fourier",
    "multiply",
    "parse_weyl",
]

Exponents = tuple[int, ...]
Key = tuple[Exponents, Exponents]


class ParseError(ValueError):
    pass


class WindowOverflowError(ValueError):
    """An operator maps a basis monomial outside the supplied basis."""

    def __init__(self, monomial: Exponents):
        self.monomial = monomial
        super().__init__(f"image monomial X^{monomial} escapes the supplied basis")


def _falling(c: int, k: int) -> int:
    out = 1
    for t in range(k):
        out *= c - t
    return out


class WeylElement:
    """Normal-ordered element of ``A_m(Q)``; immutable."""

    __slots__ = ("m", "_terms", "_hash")

    def __init__(self, m: int, terms: Mapping[Key, object] | None = None):
        if m < 0:
            raise ValueError("number of variables must be non-negative")
        self.m = m
        clean: dict[Key, Fraction] = {}
        for (alpha, beta), c in (terms or {}).items():
            alpha, beta = tuple(alpha), tuple(beta)
            if len(alpha) != m or len(beta) != m:
                raise ValueError(f"exponent vectors must have length {m}")
            if min(alpha + beta, default=0) < 0:
                raise ValueError("exponents must be non-negative")
            c = as_fraction(c)
            if c:
                clean[(alpha, beta)] = clean.get((alpha, beta), Fraction(0)) + c
        self._terms = {k: v for k, v in clean.items() if v}
        self._hash = None

    # -- constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, m: int, c=1) -> "WeylElement":
        z = (0,) * m
        return cls(m, {(z, z): c})

    @classmethod
    def x(cls, i: int, m: int) -> "WeylElement":
        """The generator ``X_i`` (1-based)."""
        return cls(m, {(_unit(i, m), (0,) * m): 1})

    @classmethod
    def d(cls, i: int, m: int) -> "WeylElement":
        """The generator ``d_i`` (1-based)."""
        return cls(m, {((0,) * m, _unit(i, m)): 1})

    @classmethod
    def monomial(cls, alpha: Sequence[int], beta: Sequence[int], c=1) -> "WeylElement":
        return cls(len(alpha), {(tuple(alpha), tuple(beta)): c})

    # -- access -----------------------------------------------------------------
    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- arithmetic ---------------------------------------------------------------
    def _check(self, other: "WeylElement") -> None:
        if self.m != other.m:
            raise ValueError(f"variable counts differ: {self.m} vs {other.m}")

    def _coerce(self, other) -> "WeylElement":
        if isinstance(other, WeylElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return WeylElement.constant(self.m, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return WeylElement(self.m, terms)

    __radd__ = __add__

    def __neg__(self) -> "WeylElement":
        return WeylElement(self.m, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return WeylElement(self.m, {k: v * other for k, v in self._terms.items()})
        if isinstance(other, WeylElement):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return WeylElement(self.m, {k: v * other for k, v in self._terms.items()})
        return NotImplemented

    def __pow__(self, k: int) -> "WeylElement":
        if k < 0:
            raise ValueError("negative powers are not defined in the Weyl algebra")
        out = WeylElement.constant(self.m)
        for _ in range(k):
            out = multiply(out, self)
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = WeylElement.constant(self.m, other)
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.m == other.m and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.m, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"WeylElement(m={self.m}, {format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)


def _unit(i: int, m: int) -> Exponents:
    if not 1 <= i <= m:
        raise ValueError(f"variable index {i} outside 1..{m}")
    return tuple(1 if j == i - 1 else 0 for j in range(m))


def _commute_monomials(beta: Exponents, gamma: Exponents) -> list[tuple[Exponents, Exponents, int]]:
    """Normal order of ``d^beta X^gamma`` as ``[(X-exps, d-exps, coeff)]``."""
    result = [((), (), 1)]
    for b, c in zip(beta, gamma):
        step = [(c - k, b - k, comb(b, k) * _falling(c, k)) for k in range(min(b, c) + 1)]
        result = [(xa + (xe,), da + (de,), ca * ce) for xa, da, ca in result for xe, de, ce in step]
    return result


def multiply(a: WeylElement, b: WeylElement) -> WeylElement:
    a._check(b)
    out: dict[Key, Fraction] = {}
    for (alpha, beta), c1 in a._terms.items():
        for (gamma, delta), c2 in b._terms.items():
            for xs, ds, k in _commute_monomials(beta, gamma):
                key = (
                    tuple(p + q for p, q in zip(alpha, xs)),
                    tuple(p + q for p, q in zip(ds, delta)),
                )
                out[key] = out.get(key, Fraction(0)) + c1 * c2 * k
    return WeylElement(a.m, out)


def euler(m: int) -> WeylElement:
    """``sum_i X_i d_i``."""
    if m < 1:
        raise ValueError("the Euler operator needs m >= 1")
    return sum((WeylElement.x(i, m) * WeylElement.d(i, m) for i in range(2, m + 1)), WeylElement.x(1, m) * WeylElement.d(1, m))


def degree(a: WeylElement) -> int | None:
    """``|alpha| - |beta|`` when uniform over the terms; None if inhomogeneous (or zero)."""
    degs = {sum(alpha) - sum(beta) for alpha, beta in a._terms}
    if len(degs) != 1:
        return None
    return degs.pop()


def _substitute(a: WeylElement, x_images: Sequence[WeylElement], d_images: Sequence[WeylElement]) -> WeylElement:
    m = a.m
    out = WeylElement(m)
    one = WeylElement.constant(m)
    for (alpha, beta), c in a._terms.items():
        term = one
        for i, e in enumerate(alpha):
            term = term * (x_images[i] ** e)
        for i, e in enumerate(beta):
            term = term * (d_images[i] ** e)
        out = out + term * c
    return out


def fourier(a: WeylElement) -> WeylElement:
    """Automorphism with ``X_i -> d_i`` and ``d_i -> -X_i``."""
    m = a.m
    return _substitute(a, [WeylElement.d(i, m) for i in range(1, m + 1)], [-WeylElement.x(i, m) for i in range(1, m + 1)])


def inverse_fourier(a: WeylElement) -> WeylElement:
    """Inverse automorphism: ``X_i -> -d_i``, ``d_i -> X_i``."""
    m = a.m
    return _substitute(a, [-WeylElement.d(i, m) for i in range(1, m + 1)], [WeylElement.x(i, m) for i in range(1, m + 1)])


# ---------------------------------------------------------------------------
# action on Laurent monomials


class MonomialBasis:
    """Finite ordered set of Laurent monomials ``X^v``, ``v`` in Z^m."""

    def __init__(self, exponents: Sequence[Sequence[int]], m: int | None = None):
        self.exponents: tuple[Exponents, ...] = tuple(tuple(v) for v in exponents)
        if m is None:
            if not self.exponents:
                raise ValueError("cannot infer m from an empty basis")
            m = len(self.exponents[0])
        if any(len(v) != m for v in self.exponents):
            raise ValueError("all exponent vectors must have length m")
        if len(set(self.exponents)) != len(self.exponents):
            raise ValueError("duplicate basis monomials")
        self.m = m
        self.index = {v: i for i, v in enumerate(self.exponents)}

    def __len__(self) -> int:
        return len(self.exponents)

    def vector(self, mapping: Mapping[Exponents, object]) -> tuple[Fraction, ...]:
        out = [Fraction(0)] * len(self)
        for v, c in mapping.items():
            c = as_fraction(c)
            if not c:
                continue
            if tuple(v) not in self.index:
                raise WindowOverflowError(tuple(v))
            out[self.index[tuple(v)]] += c
        return tuple(out)


def _act_on_monomial(a: WeylElement, v: Exponents) -> dict[Exponents, Fraction]:
    out: dict[Exponents, Fraction] = {}
    for (alpha, beta), c in a._terms.items():
        k = 1
        for vi, bi in zip(v, beta):
            k *= _falling(vi, bi)
            if not k:
                break
        if not k:
            continue
        w = tuple(vi - bi + ai for vi, bi, ai in zip(v, beta, alpha))
        out[w] = out.get(w, Fraction(0)) + c * k
    return {w: c for w, c in out.items() if c}


def apply(a: WeylElement, basis: MonomialBasis, vector: Sequence) -> tuple[Fraction, ...]:
    """Act on a coefficient vector over ``basis`` by ``d_i X^v = v_i X^(v-e_i)``, ``X_i X^v = X^(v+e_i)``.

    Raises WindowOverflowError when a nonzero image leaves the basis.
    """
    if a.m != basis.m:
        raise ValueError("variable counts differ")
    if len(vector) != len(basis):
        raise ValueError("vector length does not match basis")
    acc: dict[Exponents, Fraction] = {}
    for v, c in zip(basis.exponents, vector):
        c = as_fraction(c)
        if not c:
            continue
        for w, k in _act_on_monomial(a, v).items():
            acc[w] = acc.get(w, Fraction(0)) + c * k
    return basis.vector(acc)


def action_matrix(a: WeylElement, basis: MonomialBasis) -> RatMatrix:
    n = len(basis)
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(apply(a, basis, e))
    return RatMatrix.from_columns(cols, n)


# ---------------------------------------------------------------------------
# text format


def _format_coeff(c: Fraction) -> str:
    return str(c)


def _format_monomial(alpha: Exponents, beta: Exponents) -> str:
    parts = []
    for letter, exps in (("x", alpha), ("d", beta)):
        for i, e in enumerate(exps, start=1):
            if e == 1:
                parts.append(f"{letter}{i}")
            elif e > 1:
                parts.append(f"{letter}{i}^{e}")
    return "*".join(parts)


def _sort_key(key: Key):
    alpha, beta = key
    return (-(sum(alpha) + sum(beta)), tuple(-e for e in alpha), tuple(-e for e in beta))


def format_element(a: WeylElement) -> str:
    """Canonical text: terms by descending total order, then X-exponents, then d-exponents."""
    if not a._terms:
        return "0"
    chunks = []
    for key in sorted(a._terms, key=_sort_key):
        c = a._terms[key]
        mono = _format_monomial(*key)
        mag = abs(c)
        if not mono:
            body = _format_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_format_coeff(mag)}*{mono}"
        if not chunks:
            chunks.append(("-" if c < 0 else "") + body)
        else:
            chunks.append((" - " if c < 0 else " + ") + body)
    return "".join(chunks)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([xd])(\d+)|(\^)|(\*)|(\+)|(-)|(\()|(\)))")


def _tokenize(text: str) -> list[tuple[str, object]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at position {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        num, letter, idx, caret, star, plus, minus, lp, rp = m.groups()
        if num is not None:
            tokens.append(("num", Fraction(num)))
        elif letter is not None:
            tokens.append(("gen", (letter, int(idx))))
        elif caret:
            tokens.append(("^", None))
        elif star:
            tokens.append(("*", None))
        elif plus:
            tokens.append(("+", None))
        elif minus:
            tokens.append(("-", None))
        elif lp:
            tokens.append(("(", None))
        else:
            tokens.append((")", None))
    return tokens


def parse_weyl(text: str, m: int | None = None) -> WeylElement:
    """Parse e.g. ``"x1*d1 + x2*d2"``, ``"d1^2*x1"``, ``"-1/2*x1 + 3"``.

    Grammar (whitespace-insensitive)::

        expr   := ['-'] term (('+' | '-') term)*
        term   := factor ('*' factor)*
        factor := atom ['^' INT]
        atom   := 'x' INT | 'd' INT | INT ['/' INT] | '(' expr ')'

    Products are taken in the Weyl algebra, left to right.  ``m`` defaults to
    the largest generator index that appears (at least 1).
    """
    if not text or not text.strip():
        raise ParseError("empty expression")
    tokens = _tokenize(text)
    used = [v[1] for k, v in tokens if k == "gen"]
    if any(i < 1 for i in used):
        raise ParseError("generator indices start at 1")
    need = max(used, default=1)
    if m is None:
        m = need
    elif m < need:
        raise ParseError(f"expression mentions index {need} but m = {m}")
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take(kind):
        nonlocal pos
        if peek() != kind:
            raise ParseError(f"expected {kind!r} at token {pos}")
        tok = tokens[pos]
        pos += 1
        return tok[1]

    def atom() -> WeylElement:
        nonlocal pos
        kind = peek()
        if kind == "num":
            return WeylElement.constant(m, take("num"))
        if kind == "gen":
            letter, i = take("gen")
            return WeylElement.x(i, m) if letter == "x" else WeylElement.d(i, m)
        if kind == "(":
            take("(")
            e = expr()
            take(")")
            return e
        raise ParseError(f"unexpected token at position {pos}")

    def factor() -> WeylElement:
        base = atom()
        if peek() == "^":
            take("^")
            k = take("num")
            if k.denominator != 1:
                raise ParseError("exponents must be integers")
            base = base ** int(k)
        return base

    def term() -> WeylElement:
        out = factor()
        while peek() == "*":
            take("*")
            out = out * factor()
        return out

    def expr() -> WeylElement:
        sign = 1
        if peek() == "-":
            take("-")
            sign = -1
        out = term() * sign
        while peek() in ("+", "-"):
            kind = peek()
            take(kind)
            t = term()
            out = out + t if kind == "+" else out - t
        return out

    result = expr()
    if pos != len(tokens):
        raise ParseError(f"trailing input at token {pos}")
    return result
