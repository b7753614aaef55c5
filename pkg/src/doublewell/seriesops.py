"""Tiny exact symbolic ring used by the trans-series expansion.

SymExpr is a multivariate polynomial over Fraction in named formal symbols
("gamma", "lambda", "zeta2", ...).  It exists so the quantization-condition
expansion can run in exact arithmetic and so results can be compared term by
term against stored rational tables; it is deliberately not a computer
algebra system (no division by symbols, no simplification beyond collecting
terms).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

import mpmath as mp

__all__ = ["SymExpr"]

Monomial = tuple[tuple[str, int], ...]


def _norm(mono: Iterable[tuple[str, int]]) -> Monomial:
    acc: dict[str, int] = {}
    for name, p in mono:
        if p:
            acc[name] = acc.get(name, 0) + p
    return tuple(sorted((k, v) for k, v in acc.items() if v))


class SymExpr:
    """Immutable polynomial in formal symbols with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[_norm(mono)] = clean.get(_norm(mono), Fraction(0)) + c
        self.terms = {m: c for m, c in clean.items() if c}

    @classmethod
    def const(cls, value) -> "SymExpr":
        return cls({(): Fraction(value)})

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "SymExpr":
        return cls({((name, power),): Fraction(1)})

    zero: "SymExpr"  # assigned after class body
    one: "SymExpr"

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = SymExpr.const(other)
        if not isinstance(other, SymExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other) -> "SymExpr":
        if isinstance(other, (int, Fraction)):
            other = SymExpr.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return SymExpr(out)

    __radd__ = __add__

    def __neg__(self) -> "SymExpr":
        return SymExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "SymExpr":
        return self + (-other if isinstance(other, SymExpr)
                       else SymExpr.const(-Fraction(other)))

    def __rsub__(self, other) -> "SymExpr":
        return SymExpr.const(other) + (-self)

    def __mul__(self, other) -> "SymExpr":
        if isinstance(other, (int, Fraction)):
            if not other:
                return SymExpr()
            return SymExpr(
                {m: c * Fraction(other) for m, c in self.terms.items()}
            )
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _norm(m1 + m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return SymExpr(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SymExpr":
        return self * (Fraction(1) / Fraction(other))

    def coefficient(self, name: str, power: int) -> "SymExpr":
        """Polynomial multiplying name**power (the symbol removed)."""
        out = {}
        for mono, c in self.terms.items():
            d = dict(mono)
            if d.get(name, 0) == power:
                d.pop(name, None)
                out[_norm(d.items())] = c
        return SymExpr(out)

    def degree(self, name: str) -> int:
        return max((dict(m).get(name, 0) for m in self.terms), default=0)

    def symbols(self) -> set[str]:
        return {name for m in self.terms for name, _ in m}

    def constant_part(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def evaluate(self, values: Mapping[str, object]):
        """Numeric value with symbols drawn from `values` (mpf/mpc)."""
        total = mp.mpf(0)
        for mono, c in self.terms.items():
            term = mp.mpf(c.numerator) / c.denominator
            for name, p in mono:
                if name not in values:
                    raise KeyError(f"no value supplied for symbol {name!r}")
                term = term * values[name] ** p
            total = total + term
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for mono, c in sorted(self.terms.items()):
            sym = "*".join(
                name if p == 1 else f"{name}^{p}" for name, p in mono
            )
            bits.append(f"{c}*{sym}" if sym else f"{c}")
        return " + ".join(bits)


SymExpr.zero = SymExpr()
SymExpr.one = SymExpr.const(1)
