"""Evaluation of instanton contributions to double-well energy levels.

The nonperturbative part of an energy eigenvalue organizes itself in powers
of the instanton weight

    xi(g) = exp(-1/(6g)) / sqrt(pi g),

with the n-instanton sector carrying an extra polynomial in the logarithm
lambda(g) = ln(-2/g).  This module evaluates those sectors numerically from
an exact coefficient table, assembles the level separation (one instanton)
and the mean-level displacement (two instantons), and forms the diagnostic
ratio Delta(g) that compares spectral data against the Borel sum of the
perturbative series.

Branch convention: `side="above"` means lambda = ln(2/g) + i pi, the
continuation of ln(-2/g) reached from the upper half of the complex g
plane.  This is the choice for which the imaginary part of the two-instanton
sector cancels the imaginary part of the Borel sum taken along the ray
tilted above the positive axis; the opposite pairing would add the two
imaginary parts instead of cancelling them.

Precision is an explicit argument throughout; nothing touches the global
mpmath state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple

import mpmath as mp

__all__ = [
    "UnsupportedOrderError",
    "GammaRational",
    "EpsilonTable",
    "InstantonVariables",
    "DeltaReport",
    "instanton_variables",
    "instanton_energy",
    "separation_series",
    "displacement_series",
    "delta_asymptotic",
    "delta_asymptotic_terms",
    "delta_numeric",
]

EPSILON_SCHEMA = "doublewell/epsilon-table/v1"
DELTA_SCHEMA = "doublewell/delta-report/v1"


class UnsupportedOrderError(ValueError):
    """A requested order lies beyond the exactly known truncations."""


def _mpf(x) -> mp.mpf:
    """Coerce to mpf at the ambient precision; Fractions convert exactly.

    An mpf comes back unchanged: re-making it would silently round a
    high-precision value down to the ambient precision, which matters
    for inputs whose leading digits are about to cancel.
    """
    if isinstance(x, mp.mpf):
        return x
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


@dataclass(frozen=True)
class GammaRational:
    """An exact value r0 + r1*gamma with gamma Euler's constant."""

    r0: Fraction
    r1: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "r0", Fraction(self.r0))
        object.__setattr__(self, "r1", Fraction(self.r1))

    def __neg__(self) -> "GammaRational":
        return GammaRational(-self.r0, -self.r1)

    def __add__(self, other: "GammaRational") -> "GammaRational":
        return GammaRational(self.r0 + other.r0, self.r1 + other.r1)

    def scaled(self, f) -> "GammaRational":
        f = Fraction(f)
        return GammaRational(self.r0 * f, self.r1 * f)

    def evaluate(self, digits: int = 30) -> mp.mpf:
        with mp.workdps(digits):
            return +(
                mp.mpf(self.r0.numerator) / self.r0.denominator
                + mp.euler * self.r1.numerator / self.r1.denominator
            )

    def __str__(self) -> str:
        if not self.r1:
            return str(self.r0)
        if not self.r0:
            return f"{self.r1}*gamma"
        return f"{self.r0} + {self.r1}*gamma"


# The exactly known sector coefficients for the two lowest levels:
# one-instanton entries flip sign with parity, two-instanton entries do not.
# The list below is the plus-parity slice; minus parity follows from the
# (-1)^n rule applied per sector.
_PLUS_N0 = {
    (1, 0, 0): GammaRational(Fraction(-1)),
    (1, 0, 1): GammaRational(Fraction(71, 12)),
    (1, 0, 2): GammaRational(Fraction(6299, 288)),
    (2, 1, 0): GammaRational(Fraction(1)),
    (2, 1, 1): GammaRational(Fraction(-53, 6)),
    (2, 1, 2): GammaRational(Fraction(-1277, 72)),
    (2, 0, 0): GammaRational(Fraction(0), Fraction(1)),
    (2, 0, 1): GammaRational(Fraction(-23, 2), Fraction(-53, 6)),
    (2, 0, 2): GammaRational(Fraction(13, 12), Fraction(-1277, 72)),
}

Key = tuple[int, str, int, int, int]  # (N, parity, n, k, l)


@dataclass(frozen=True)
class EpsilonTable:
    """Exact trans-series coefficients keyed by (N, parity, n, k, l)."""

    entries: Mapping[Key, GammaRational]

    def __post_init__(self):
        entries = dict(self.entries)
        for (N, parity, n, k, l), value in entries.items():
            if parity not in ("+", "-"):
                raise ValueError(f"bad parity {parity!r}")
            if n < 1 or not 0 <= k <= n - 1 or l < 0:
                raise ValueError(f"bad sector index (n={n}, k={k}, l={l})")
            twin = entries.get((N, "-" if parity == "+" else "+", n, k, l))
            if twin is not None:
                want = value if n % 2 == 0 else -value
                if twin != want:
                    raise ValueError(
                        f"parity relation violated at (N={N}, n={n}, "
                        f"k={k}, l={l})"
                    )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def default(cls) -> "EpsilonTable":
        entries: dict[Key, GammaRational] = {}
        for (n, k, l), value in _PLUS_N0.items():
            entries[(0, "+", n, k, l)] = value
            entries[(0, "-", n, k, l)] = value if n % 2 == 0 else -value
        return cls(entries)

    def get(self, N: int, parity: str, n: int, k: int, l: int) -> GammaRational:
        try:
            return self.entries[(N, parity, n, k, l)]
        except KeyError:
            raise UnsupportedOrderError(
                f"no coefficient for (N={N}, parity={parity}, n={n}, "
                f"k={k}, l={l})"
            ) from None

    def covers(self, N: int, parity: str, n: int, l_max: int) -> bool:
        return all(
            (N, parity, n, k, l) in self.entries
            for k in range(n)
            for l in range(l_max + 1)
        )

    def to_json(self, N: int = 0, parity: str = "+") -> str:
        entries = []
        for (tn, tp, n, k, l), value in sorted(self.entries.items()):
            if (tn, tp) != (N, parity):
                continue
            entries.append(
                {"n": n, "k": k, "l": l, "r0": str(value.r0), "r1": str(value.r1)}
            )
        doc = {
            "schema": EPSILON_SCHEMA,
            "N": N,
            "parity": parity,
            "entries": entries,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EpsilonTable":
        doc = json.loads(text)
        if doc.get("schema") != EPSILON_SCHEMA:
            raise ValueError(f"unexpected schema {doc.get('schema')!r}")
        entries: dict[Key, GammaRational] = {}
        for e in doc["entries"]:
            key = (int(doc["N"]), doc["parity"], int(e["n"]), int(e["k"]),
                   int(e["l"]))
            entries[key] = GammaRational(Fraction(e["r0"]), Fraction(e["r1"]))
        return cls(entries)


class InstantonVariables(NamedTuple):
    xi: mp.mpf
    lam: mp.mpc


def instanton_variables(
    g, side: str = "above", digits: int = 30
) -> InstantonVariables:
    """The weight xi(g) and logarithm lambda(g) for one lateral side."""
    if side not in ("above", "below"):
        raise ValueError(f"side must be 'above' or 'below', got {side!r}")
    with mp.workdps(digits):
        g = _mpf(g)
        if g <= 0:
            raise ValueError("g must be positive")
        xi = mp.exp(-1 / (6 * g)) / mp.sqrt(mp.pi * g)
        lam = mp.mpc(mp.log(2 / g), mp.pi if side == "above" else -mp.pi)
        return InstantonVariables(+xi, +lam)


def instanton_energy(
    N: int,
    parity: str,
    n: int,
    g,
    side: str = "above",
    l_max: int = 2,
    digits: int = 30,
    table: EpsilonTable | None = None,
) -> mp.mpc:
    """The n-instanton energy contribution for one level and parity.

    Evaluates (2/g)^(N n) xi^n sum_k lambda^k sum_{l <= l_max} eps_{nkl} g^l
    with exact coefficients from the table.  Sectors or orders outside the
    table raise UnsupportedOrderError rather than silently truncating.
    """
    if n < 1:
        raise ValueError("instanton order n must be >= 1")
    if table is None:
        table = EpsilonTable.default()
    if not table.covers(N, parity, n, l_max):
        raise UnsupportedOrderError(
            f"table does not cover (N={N}, parity={parity}, n={n}) "
            f"through g^{l_max}"
        )
    work = digits + 10
    with mp.workdps(work):
        xi, lam = instanton_variables(g, side, digits=work)
        g = _mpf(g)
        total = mp.mpc(0)
        lam_pow = mp.mpc(1)
        for k in range(n):
            inner = mp.mpf(0)
            for l in range(l_max, -1, -1):
                inner = inner * g + table.get(N, parity, n, k, l).evaluate(work)
            total += lam_pow * inner
            lam_pow *= lam
        total *= (2 / g) ** (N * n) * xi**n
    with mp.workdps(digits):
        return +total


def separation_series(
    g, l_max: int = 2, digits: int = 30, table: EpsilonTable | None = None
) -> mp.mpf:
    """One-instanton level separation E(0,-) - E(0,+), purely real."""
    work = digits + 10
    minus = instanton_energy(0, "-", 1, g, "above", l_max, work, table)
    plus = instanton_energy(0, "+", 1, g, "above", l_max, work, table)
    with mp.workdps(digits):
        return +(minus.real - plus.real)


def displacement_series(
    g, l_max: int = 2, digits: int = 30, table: EpsilonTable | None = None
) -> mp.mpf:
    """Two-instanton displacement of the doublet mean above the Borel sum.

    Computed from the closed bracket xi^2 sum_l g^l (eps_{2,1,l} L + c_l)
    with L = ln(2 e^gamma / g), where c_l is the gamma-free part of the
    eps_{2,0,l} entry.  The gamma part of eps_{2,0,l} always matches
    eps_{2,1,l}, which is what merges ln(2/g) and gamma into the single
    logarithm L; that match is asserted here.  Independent of the lambda
    branch, and identical to Re(instanton_energy(n=2)) on either side.
    """
    if table is None:
        table = EpsilonTable.default()
    if not table.covers(0, "+", 2, l_max):
        raise UnsupportedOrderError(f"two-instanton table stops before g^{l_max}")
    bracket = []
    for l in range(l_max + 1):
        k1 = table.get(0, "+", 2, 1, l)
        k0 = table.get(0, "+", 2, 0, l)
        if k1.r1 or k0.r1 != k1.r0:
            raise AssertionError(
                "two-instanton entries do not merge into ln(2 e^gamma / g)"
            )
        bracket.append((k1.r0, k0.r0))
    work = digits + 10
    with mp.workdps(work):
        g = _mpf(g)
        if g <= 0:
            raise ValueError("g must be positive")
        xi, _ = instanton_variables(g, "above", digits=work)
        bigl = mp.log(2 / g) + mp.euler
        total = mp.mpf(0)
        for l_coef, c_coef in reversed(bracket):
            term = (
                mp.mpf(l_coef.numerator) / l_coef.denominator * bigl
                + mp.mpf(c_coef.numerator) / c_coef.denominator
            )
            total = total * g + term
        total *= xi**2
    with mp.workdps(digits):
        return +total


def delta_asymptotic_terms(
    order: int = 2, table: EpsilonTable | None = None
) -> dict[tuple[int, int], Fraction]:
    """Exact coefficients of Delta's small-g expansion.

    Returns {(j, v): coefficient of g^j / L^v} obtained by expanding

        Delta = [displacement bracket] / [L * (separation bracket)^2]

    through g^order, with L = ln(2 e^gamma / g) kept as a symbol.  The
    numerator and the squared denominator both come from the coefficient
    table, so this is a genuine composition, not a transcription: it yields
    1; 3 and -23/2 / L; 53/2 and -135 / L.
    """
    if table is None:
        table = EpsilonTable.default()
    if order < 0:
        raise ValueError("order must be nonnegative")
    if not (table.covers(0, "+", 2, order) and table.covers(0, "-", 1, order)):
        raise UnsupportedOrderError(
            f"coefficient table stops before g^{order}"
        )
    # numerator / L as polynomials in V = 1/L, per power of g
    num: list[dict[int, Fraction]] = []
    for l in range(order + 1):
        k1 = table.get(0, "+", 2, 1, l)
        k0 = table.get(0, "+", 2, 0, l)
        if k1.r1 or k0.r1 != k1.r0:
            raise AssertionError("two-instanton entries fail the L merge")
        num.append({0: k1.r0, 1: k0.r0})
    # (separation bracket)^(-2), plain rationals
    sep = [table.get(0, "-", 1, 0, l).r0 for l in range(order + 1)]
    inv2 = [Fraction(1)] + [Fraction(0)] * order
    for j in range(1, order + 1):
        # from (sep^2 * inv2 = 1): convolve and solve forward
        acc = Fraction(0)
        sq_j = [
            sum(sep[i] * sep[m - i] for i in range(m + 1)) for m in range(j + 1)
        ]
        for m in range(1, j + 1):
            acc += sq_j[m] * inv2[j - m]
        inv2[j] = -acc
    out: dict[tuple[int, int], Fraction] = {}
    for j in range(order + 1):
        for m in range(j + 1):
            for v, c in num[m].items():
                if c:
                    prev = out.get((j, v), Fraction(0))
                    out[(j, v)] = prev + c * inv2[j - m]
    return {k: v for k, v in out.items() if v}


def delta_asymptotic(
    g,
    order: int = 2,
    log_terms: int | None = None,
    digits: int = 30,
    table: EpsilonTable | None = None,
) -> mp.mpf:
    """Small-g asymptotics of the ratio Delta(g).

    With log_terms=None (the default) the inverse logarithm 1/L,
    L = ln(2 e^gamma / g), is evaluated exactly; this reproduces the
    composed expansion at face value.  Passing log_terms=m instead replaces
    1/L by its own expansion in inverse powers of ln(2/g) truncated after m
    terms (m=3 keeps 1, -gamma/ln(2/g) and +(gamma/ln(2/g))^2), the further
    rearrangement that is only meaningful when ln(2/g) is large.  At small
    couplings the two agree to all quoted decimals; at moderate couplings
    they differ visibly and neither is authoritative.
    """
    terms = delta_asymptotic_terms(order, table)
    work = digits + 10
    with mp.workdps(work):
        g = _mpf(g)
        if g <= 0:
            raise ValueError("g must be positive")
        logg = mp.log(2 / g)
        if log_terms is None:
            v = 1 / (logg + mp.euler)
        else:
            if log_terms < 1:
                raise ValueError("log_terms must be a positive integer")
            ratio = -mp.euler / logg
            v = sum(ratio**j for j in range(log_terms)) / logg
        total = mp.mpf(0)
        for (j, vpow), c in sorted(terms.items()):
            total += mp.mpf(c.numerator) / c.denominator * g**j * v**vpow
    with mp.workdps(digits):
        return +total


@dataclass(frozen=True)
class DeltaReport:
    """Numeric Delta(g) with its ingredients and propagated error."""

    g: mp.mpf
    value: mp.mpf
    error: mp.mpf
    asymptotic: mp.mpf
    separation: mp.mpf
    separation_error: mp.mpf
    displacement: mp.mpf
    displacement_error: mp.mpf
    borel_real: mp.mpf
    borel_error: mp.mpf
    low_confidence: bool

    def to_json(self, digits: int = 30) -> str:
        def fmt(x):
            with mp.workdps(digits + 10):
                return mp.nstr(+mp.mpmathify(x), digits)

        doc = {
            "schema": DELTA_SCHEMA,
            "g": fmt(self.g),
            "delta": fmt(self.value),
            "delta_error": fmt(self.error),
            "delta_asymptotic": fmt(self.asymptotic),
            "separation": fmt(self.separation),
            "separation_error": fmt(self.separation_error),
            "displacement": fmt(self.displacement),
            "displacement_error": fmt(self.displacement_error),
            "borel_real": fmt(self.borel_real),
            "borel_error": fmt(self.borel_error),
            "low_confidence": self.low_confidence,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, digits: int = 60) -> "DeltaReport":
        doc = json.loads(text)
        if doc.get("schema") != DELTA_SCHEMA:
            raise ValueError(f"unexpected schema {doc.get('schema')!r}")
        with mp.workdps(digits):
            return cls._parse(doc)

    @classmethod
    def _parse(cls, doc) -> "DeltaReport":
        return cls(
            g=mp.mpf(doc["g"]),
            value=mp.mpf(doc["delta"]),
            error=mp.mpf(doc["delta_error"]),
            asymptotic=mp.mpf(doc["delta_asymptotic"]),
            separation=mp.mpf(doc["separation"]),
            separation_error=mp.mpf(doc["separation_error"]),
            displacement=mp.mpf(doc["displacement"]),
            displacement_error=mp.mpf(doc["displacement_error"]),
            borel_real=mp.mpf(doc["borel_real"]),
            borel_error=mp.mpf(doc["borel_error"]),
            low_confidence=bool(doc["low_confidence"]),
        )


def _value_error(x) -> tuple[mp.mpf, mp.mpf]:
    if hasattr(x, "energy"):
        return _mpf(x.energy), _mpf(getattr(x, "error_estimate", 0) or 0)
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return _mpf(x[0]), _mpf(x[1])
    return _mpf(x), mp.mpf(0)


def delta_numeric(
    g,
    e_minus,
    e_plus,
    borel_real,
    digits: int = 40,
) -> DeltaReport:
    """Assemble Delta(g) = 4 (mean - Borel) / (separation^2 L) from data.

    e_minus and e_plus are spectral results (anything exposing .energy and
    .error_estimate, or (value, error) pairs), borel_real likewise a value
    or (value, error) pair.  First-order error propagation fills the error
    field; when the propagated error exceeds the value itself the report is
    flagged low confidence, since the numerator is a difference of nearly
    equal quantities and cancellation is severe.
    """
    work = digits + 10
    with mp.workdps(work):
        em, dem = _value_error(e_minus)
        ep, dep = _value_error(e_plus)
        b, db = _value_error(borel_real)
        g = _mpf(g)
        if g <= 0:
            raise ValueError("g must be positive")
        s = em - ep
        if s <= 0:
            raise ValueError("expected E(0,-) > E(0,+)")
        mean = (em + ep) / 2
        disp = mean - b
        bigl = mp.log(2 / g) + mp.euler
        delta = 4 * disp / (s**2 * bigl)
        dmean = (dem + dep) / 2
        ds = dem + dep
        ddisp = dmean + db
        derr = 4 * ddisp / (s**2 * bigl) + abs(2 * delta / s) * ds
        report = DeltaReport(
            g=+g,
            value=+delta,
            error=+derr,
            asymptotic=delta_asymptotic(g, digits=digits),
            separation=+s,
            separation_error=+ds,
            displacement=+disp,
            displacement_error=+ddisp,
            borel_real=+b,
            borel_error=+db,
            low_confidence=bool(derr > abs(delta)),
        )
    return report
