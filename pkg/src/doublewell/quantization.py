"""Trans-series expansion of the exact quantization condition.

The two wells communicate through the condition

    (1/sqrt(2 pi)) Gamma(1/2 - D(E,g)) (-2/g)^D(E,g) exp(-A(E,g)/2) = +-i,

with + for even-parity states and - for odd, where D and A are known power
series in g with polynomial-in-E coefficients.  Writing D(E,g) = N + 1/2 +
delta and expanding the Gamma factor about its pole turns the condition into
a fixed-point equation

    delta = -(sigma/N!) (2/g)^N xi(g) G(delta) e^(delta*lambda)
            e^(-a(g)/2) e^(-w(dE)/2),

with xi(g) = exp(-1/(6g))/sqrt(pi g) the instanton weight, lambda the formal
logarithm ln(-2/g), a(g) the regular part of A along the perturbative
branch, w the shift of A due to the energy correction dE, and G the
normalized Taylor factor of Gamma(-N-delta) about the pole.  Solving sector
by sector in powers of xi produces the multi-instanton energy coefficients

    E = E_pert + sum_n (2/g)^(N n) xi^n sum_{k<n} lambda^k sum_l e_{nkl} g^l

with e_{nkl} exact polynomials in Euler's constant.  Everything here is
exact arithmetic over the SymExpr ring; lambda is never given a numeric
value (the branch of the logarithm only matters when the instanton module
evaluates these tables laterally).

The branch convention reproduced by the printed two-instanton tables is
e^(lambda/2) = +i sqrt(2/g), i.e. lambda = ln(2/g) + i pi, the continuation
of ln(-2/g) with g approached from the upper half-plane.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

import mpmath as mp

from .perturbation import RationalSeries, invert_D_series
from .seriesops import SymExpr

__all__ = [
    "D_SERIES",
    "A_SERIES",
    "LaurentSeries",
    "TransSeries",
    "gamma_pole_expansion",
    "expand_quantization",
]

# Perturbative input data: polynomial-in-E coefficients per power of g.
# D generates the spectrum (D = N + 1/2 at g = 0), A the tunneling action;
# A additionally carries the singular 1/(3g) term, absorbed into xi and
# therefore not part of these regular slices.
D_SERIES: tuple[dict[int, Fraction], ...] = (
    {1: Fraction(1)},
    {2: Fraction(3), 0: Fraction(1, 4)},
    {3: Fraction(35), 1: Fraction(25, 4)},
)
A_SERIES: tuple[dict[int, Fraction], ...] = (
    {},
    {2: Fraction(17), 0: Fraction(19, 12)},
    {3: Fraction(227), 1: Fraction(187, 4)},
)

GAMMA = "gamma"
LAMBDA = "lambda"


def _harmonic(N: int, k: int) -> Fraction:
    return sum((Fraction(1, r**k) for r in range(1, N + 1)), Fraction(0))


def _exp_delta_series(lnc: list[SymExpr], order: int) -> list[SymExpr]:
    """exp of a series with zero constant term, coefficients in SymExpr."""
    out = [SymExpr.one] + [SymExpr.zero] * order
    for n in range(1, order + 1):
        acc = SymExpr.zero
        for k in range(1, n + 1):
            if k < len(lnc) and lnc[k]:
                acc = acc + (lnc[k] * Fraction(k)) * out[n - k]
        out[n] = acc / Fraction(n)
    return out


@dataclass(frozen=True)
class LaurentSeries:
    """Gamma(-N - delta) about its pole: sum_{j>=-1} coeffs[j] delta^j."""

    N: int
    order: int
    _coeffs: tuple[SymExpr, ...]  # index j+1 holds the delta^j coefficient

    def __getitem__(self, j: int) -> SymExpr:
        if j < -1 or j > self.order:
            raise IndexError(f"Laurent orders run from -1 to {self.order}")
        return self._coeffs[j + 1]

    def evaluate(self, delta, digits: int = 30):
        """Numeric sum at a concrete small delta (for cross-checks)."""
        with mp.workdps(digits):
            values = {GAMMA: mp.euler}
            for j in range(2, self.order + 2):
                values[f"zeta{j}"] = mp.zeta(j)
            total = mp.mpf(0)
            d = mp.mpmathify(delta)
            for j in range(-1, self.order + 1):
                total += self[j].evaluate(values) * d**j
            return +total

    def __repr__(self) -> str:
        bits = [f"({self[j]}) d^{j}" for j in range(-1, self.order + 1)]
        return f"Gamma(-{self.N}-d) = " + " + ".join(bits) + " + O(d^%d)" % (
            self.order + 1
        )


def gamma_pole_expansion(N: int, order: int) -> LaurentSeries:
    """Laurent expansion of Gamma(-N - delta) through delta^order.

    Derived from Gamma(-N-delta) = (-1)^(N+1)/(N! delta) * C(delta) with
    ln C = (gamma - H_N) delta + sum_{k>=2} (zeta(k) + (-1)^k H_N^(k))
    delta^k / k.  Coefficients are exact polynomials in gamma and zeta(k).
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if order < 0:
        raise ValueError("order must be nonnegative")
    top = order + 1
    lnc = [SymExpr.zero] * (top + 1)
    if top >= 1:
        lnc[1] = SymExpr.symbol(GAMMA) - SymExpr.const(_harmonic(N, 1))
    for k in range(2, top + 1):
        term = SymExpr.symbol(f"zeta{k}") + SymExpr.const(
            _harmonic(N, k) * (-1 if k % 2 else 1)
        )
        lnc[k] = term / Fraction(k)
    c = _exp_delta_series(lnc, top)
    sign = Fraction(-1 if N % 2 == 0 else 1, factorial(N))
    coeffs = tuple(ci * sign for ci in c)
    return LaurentSeries(N=N, order=order, _coeffs=coeffs)


# --- exact g-series helpers over Fraction -------------------------------

def _gmul(a: list[Fraction], b: list[Fraction], l_max: int) -> list[Fraction]:
    out = [Fraction(0)] * (l_max + 1)
    for i, ai in enumerate(a[: l_max + 1]):
        if not ai:
            continue
        for j, bj in enumerate(b[: l_max + 1 - i]):
            if bj:
                out[i + j] += ai * bj
    return out


def _ginv(a: list[Fraction], l_max: int) -> list[Fraction]:
    if not a or not a[0]:
        raise ZeroDivisionError("series has no constant term")
    out = [Fraction(1) / a[0]] + [Fraction(0)] * l_max
    for n in range(1, l_max + 1):
        s = Fraction(0)
        for k in range(1, n + 1):
            if k < len(a) and a[k]:
                s += a[k] * out[n - k]
        out[n] = -s / a[0]
    return out


def _gexp(a: list[Fraction], l_max: int) -> list[Fraction]:
    if a and a[0]:
        raise ValueError("exponent series must have zero constant term")
    out = [Fraction(1)] + [Fraction(0)] * l_max
    for n in range(1, l_max + 1):
        s = Fraction(0)
        for k in range(1, n + 1):
            if k < len(a) and a[k]:
                s += Fraction(k) * a[k] * out[n - k]
        out[n] = s / n
    return out


def _compose_slices(
    slices: Sequence[dict[int, Fraction]],
    e0: list[Fraction],
    l_max: int,
    derivative: int = 0,
) -> list[Fraction]:
    """sum_j g^j (d^derivative P_j / dE^derivative / derivative!) (E0(g))."""
    # powers of E0 as g-series
    maxpow = 0
    for poly in slices:
        for p in poly:
            maxpow = max(maxpow, p)
    pows = [[Fraction(1)] + [Fraction(0)] * l_max]
    for _ in range(maxpow):
        pows.append(_gmul(pows[-1], e0, l_max))
    out = [Fraction(0)] * (l_max + 1)
    for j, poly in enumerate(slices):
        if j > l_max:
            break
        for p, c in poly.items():
            c = Fraction(c)
            if not c or p < derivative:
                continue
            # binomial falling factorial / derivative!
            coef = c
            for i in range(derivative):
                coef *= p - i
            coef /= factorial(derivative)
            base = pows[p - derivative]
            for l in range(l_max + 1 - j):
                if base[l]:
                    out[j + l] += coef * base[l]
    return out


# --- sector-graded (trans-series) arithmetic ----------------------------

Sect = list[list[SymExpr]]  # [sector][g power]


def _ts_zero(n_max: int, l_max: int) -> Sect:
    return [[SymExpr.zero] * (l_max + 1) for _ in range(n_max + 1)]


def _ts_add(a: Sect, b: Sect) -> Sect:
    return [
        [x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)
    ]


def _ts_mul(a: Sect, b: Sect, n_max: int, l_max: int) -> Sect:
    out = _ts_zero(n_max, l_max)
    for na in range(n_max + 1):
        row_a = a[na]
        if not any(row_a):
            continue
        for nb in range(n_max + 1 - na):
            row_b = b[nb]
            if not any(row_b):
                continue
            tgt = out[na + nb]
            for la in range(l_max + 1):
                ca = row_a[la]
                if not ca:
                    continue
                for lb in range(l_max + 1 - la):
                    cb = row_b[lb]
                    if cb:
                        tgt[la + lb] = tgt[la + lb] + ca * cb
    return out


def _ts_scale(a: Sect, f) -> Sect:
    return [[c * f for c in row] for row in a]


def _ts_from_g(series: list[Fraction], n_max: int, l_max: int) -> Sect:
    out = _ts_zero(n_max, l_max)
    for l, c in enumerate(series[: l_max + 1]):
        out[0][l] = SymExpr.const(c)
    return out


def _ts_shift(a: Sect, by: int, n_max: int, l_max: int) -> Sect:
    out = _ts_zero(n_max, l_max)
    for n in range(n_max + 1 - by):
        out[n + by] = list(a[n])
    return out


def _ts_exp(a: Sect, n_max: int, l_max: int) -> Sect:
    if any(a[0]):
        raise ValueError("exponent must vanish in sector zero")
    out = _ts_zero(n_max, l_max)
    out[0][0] = SymExpr.one
    power = out
    for m in range(1, n_max + 1):
        power = _ts_mul(power, a, n_max, l_max)
        out = _ts_add(out, _ts_scale(power, Fraction(1, factorial(m))))
    return out


@dataclass(frozen=True)
class TransSeries:
    """Multi-instanton energy coefficients for one state and parity.

    epsilon(n, k, l) is the exact coefficient of
    (2/g)^(N n) xi^n lambda^k g^l; sector 0 holds the plain perturbative
    series (k must be 0 there).
    """

    N: int
    parity: str
    n_max: int
    l_max: int
    sectors: dict[int, dict[tuple[int, int], SymExpr]]

    def epsilon(self, n: int, k: int, l: int) -> SymExpr:
        return self.sectors.get(n, {}).get((k, l), SymExpr.zero)

    def perturbative_coefficients(self) -> RationalSeries:
        coeffs = []
        for l in range(self.l_max + 1):
            expr = self.epsilon(0, 0, l)
            if expr.symbols():
                raise ValueError("sector 0 is not purely rational")
            coeffs.append(expr.constant_part())
        return RationalSeries("g", tuple(coeffs))

    def to_json(self) -> str:
        entries = []
        for n in sorted(self.sectors):
            if n == 0:
                continue
            for (k, l), expr in sorted(self.sectors[n].items()):
                extra = expr.symbols() - {GAMMA}
                if extra or expr.degree(GAMMA) > 1:
                    raise ValueError(
                        f"sector {n} entry is not linear in gamma: {expr!r}"
                    )
                entries.append(
                    {
                        "n": n,
                        "k": k,
                        "l": l,
                        "r0": str(expr.coefficient(GAMMA, 0).constant_part()),
                        "r1": str(expr.coefficient(GAMMA, 1).constant_part()),
                    }
                )
        doc = {
            "schema": "doublewell/epsilon-table/v1",
            "N": self.N,
            "parity": self.parity,
            "n_max": self.n_max,
            "l_max": self.l_max,
            "entries": entries,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def expand_quantization(
    N: int = 0,
    n_max: int = 2,
    l_max: int = 2,
    parity: str = "+",
    D: Sequence[dict[int, Fraction]] | None = None,
    A: Sequence[dict[int, Fraction]] | None = None,
) -> TransSeries:
    """Solve the quantization condition sector by sector in xi.

    Returns the exact trans-series table through sector n_max and g^l_max.
    Raises ValueError when the supplied D or A truncations cannot support
    the requested g order (nothing beyond the printed truncations is ever
    guessed).
    """
    if D is None:
        D = D_SERIES
    if A is None:
        A = A_SERIES
    if parity in ("+", "even"):
        sigma = 1
    elif parity in ("-", "odd"):
        sigma = -1
    else:
        raise ValueError(f"parity must be '+' or '-', got {parity!r}")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if l_max > len(D) - 1 or l_max > len(A) - 1:
        raise ValueError(
            f"inputs truncated at g^{min(len(D), len(A)) - 1} cannot "
            f"support l_max={l_max}"
        )

    e0 = list(invert_D_series(D, N, l_max).coeffs)
    sectors: dict[int, dict[tuple[int, int], SymExpr]] = {
        0: {(0, l): SymExpr.const(c) for l, c in enumerate(e0)}
    }
    if n_max == 0:
        return TransSeries(N, "+" if sigma > 0 else "-", 0, l_max, sectors)

    d_der = {
        r: _compose_slices(D, e0, l_max, derivative=r)
        for r in range(1, n_max + 1)
    }
    a_der = {
        r: _compose_slices(A, e0, l_max, derivative=r)
        for r in range(1, n_max + 1)
    }
    a_reg = _compose_slices(A, e0, l_max)
    exp_neg_a_half = _gexp([-c / 2 for c in a_reg], l_max)
    inv_de = _ginv(d_der[1], l_max)

    lau = gamma_pole_expansion(N, max(0, n_max - 2))
    # normalized Taylor factor G(delta) = sum c_p delta^p, c_0 = 1
    lead = lau[-1].constant_part()
    cs = [lau[p - 1] / lead for p in range(n_max)]
    lam = SymExpr.symbol(LAMBDA)
    lam_pow = [SymExpr.one]
    for _ in range(n_max - 1):
        lam_pow.append(lam_pow[-1] * lam)
    h = []
    for p in range(n_max):
        acc = SymExpr.zero
        for a_i in range(p + 1):
            acc = acc + cs[a_i] * lam_pow[p - a_i] / Fraction(
                factorial(p - a_i)
            )
        h.append(acc)

    prefactor = Fraction(-sigma, factorial(N))
    ea_ts = _ts_from_g(exp_neg_a_half, n_max, l_max)
    delta = _ts_zero(n_max, l_max)
    u = _ts_zero(n_max, l_max)

    for n in range(1, n_max + 1):
        # G(delta) e^(delta lambda) with sectors < n of delta complete
        ge = _ts_zero(n_max, l_max)
        ge[0][0] = h[0]
        dpow = None
        for p in range(1, n_max):
            dpow = delta if dpow is None else _ts_mul(
                dpow, delta, n_max, l_max
            )
            ge = _ts_add(ge, _ts_scale(dpow, h[p]))
        # e^(-w/2), w = A(E0 + u) - A(E0)
        w = _ts_zero(n_max, l_max)
        upow = None
        for r in range(1, n_max + 1):
            upow = u if upow is None else _ts_mul(upow, u, n_max, l_max)
            term = _ts_mul(
                upow, _ts_from_g(a_der[r], n_max, l_max), n_max, l_max
            )
            w = _ts_add(w, term)
        ew = _ts_exp(_ts_scale(w, Fraction(-1, 2)), n_max, l_max)
        x = _ts_mul(_ts_mul(ge, ew, n_max, l_max), ea_ts, n_max, l_max)
        rhs = _ts_shift(_ts_scale(x, prefactor), 1, n_max, l_max)
        delta[n] = list(rhs[n])
        # invert D(E0 + u) = N + 1/2 + delta for the sector-n energy shift
        nl = _ts_zero(n_max, l_max)
        upow = None
        for r in range(2, n_max + 1):
            upow = _ts_mul(u, u, n_max, l_max) if upow is None else _ts_mul(
                upow, u, n_max, l_max
            )
            term = _ts_mul(
                upow, _ts_from_g(d_der[r], n_max, l_max), n_max, l_max
            )
            nl = _ts_add(nl, term)
        resid = [delta[n][l] - nl[n][l] for l in range(l_max + 1)]
        new_row = []
        for l in range(l_max + 1):
            acc = SymExpr.zero
            for i in range(l + 1):
                if inv_de[i]:
                    acc = acc + resid[l - i] * inv_de[i]
            new_row.append(acc)
        u[n] = new_row

    for n in range(1, n_max + 1):
        table: dict[tuple[int, int], SymExpr] = {}
        for l in range(l_max + 1):
            expr = u[n][l]
            kdeg = expr.degree(LAMBDA)
            if kdeg > n - 1:
                raise AssertionError(
                    f"lambda degree {kdeg} exceeds sector bound {n - 1}"
                )
            for k in range(kdeg + 1):
                part = expr.coefficient(LAMBDA, k)
                if part:
                    table[(k, l)] = part
        sectors[n] = table
    return TransSeries(
        N, "+" if sigma > 0 else "-", n_max, l_max, sectors
    )
