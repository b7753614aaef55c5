"""Exact Rayleigh-Schroedinger series for the symmetric double well.

The Hamiltonian is

    H = -(g/2) d^2/dq^2 + V(q)/g,      V(q) = q^2 (1-q)^2 / 2,

whose spectrum near either well approaches N + 1/2 as g -> 0.  Substituting
q = sqrt(g) x brings H to

    -(1/2) d^2/dx^2 + x^2/2 - sqrt(g) x^3 + (g/2) x^4,

an anharmonic oscillator whose perturbation series can be generated exactly:
with psi = exp(-x^2/2) * sum_k s^k P_k(x), s = sqrt(g), each half-order k is
a finite triangular linear solve for the polynomial P_k (degree N + 3k) and
the energy correction at that half-order.  Odd half-orders carry no energy
shift, so the energy series is a genuine power series in g with rational
coefficients:

    E_N(g) = sum_K E_K g^K,   E_0 = N + 1/2.

Everything here is exact rational arithmetic; gmpy2.mpq is used internally
for speed and results are handed out as fractions.Fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

__all__ = [
    "RationalSeries",
    "bender_wu_coefficients",
    "invert_D_series",
    "coefficient_decimal",
    "save_coefficients",
    "load_coefficients",
]


@dataclass(frozen=True)
class RationalSeries:
    """Dense truncated power series with exact rational coefficients.

    coeffs[k] multiplies var**k; trailing zeros are kept (the length states
    the truncation order, not the support).
    """

    var: str
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "coeffs", tuple(Fraction(c) for c in self.coeffs)
        )

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def truncated(self, order: int) -> "RationalSeries":
        if order > self.order:
            raise ValueError(
                f"series holds orders <= {self.order}, requested {order}"
            )
        return RationalSeries(self.var, self.coeffs[: order + 1])


def _hermite(n: int) -> list[int]:
    """Coefficient list of the physicists' Hermite polynomial H_n."""
    hs = [[1], [0, 2]]
    while len(hs) <= n:
        m = len(hs) - 1
        nxt = [0] * (m + 2)
        for i, c in enumerate(hs[-1]):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(hs[-2]):
            nxt[i] -= 2 * m * c
        hs.append(nxt)
    return hs[n]


def bender_wu_coefficients(N: int, k_max: int) -> RationalSeries:
    """Exact energy series coefficients E_0..E_{k_max} for level N.

    Runs the half-order recursion described in the module docstring.  The
    x^N coefficient of every correction polynomial is gauged to zero, which
    pins the (irrelevant) normalization of the wavefunction and keeps the
    solve strictly triangular.
    """
    if N < 0 or k_max < 0:
        raise ValueError("N and k_max must be nonnegative")
    half_orders = 2 * k_max
    p0 = [mpq(c) for c in _hermite(N)]
    polys = [p0]
    # energy corrections per half-order of sqrt(g); index 0 unused
    e_half = [mpq(0)]
    lead = mpq(2) ** N  # leading coefficient of H_N
    for k in range(1, half_orders + 1):
        deg = N + 3 * k
        rhs = [mpq(0)] * (deg + 1)
        for i, c in enumerate(polys[k - 1]):
            if c:
                rhs[i + 3] += c
        if k >= 2:
            for i, c in enumerate(polys[k - 2]):
                if c:
                    rhs[i + 4] -= c / 2
        for j in range(2, k, 2):
            e = e_half[j]
            if e:
                prev = polys[k - j]
                for i, c in enumerate(prev):
                    if c:
                        rhs[i] += e * c
        # (L - N) P_k = rhs + e_k P_0 with L = -(1/2) d^2 + x d/dx acting
        # triangularly on monomials: coefficient m couples only to m+2.
        p = [mpq(0)] * (deg + 1)
        for m in range(deg, N, -1):
            val = rhs[m]
            if m + 2 <= deg:
                val += mpq((m + 2) * (m + 1), 2) * p[m + 2]
            p[m] = val / (m - N)
        val = rhs[N]
        if N + 2 <= deg:
            val += mpq((N + 2) * (N + 1), 2) * p[N + 2]
        ek = -val / lead
        e_half.append(ek)
        for m in range(N - 1, -1, -1):
            val = rhs[m]
            if m < len(p0):
                val += ek * p0[m]
            if m + 2 <= deg:
                val += mpq((m + 2) * (m + 1), 2) * p[m + 2]
            p[m] = val / (m - N)
        polys.append(p)
    coeffs = [Fraction(N * 2 + 1, 2)]
    for K in range(1, k_max + 1):
        q = e_half[2 * K]
        coeffs.append(Fraction(q.numerator, q.denominator))
    return RationalSeries("g", tuple(coeffs))


def invert_D_series(
    D: Sequence[dict[int, Fraction]], N: int, order: int
) -> RationalSeries:
    """Solve D(E(g), g) = N + 1/2 for E(g) order by order in g.

    D is given as one polynomial-in-E per power of g: D[j] maps E-powers to
    rational coefficients of the g^j slice.  The g^0 slice must be E itself
    (checked), which makes every order linear in the new coefficient.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order > len(D) - 1:
        raise ValueError(
            f"D is truncated at g^{len(D) - 1}; cannot invert to order {order}"
        )
    d0 = {k: Fraction(v) for k, v in D[0].items() if v}
    if d0 != {1: Fraction(1)}:
        raise ValueError("g^0 slice of D must be the identity in E")
    e = [Fraction(2 * N + 1, 2)]
    for k in range(1, order + 1):
        # residual = coefficient of g^k in sum_{j>=1} g^j D_j(E_<k(g))
        resid = Fraction(0)
        for j in range(1, k + 1):
            poly = D[j]
            target = k - j
            # E(g)^p truncated at g^target using known coefficients
            for p, c in poly.items():
                if not c:
                    continue
                resid += Fraction(c) * _power_coeff(e, p, target)
        e.append(-resid)
    return RationalSeries("g", tuple(e))


def _power_coeff(coeffs: list[Fraction], p: int, target: int) -> Fraction:
    """Coefficient of g^target in (sum coeffs[k] g^k)^p."""
    acc = [Fraction(1)] + [Fraction(0)] * target
    for _ in range(p):
        nxt = [Fraction(0)] * (target + 1)
        for i in range(target + 1):
            a = acc[i]
            if not a:
                continue
            for j in range(0, target + 1 - i):
                if j < len(coeffs) and coeffs[j]:
                    nxt[i + j] += a * coeffs[j]
        acc = nxt
    return acc[target]


def coefficient_decimal(value: Fraction, digits: int) -> str:
    """Correctly rounded scientific notation with `digits` significant digits.

    Pure integer arithmetic, round half to even; no binary floats anywhere.
    Examples: Fraction(1,2) at 5 digits -> "5.0000e-1", Fraction(-9,2) at
    3 digits -> "-4.50e0".
    """
    if digits < 1:
        raise ValueError("digits must be >= 1")
    value = Fraction(value)
    if value == 0:
        mantissa = "0" if digits == 1 else "0." + "0" * (digits - 1)
        return mantissa + "e0"
    sign = "-" if value < 0 else ""
    p, q = abs(value.numerator), value.denominator
    # exponent e with 10^e <= p/q < 10^(e+1)
    e = len(str(p)) - len(str(q))
    while p * 10 ** max(0, -e) < q * 10 ** max(0, e):
        e -= 1
    while p * 10 ** max(0, -(e + 1)) >= q * 10 ** max(0, e + 1):
        e += 1
    # scaled = p/q * 10^(digits-1-e), rounded half to even
    shift = digits - 1 - e
    if shift >= 0:
        num, den = p * 10**shift, q
    else:
        num, den = p, q * 10 ** (-shift)
    whole, rem = divmod(num, den)
    twice = 2 * rem
    if twice > den or (twice == den and whole % 2 == 1):
        whole += 1
    s = str(whole)
    if len(s) > digits:  # rounding carried past the leading digit
        e += 1
        s = s[:digits]
    mantissa = s[0] if digits == 1 else s[0] + "." + s[1:]
    return f"{sign}{mantissa}e{e}"


def save_coefficients(series: RationalSeries, path: str) -> None:
    """Write one 'K<TAB>numerator/denominator' line per coefficient."""
    with open(path, "w", encoding="utf-8") as fh:
        for k, c in enumerate(series):
            fh.write(f"{k}\t{c.numerator}/{c.denominator}\n")


def load_coefficients(path: str, var: str = "g") -> RationalSeries:
    coeffs: list[Fraction] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            k_str, frac = line.split("\t")
            if int(k_str) != len(coeffs):
                raise ValueError(
                    f"{path}:{lineno + 1}: expected index {len(coeffs)}, "
                    f"got {k_str}"
                )
            num, den = frac.split("/")
            coeffs.append(Fraction(int(num), int(den)))
    return RationalSeries(var, tuple(coeffs))
