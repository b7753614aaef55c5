"""Arbitrary-precision eigenvalues of the double-well Hamiltonian.

Two independent solvers for H = -(g/2) d^2/dq^2 + V(q)/g with the
symmetric quartic well V(q) = q^2 (1-q)^2 / 2:

* ``basis_eigenvalue`` expands the wavefunction in harmonic-oscillator
  functions of width sqrt(g) placed at both potential wells, symmetrized
  under the reflection q -> 1-q.  All matrix elements are closed-form
  (displaced-oscillator overlaps and ladder recursions), the overlap
  matrix is Cholesky-factored at working precision to certify positive
  definiteness, and eigenpairs are polished by Rayleigh-quotient
  iteration on the shifted pencil H - mu S.  The basis grows along a
  schedule until two successive energies agree to the requested digits.

* ``lattice_eigenvalue`` discretizes the same operator with 3-point
  finite differences on a symmetric interval about q = 1/2 with
  Dirichlet ends, resolves one eigenvalue per grid by shifted inverse
  iteration with a parity projector, and removes the h^2, h^4, ...
  discretization error by geometric Richardson extrapolation.

The two methods share no numerics beyond mpmath itself, which is what
makes their agreement a meaningful cross-check.  Eigenvalues of the two
parity sectors never meet inside one matrix, so the exponentially small
tunneling splitting is obtained by subtracting separately converged
sector energies; ``splitting_and_mean`` runs both sectors through the
same schedule at matched precision so the difference is coherent.

Precision is an explicit argument everywhere.  The splitting at
coupling g is of order exp(-1/6g), so ``splitting_and_mean`` pads the
working precision by ceil(1/(6 g ln10)) digits on top of the usual
guard; single-sector energies carry no such cancellation and use the
flat guard only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .richardson import richardson_geometric

__all__ = [
    "SPECTRAL_SCHEMA",
    "CHECKPOINT_SCHEMA",
    "SolverConfig",
    "SpectralResult",
    "SplittingResult",
    "basis_eigenvalue",
    "lattice_eigenvalue",
    "splitting_and_mean",
]

SPECTRAL_SCHEMA = "doublewell/spectral-result/v1"
CHECKPOINT_SCHEMA = "doublewell/spectral-checkpoint/v1"

# V(q) = q^2 (1-q)^2 / 2 as polynomial coefficients in q.
_DOUBLE_WELL = (
    Fraction(0),
    Fraction(0),
    Fraction(1, 2),
    Fraction(-1),
    Fraction(1, 2),
)


def _mpf(x):
    """Coerce ``x`` to mpf at the current precision, Fractions exactly."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def splitting_guard_digits(g) -> int:
    """Digits needed so a splitting of order exp(-1/6g) stays resolvable."""
    gf = Fraction(g) if not isinstance(g, Fraction) else g
    return 20 + math.ceil(1 / (6 * float(gf) * math.log(10)))


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs shared by the basis and lattice solvers.

    ``target_digits`` is the absolute decimal accuracy goal for the
    eigenvalue.  ``guard_digits`` is the padding between that goal and
    the arithmetic precision; ``None`` selects a flat 20 for
    single-sector runs, while splitting runs always satisfy
    ``guard >= splitting_guard_digits(g)`` and reject an explicit
    smaller value.

    The default potential is the symmetric quartic double well; the
    harmonic validation configuration replaces it by q^2/2, which is
    symmetric about q = 0 and must reproduce the oscillator ground
    energy 1/2 exactly in the rescaled units.

    ``single_center_threshold`` controls an automatic change of basis.
    The two displaced centers are kept only while the squared center
    separation in oscillator-width units, (c1 - c0)^2 / (2 sigma^2)
    with sigma the basis width, is at least this large.  Below it the
    displaced pair spans nearly the same space twice over, the overlap
    matrix loses rank faster than any reasonable precision budget as
    the basis grows, and plain oscillator states about the symmetry
    point converge quickly anyway, so the solver expands there instead
    (the overlap is then the identity).  Zero forces the two-center
    basis unconditionally.
    """

    target_digits: int = 30
    guard_digits: int | None = None
    basis_schedule: tuple[int, ...] = ()
    schedule_cap: int = 768
    width_factor: float = 1.0
    half_width: Fraction | None = None
    coarse_points: int | None = None
    extrapolation_depth: int = 6
    potential: tuple[Fraction, ...] = _DOUBLE_WELL
    symmetry_point: Fraction = Fraction(1, 2)
    centers: tuple[Fraction, ...] = (Fraction(0), Fraction(1))
    single_center_threshold: float = 56.0
    checkpoint: str | None = None

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        if self.guard_digits is not None and self.guard_digits < 0:
            raise ValueError("guard_digits must be non-negative")
        if self.single_center_threshold < 0:
            raise ValueError("single_center_threshold must be non-negative")
        if len(self.centers) not in (1, 2):
            raise ValueError("need one or two expansion centers")
        sched = tuple(self.basis_schedule)
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("basis_schedule must be strictly increasing")

    @classmethod
    def harmonic_validation(cls, target_digits: int = 20,
                            width_factor: float = 1.0) -> "SolverConfig":
        """Pure-oscillator configuration: V = q^2/2, single center at 0.

        With ``width_factor`` 1 the basis diagonalizes H exactly; any
        other value exercises the full generalized-eigenproblem path
        while the answer stays 1/2.
        """
        return cls(
            target_digits=target_digits,
            width_factor=width_factor,
            potential=(Fraction(0), Fraction(0), Fraction(1, 2)),
            symmetry_point=Fraction(0),
            centers=(Fraction(0),),
        )

    def working_digits(self, extra_guard: int = 0) -> int:
        guard = self.guard_digits if self.guard_digits is not None else 20
        return self.target_digits + max(guard, extra_guard)

    def schedule(self) -> tuple[int, ...]:
        if self.basis_schedule:
            return tuple(self.basis_schedule)
        sizes = [8, 12, 16]
        while sizes[-1] < self.schedule_cap:
            nxt = -4 * (-(sizes[-1] * 3 // 2) // 4)  # ceil to multiple of 4
            sizes.append(min(nxt, self.schedule_cap))
        return tuple(sizes)


@dataclass(frozen=True)
class SpectralResult:
    """One eigenvalue with provenance metadata and an error estimate."""

    energy: mp.mpf
    N: int
    parity: str
    g: mp.mpf
    method: str
    size: int
    error_estimate: mp.mpf
    levels: tuple = ()

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be non-negative")
        if self.method not in ("basis", "lattice"):
            raise ValueError("method must be 'basis' or 'lattice'")

    def to_json(self, digits: int = 30) -> str:
        def fmt(x):
            with mp.workdps(digits + 10):
                return mp.nstr(+mp.mpmathify(x), digits)

        doc = {
            "schema": SPECTRAL_SCHEMA,
            "g": fmt(self.g),
            "N": self.N,
            "parity": self.parity,
            "method": self.method,
            "size": self.size,
            "energy": fmt(self.energy),
            "error": fmt(self.error_estimate),
        }
        return json.dumps(doc, indent=2)


@dataclass(frozen=True)
class SplittingResult:
    """Doublet splitting and mean from one coherent pair of sector runs."""

    g: mp.mpf
    splitting: mp.mpf
    splitting_error: mp.mpf
    mean: mp.mpf
    mean_error: mp.mpf
    minus: SpectralResult
    plus: SpectralResult

    def to_json(self, digits: int = 30) -> str:
        def fmt(x):
            with mp.workdps(digits + 10):
                return mp.nstr(+mp.mpmathify(x), digits)

        doc = {
            "schema": "doublewell/splitting/v1",
            "g": fmt(self.g),
            "splitting": fmt(self.splitting),
            "splitting_error": fmt(self.splitting_error),
            "mean": fmt(self.mean),
            "mean_error": fmt(self.mean_error),
            "size": self.plus.size,
            "method": self.plus.method,
        }
        return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Matrix assembly.  Operators are kept as bands {offset: column-indexed
# values} with band[o][n] = M[n + o, n]; everything is built at the
# caller's working precision.
# ---------------------------------------------------------------------------


def _shifted_potential(v: tuple[Fraction, ...], c: Fraction):
    """Coefficients of V(c + u) as a polynomial in u, exactly."""
    out = [Fraction(0)] * len(v)
    for p, vp in enumerate(v):
        if vp == 0:
            continue
        for j in range(p + 1):
            out[j] += vp * math.comb(p, j) * c ** (p - j)
    return tuple(out)


def _kinetic_bands(nx: int):
    """Bands of -(1/2) d^2/dx^2 in the oscillator basis.

    band[o][n] holds M[n + o, n], so the sub- and superdiagonal lists
    of this symmetric operator are index-shifted copies, not equal.
    """
    diag = [mp.mpf(2 * n + 1) / 4 for n in range(nx)]
    up = [-mp.sqrt((n + 1) * (n + 2)) / 4 for n in range(nx)]
    down = [-mp.sqrt(n * (n - 1)) / 4 if n >= 2 else mp.mpf(0)
            for n in range(nx)]
    return {0: diag, 2: up, -2: down}


def _position_bands(nx: int):
    lower = [mp.sqrt(n + 1) / mp.sqrt(2) for n in range(nx)]
    raise_band = lower
    lower_band = [mp.sqrt(n) / mp.sqrt(2) for n in range(nx)]
    return {1: raise_band, -1: lower_band}


def _band_mul(a, b, nx: int):
    """Product of two banded operators, result again as bands.

    (AB)[n+oc, n] = sum over ob of A[n+ob+oa, n+ob] B[n+ob, n].
    """
    out: dict[int, list] = {}
    for oa, va in a.items():
        for ob, vb in b.items():
            oc = oa + ob
            row = out.setdefault(oc, [mp.mpf(0)] * nx)
            for n in range(nx):
                j = n + ob
                if 0 <= j < nx and 0 <= n + oc < nx:
                    row[n] += va[j] * vb[n]
    return out


def _center_hamiltonian_bands(v: tuple[Fraction, ...], center: Fraction,
                              g, width_factor, nx: int):
    """Bands of H in the oscillator basis of width w*sqrt(g) at ``center``.

    In the scaled coordinate x = (q - center)/sigma the operator is
    (1/w^2) T + sum_p v_c[p] sigma^p / g x^p with T the oscillator
    kinetic bands and v_c the potential shifted to the center.
    """
    w = _mpf(width_factor)
    sigma = w * mp.sqrt(g)
    shifted = _shifted_potential(v, center)
    bands: dict[int, list] = {}
    kin = _kinetic_bands(nx)
    for o, vals in kin.items():
        bands[o] = [x / w**2 for x in vals]
    x1 = _position_bands(nx)
    power = None
    for p in range(1, len(shifted)):
        power = x1 if power is None else _band_mul(power, x1, nx)
        if shifted[p] == 0:
            continue
        coeff = _mpf(shifted[p]) * sigma**p / g
        for o, vals in power.items():
            row = bands.setdefault(o, [mp.mpf(0)] * nx)
            for n in range(nx):
                row[n] += coeff * vals[n]
    const = _mpf(shifted[0]) / g if shifted[0] else None
    if const is not None:
        row = bands.setdefault(0, [mp.mpf(0)] * nx)
        for n in range(nx):
            row[n] += const
    return bands


def _overlap_rows(nrows: int, ncols: int, beta):
    """Cross overlaps W[m][n] = <phi_m | phi_n shifted by beta*sqrt(2)>.

    Displaced-oscillator matrix elements by the stable two-term
    recursion; the whole table carries the factor exp(-beta^2/2).
    """
    w00 = mp.exp(-(beta**2) / 2)
    rows = [[mp.mpf(0)] * ncols for _ in range(nrows)]
    rows[0][0] = w00
    for n in range(1, ncols):
        rows[0][n] = rows[0][n - 1] * (-beta) / mp.sqrt(n)
    for m in range(1, nrows):
        prev = rows[m - 1]
        cur = rows[m]
        rm = mp.sqrt(m)
        for n in range(ncols):
            acc = beta * prev[n]
            if n:
                acc += mp.sqrt(n) * prev[n - 1]
            cur[n] = acc / rm
    return rows


def _dense_from_bands(bands, n: int):
    out = [[mp.mpf(0)] * n for _ in range(n)]
    for o, vals in bands.items():
        for col in range(n):
            row = col + o
            if 0 <= row < n:
                out[row][col] = vals[col]
    return out


def _assemble_sector(parity: str, n: int, g, cfg: SolverConfig):
    """Hamiltonian and overlap of one parity block at the current dps."""
    v = cfg.potential
    s = cfg.symmetry_point
    about_s = _shifted_potential(v, s)
    if any(about_s[p] != 0 for p in range(1, len(about_s), 2)):
        raise ValueError("potential is not symmetric about the symmetry point")
    sign = 1 if parity == "+" else -1

    centers = cfg.centers
    w = _mpf(cfg.width_factor)
    sigma = w * mp.sqrt(g)
    if len(centers) == 2:
        c0, c1 = centers
        if c0 + c1 != 2 * s:
            raise ValueError("the two centers must be mirror images in the "
                             "symmetry point")
        beta = _mpf(c1 - c0) / sigma / mp.sqrt(2)
        if beta ** 2 < cfg.single_center_threshold:
            centers = (s,)

    if len(centers) == 1:
        if centers[0] != s:
            raise ValueError("single expansion center must sit at the "
                             "symmetry point")
        # Basis functions of the center have definite parity already;
        # the sector is the even or odd sublattice of indices.  Band
        # products are exact only a few indices below the truncation,
        # so pad the band table past the largest index used.
        p0 = 0 if parity == "+" else 1
        idx = [p0 + 2 * j for j in range(n)]
        nx = idx[-1] + 1 + max(2, len(v) - 1)
        hb = _center_hamiltonian_bands(v, centers[0], g,
                                       cfg.width_factor, nx)
        h = [[mp.mpf(0)] * n for _ in range(n)]
        for i, mi in enumerate(idx):
            for j, mj in enumerate(idx):
                band = hb.get(mi - mj)
                if band is not None:
                    h[i][j] = band[mj]
        for i in range(n):
            for j in range(i):
                hv = (h[i][j] + h[j][i]) / 2
                h[i][j] = h[j][i] = hv
        smat = [[mp.mpf(1) if i == j else mp.mpf(0) for j in range(n)]
                for i in range(n)]
        return h, smat

    pad = max(2, len(v) - 1)
    nx = n + pad
    h0 = _center_hamiltonian_bands(v, c0, g, cfg.width_factor, nx)
    h1 = _center_hamiltonian_bands(v, c1, g, cfg.width_factor, nx)
    wrows = _overlap_rows(n, nx, beta)

    dense = _dense_from_bands(h0, n)
    # Cross block <A_m|H|B_k> = sum_j W[m][j] (H about center 1)[j, k].
    cross = [[mp.mpf(0)] * n for _ in range(n)]
    for o, vals in h1.items():
        for k in range(n):
            j = k + o
            if 0 <= j < nx:
                bv = vals[k]
                if bv:
                    for m in range(n):
                        cross[m][k] += wrows[m][j] * bv

    h = [[mp.mpf(0)] * n for _ in range(n)]
    smat = [[mp.mpf(0)] * n for _ in range(n)]
    for m in range(n):
        for k in range(n):
            ps = sign if k % 2 == 0 else -sign
            h[m][k] = dense[m][k] + ps * cross[m][k]
            smat[m][k] = ps * wrows[m][k]
        smat[m][m] += 1
    # The parity-adapted blocks are symmetric analytically; enforce it
    # against rounding so the refinement sees an exactly symmetric pair.
    for m in range(n):
        for k in range(m):
            hv = (h[m][k] + h[k][m]) / 2
            h[m][k] = h[k][m] = hv
            sv = (smat[m][k] + smat[k][m]) / 2
            smat[m][k] = smat[k][m] = sv
    return h, smat


# ---------------------------------------------------------------------------
# Eigenpair extraction: float64 seed, arbitrary-precision polish.
# ---------------------------------------------------------------------------


def _seed_float64(h, smat, index: int):
    """Generalized eigenpair seed from a float64 projection."""
    import numpy as np

    n = len(h)
    if index >= n:
        raise ValueError("level index exceeds the sector size")
    hf = np.array([[float(x) for x in row] for row in h])
    sf = np.array([[float(x) for x in row] for row in smat])
    try:
        low = np.linalg.cholesky(sf)
        y = np.linalg.solve(low, hf)
        a = np.linalg.solve(low, y.T).T
        vals, vecs = np.linalg.eigh((a + a.T) / 2)
        yvec = vecs[:, index]
        xvec = np.linalg.solve(low.T, yvec)
    except np.linalg.LinAlgError:
        # Overlap not positive definite in float64; fall back to
        # canonical orthogonalization on its well-conditioned part.
        svals, svecs = np.linalg.eigh(sf)
        keep = svals > max(svals.max(), 1.0) * 1e-12
        basis = svecs[:, keep] / np.sqrt(svals[keep])
        a = basis.T @ hf @ basis
        vals, vecs = np.linalg.eigh((a + a.T) / 2)
        if index >= len(vals):
            raise RuntimeError("float64 seed lost too many overlap "
                               "directions") from None
        xvec = basis @ vecs[:, index]
    return float(vals[index]), [float(t) for t in xvec]


def _refine_eigenpair(hm, sm, mu, vec, floor=None, max_iter: int = 30):
    """Rayleigh-quotient iteration on (H - mu S) at the current dps.

    Cubically convergent from any reasonable seed; returns the refined
    eigenvalue and S-normalized vector.  The full working tolerance can
    be unreachable when the overlap eats into the precision, so a
    plateau is accepted once the update stops shrinking below ``floor``
    (an absolute eigenvalue change the caller considers settled).
    """
    n = hm.rows
    v = mp.matrix(vec)
    nrm = mp.sqrt(abs((v.T * (sm * v))[0]))
    v = v / nrm
    tol = mp.mpf(10) ** (-(mp.dps - 6))
    accept = tol * 1e6 if floor is None else max(tol * 1e6, floor)
    last = None
    for _ in range(max_iter):
        shifted = hm - mu * sm
        rhs = sm * v
        try:
            w = mp.lu_solve(shifted, rhs)
        except (ZeroDivisionError, ValueError):
            # mu collided with an eigenvalue to full precision; nudge.
            mu = mu * (1 + mp.mpf(10) ** (-(mp.dps - 8))) \
                + mp.mpf(10) ** (-(mp.dps - 8))
            continue
        nrm = mp.sqrt(abs((w.T * (sm * w))[0]))
        v = w / nrm
        mu_new = (v.T * (hm * v))[0] / (v.T * (sm * v))[0]
        change = abs(mu_new - mu)
        mu = mu_new
        if change <= tol * max(1, abs(mu)):
            return mu, v
        if last is not None and change >= last and change <= accept:
            return mu, v
        last = change
    raise RuntimeError("eigenpair refinement did not settle at "
                       f"{mp.dps} digits (size {n})")


def _cholesky_gate(smat):
    """Positive-definiteness certificate; returns the factor diagonal."""
    sm = mp.matrix(smat)
    low = mp.cholesky(sm)
    return [low[i, i] for i in range(sm.rows)]


def _load_checkpoint(cfg: SolverConfig, n_level: int, parity: str, g):
    if cfg.checkpoint is None:
        return None
    try:
        with open(cfg.checkpoint, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        return None
    with mp.workdps(40):
        same_g = mp.almosteq(mp.mpmathify(doc.get("g", "nan")), g)
    if not (same_g and doc.get("N") == n_level
            and doc.get("parity") == parity
            and doc.get("target") == cfg.target_digits):
        return None
    return doc


def _save_checkpoint(cfg: SolverConfig, n_level: int, parity: str, g,
                     size: int, digits: int, energy, increment, chol_diag):
    if cfg.checkpoint is None:
        return
    with mp.workdps(digits + 10):
        doc = {
            "schema": CHECKPOINT_SCHEMA,
            "g": mp.nstr(+g, digits),
            "N": n_level,
            "parity": parity,
            "target": cfg.target_digits,
            "size": size,
            "digits": digits,
            "energy": mp.nstr(+energy, digits),
            "increment": mp.nstr(+increment, 8) if increment is not None
            else None,
            "cholesky_diag": [mp.nstr(+d, 20) for d in chol_diag],
        }
    tmp = cfg.checkpoint + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
    import os

    os.replace(tmp, cfg.checkpoint)


def _basis_schedule_runner(levels, g, cfg: SolverConfig, work: int):
    """Walk the basis schedule for one or two (N, parity) requests.

    ``levels`` is a list of (N, parity) pairs solved on the same
    schedule at the same precision.  Returns per-request lists of
    (size, energy) history plus the stopping increment; the walk stops
    once every request's last two energies agree to the target.
    """
    tol = mp.mpf(10) ** (-cfg.target_digits)
    floor = mp.mpf(10) ** (-(cfg.target_digits + 10))
    history: list[list] = [[] for _ in levels]
    state: list = [None] * len(levels)  # (mu, vec) carried across sizes
    schedule = cfg.schedule()
    start_at = 0
    resumed = None
    if len(levels) == 1:
        resumed = _load_checkpoint(cfg, levels[0][0], levels[0][1], g)
    if resumed is not None:
        sizes = [s for s in schedule if s >= resumed["size"]]
        if sizes and sizes[0] in schedule:
            start_at = schedule.index(sizes[0])
    chol_diag = []
    done = False
    for si in range(start_at, len(schedule)):
        size = schedule[si]
        per_sector: dict[str, tuple] = {}
        for which, (n_level, parity) in enumerate(levels):
            if parity not in per_sector:
                h, smat = _assemble_sector(parity, size, g, cfg)
                chol_diag = _cholesky_gate(smat)
                per_sector[parity] = (mp.matrix(h), mp.matrix(smat))
            hm, sm = per_sector[parity]
            if state[which] is None:
                mu0, vec = _seed_float64(
                    [[hm[i, j] for j in range(size)] for i in range(size)],
                    [[sm[i, j] for j in range(size)] for i in range(size)],
                    n_level)
                if resumed is not None:
                    mu0 = mp.mpmathify(resumed["energy"])
            else:
                mu_prev, v_prev = state[which]
                mu0 = mu_prev
                vec = list(v_prev) + [mp.mpf(0)] * (size - v_prev.rows)
            mu, v = _refine_eigenpair(hm, sm, mp.mpf(mu0), vec,
                                      floor=floor)
            state[which] = (mu, v)
            history[which].append((size, mu))
            if len(levels) == 1:
                inc = (abs(history[0][-1][1] - history[0][-2][1])
                       if len(history[0]) >= 2 else None)
                _save_checkpoint(cfg, levels[0][0], levels[0][1], g, size,
                                 work, mu, inc, chol_diag)
        if all(len(hist) >= 2
               and abs(hist[-1][1] - hist[-2][1])
               <= tol * max(1, abs(hist[-1][1]))
               for hist in history):
            done = True
            break
    if not done:
        diag = "; ".join(
            f"N={lv[0]} parity={lv[1]}: " + ", ".join(
                f"n={s}: {mp.nstr(e, 12)}" for s, e in hist[-3:])
            for lv, hist in zip(levels, history))
        raise RuntimeError(
            "basis energies did not converge to "
            f"{cfg.target_digits} digits within the schedule "
            f"(cap {cfg.schedule_cap}); tail: {diag}")
    return history


def basis_eigenvalue(N: int, parity: str, g,
                     config: SolverConfig | None = None) -> SpectralResult:
    """Variational eigenvalue E_{N,parity}(g) in the two-center basis.

    The error estimate is the change over the last basis-size
    increment, which for a variationally convergent sequence bounds the
    remaining truncation error well.  Raises ``RuntimeError`` if the
    schedule cap is reached before two successive energies agree to
    ``config.target_digits``, or if the overlap matrix loses positive
    definiteness at working precision even after one retry with extra
    guard digits.
    """
    cfg = config or SolverConfig()
    if parity not in ("+", "-"):
        raise ValueError("parity must be '+' or '-'")
    if N < 0:
        raise ValueError("N must be non-negative")
    work = cfg.working_digits()
    for attempt in (0, 1):
        with mp.workdps(work):
            gv = _mpf(Fraction(g) if not isinstance(g, (mp.mpf, float))
                      else g)
            try:
                history = _basis_schedule_runner([(N, parity)], gv, cfg,
                                                 work)
            except ValueError as exc:
                if "positive-definite" in str(exc) and attempt == 0:
                    work += 30
                    continue
                raise
        hist = history[0]
        size, energy = hist[-1]
        err = abs(hist[-1][1] - hist[-2][1])
        return SpectralResult(energy=energy, N=N, parity=parity, g=gv,
                              method="basis", size=size,
                              error_estimate=err)
    raise RuntimeError("unreachable")


def splitting_and_mean(g, config: SolverConfig | None = None) \
        -> SplittingResult:
    """Ground-doublet splitting E_{0,-} - E_{0,+} and mean, coherently.

    Both parity sectors walk the same basis schedule at the same
    working precision, which is padded so the exponentially small
    splitting stays well above the arithmetic floor.  An explicit
    ``guard_digits`` below the representability rule is rejected.  A
    loss of overlap positive definiteness is retried once with thirty
    extra digits, as in ``basis_eigenvalue``.
    """
    cfg = config or SolverConfig()
    needed = splitting_guard_digits(g)
    if cfg.guard_digits is not None and cfg.guard_digits < needed:
        raise ValueError(
            f"guard_digits={cfg.guard_digits} cannot resolve a splitting "
            f"of order exp(-1/6g); need at least {needed}")
    work = cfg.working_digits(extra_guard=needed)
    for attempt in (0, 1):
        with mp.workdps(work):
            gv = _mpf(Fraction(g) if not isinstance(g, (mp.mpf, float))
                      else g)
            try:
                history = _basis_schedule_runner([(0, "+"), (0, "-")], gv,
                                                 cfg, work)
            except ValueError as exc:
                if "positive-definite" in str(exc) and attempt == 0:
                    work += 30
                    continue
                raise
            hist_p, hist_m = history
            size = hist_p[-1][0]
            e_plus, e_minus = hist_p[-1][1], hist_m[-1][1]
            err_p = abs(hist_p[-1][1] - hist_p[-2][1])
            err_m = abs(hist_m[-1][1] - hist_m[-2][1])
            split = e_minus - e_plus
            split_prev = hist_m[-2][1] - hist_p[-2][1]
            mean = (e_minus + e_plus) / 2
            # The sectors share their single-well truncation error almost
            # exactly, so the difference converges far faster than either
            # energy; the honest estimate for it is its own last increment
            # (plus the representation floor of the energies), by the same
            # rule the energies use.
            floor = abs(e_minus) * mp.mpf(10) ** (-(work - 5))
            split_err = abs(split - split_prev) + floor
        res_p = SpectralResult(energy=e_plus, N=0, parity="+", g=gv,
                               method="basis", size=size,
                               error_estimate=err_p)
        res_m = SpectralResult(energy=e_minus, N=0, parity="-", g=gv,
                               method="basis", size=size,
                               error_estimate=err_m)
        return SplittingResult(g=gv, splitting=split,
                               splitting_error=split_err, mean=mean,
                               mean_error=(err_p + err_m) / 2,
                               minus=res_m, plus=res_p)
    raise RuntimeError("unreachable")


# ---------------------------------------------------------------------------
# Lattice cross-check.
# ---------------------------------------------------------------------------


def _tridiag_solve(diag, off, rhs):
    """Solve a symmetric tridiagonal system with partial pivoting.

    The shifted matrices fed to inverse iteration are nearly singular
    by construction, so plain Thomas elimination is not enough; row
    swaps introduce one extra superdiagonal of fill-in.
    """
    n = len(diag)
    a = list(diag)
    b = [x for x in off] + [mp.mpf(0)]          # superdiagonal
    c = [mp.mpf(0)] * n                         # second superdiagonal
    low = [x for x in off]                      # subdiagonal
    x = list(rhs)
    for k in range(n - 1):
        if abs(low[k]) > abs(a[k]):
            a[k], low[k] = low[k], a[k]
            b[k], a[k + 1] = a[k + 1], b[k]
            c[k], b[k + 1] = b[k + 1], c[k]
            x[k], x[k + 1] = x[k + 1], x[k]
        if a[k] == 0:
            raise ZeroDivisionError("singular shifted lattice matrix")
        m = low[k] / a[k]
        a[k + 1] -= m * b[k]
        if k + 1 < n - 1:
            b[k + 1] -= m * c[k]
        x[k + 1] -= m * x[k]
    if a[n - 1] == 0:
        raise ZeroDivisionError("singular shifted lattice matrix")
    x[n - 1] /= a[n - 1]
    if n >= 2:
        x[n - 2] = (x[n - 2] - b[n - 2] * x[n - 1]) / a[n - 2]
    for k in range(n - 3, -1, -1):
        x[k] = (x[k] - b[k] * x[k + 1] - c[k] * x[k + 2]) / a[k]
    return x


def _parity_project(vec, sign: int):
    n = len(vec)
    return [(vec[j] + sign * vec[n - 1 - j]) / 2 for j in range(n)]


def _lattice_level(diag, off, mu0, sign: int, seed=None, max_iter: int = 40):
    """One eigenvalue of the tridiagonal operator near ``mu0``.

    Shifted inverse iteration with a parity projector applied every
    step: the doublet partner sits a breath away in spectrum but in the
    other parity subspace, and the projector keeps the iteration from
    drifting into it.
    """
    n = len(diag)
    if seed is None:
        # A start the projector cannot annihilate: flat for even
        # parity, a linear ramp about the midpoint for odd.
        if sign > 0:
            v = [mp.mpf(1)] * n
        else:
            v = [mp.mpf(2 * j - (n - 1)) for j in range(n)]
    else:
        v = list(seed)
    v = _parity_project(v, sign)
    mu = mp.mpf(mu0)
    tol = mp.mpf(10) ** (-(mp.dps - 6))
    last = None
    for _ in range(max_iter):
        try:
            w = _tridiag_solve([d - mu for d in diag], off, v)
        except ZeroDivisionError:
            mu += mp.mpf(10) ** (-(mp.dps - 8)) * max(1, abs(mu))
            continue
        w = _parity_project(w, sign)
        nrm = mp.sqrt(mp.fsum(x * x for x in w))
        if nrm == 0:
            raise RuntimeError("parity projector annihilated the iterate; "
                               "wrong parity seed for this level")
        v = [x / nrm for x in w]
        hv0 = [diag[j] * v[j] for j in range(n)]
        for j in range(n - 1):
            hv0[j] += off[j] * v[j + 1]
            hv0[j + 1] += off[j] * v[j]
        mu_new = mp.fsum(v[j] * hv0[j] for j in range(n))
        change = abs(mu_new - mu)
        mu = mu_new
        if change <= tol * max(1, abs(mu)):
            return mu, v
        if last is not None and change >= last and change <= tol * 1e6:
            return mu, v
        last = change
    raise RuntimeError("lattice inverse iteration did not settle")


def _lattice_grid(g, cfg: SolverConfig, half_width, npoints: int):
    """Diagonal and off-diagonal of the discretized operator."""
    s = _mpf(cfg.symmetry_point)
    h = 2 * half_width / (npoints + 1)
    off = -g / (2 * h * h)
    vpoly = [_mpf(c) for c in cfg.potential]
    diag = []
    for j in range(1, npoints + 1):
        q = s - half_width + j * h
        vq = mp.mpf(0)
        for c in reversed(vpoly):
            vq = vq * q + c
        diag.append(g / (h * h) + vq / g)
    return diag, [off] * (npoints - 1), h


def _float_seed_lattice(diag, off, index: int):
    import numpy as np

    n = len(diag)
    m = np.zeros((n, n))
    for j in range(n):
        m[j, j] = float(diag[j])
    for j in range(n - 1):
        m[j, j + 1] = m[j + 1, j] = float(off[j])
    vals, vecs = np.linalg.eigh(m)
    return float(vals[index]), [float(t) for t in vecs[:, index]]


def lattice_eigenvalue(N: int, parity: str, g,
                       config: SolverConfig | None = None) -> SpectralResult:
    """Finite-difference eigenvalue with h^2 Richardson elimination.

    Discretizes H on a symmetric interval about the symmetry point with
    Dirichlet ends, halves the step ``extrapolation_depth`` times, and
    extrapolates the eigenvalue sequence geometrically.  A
    domain-doubling probe at the coarse step detects boundary
    contamination and enlarges the interval before refining; persistent
    contamination raises ``RuntimeError``.
    """
    cfg = config or SolverConfig()
    if parity not in ("+", "-"):
        raise ValueError("parity must be '+' or '-'")
    if N < 0:
        raise ValueError("N must be non-negative")
    sign = 1 if parity == "+" else -1
    index = 2 * N + (0 if parity == "+" else 1)
    work = cfg.working_digits()
    with mp.workdps(work):
        gv = _mpf(Fraction(g) if not isinstance(g, (mp.mpf, float)) else g)
        sigma = mp.sqrt(gv)
        s = _mpf(cfg.symmetry_point)
        span = max(abs(_mpf(c) - s) for c in cfg.centers)
        if cfg.half_width is not None:
            width = _mpf(cfg.half_width)
        else:
            width = span + sigma * (mp.sqrt(2 * work * mp.log(10)) + 4)
        if cfg.coarse_points is not None:
            n0 = cfg.coarse_points
        else:
            n0 = max(32, int(mp.ceil(2 * width / (sigma / 6))) - 1)

        # Boundary probe: same step, doubled interval.  Any visible
        # difference is contamination from the Dirichlet walls.
        for _ in range(4):
            diag, off, h = _lattice_grid(gv, cfg, width, n0)
            mu0, vec0 = _float_seed_lattice(diag, off, index)
            e_here, v_here = _lattice_level(diag, off, mu0, sign, vec0)
            n_wide = 2 * (n0 + 1) - 1
            diag2, off2, _ = _lattice_grid(gv, cfg, 2 * width, n_wide)
            mu0w, vec0w = _float_seed_lattice(diag2, off2, index)
            e_wide, _ = _lattice_level(diag2, off2, mu0w, sign, vec0w)
            if abs(e_here - e_wide) <= mp.mpf(10) ** (-cfg.target_digits - 2) \
                    * max(1, abs(e_here)):
                break
            width *= 2
            n0 = 2 * (n0 + 1) - 1
        else:
            raise RuntimeError("boundary contamination persists after "
                               "repeated domain doubling")

        levels = [e_here]
        npts = n0
        seed_vec = v_here
        mu_seed = e_here
        for _ in range(cfg.extrapolation_depth):
            npts = 2 * (npts + 1) - 1
            diag, off, h = _lattice_grid(gv, cfg, width, npts)
            if seed_vec is None:
                seed = None
            else:
                seed = []
                for x in seed_vec:
                    seed.extend((x, x))
                seed = seed[:npts] + [mp.mpf(0)] * (npts - min(npts,
                                                               len(seed)))
            e_k, v_k = _lattice_level(diag, off, mu_seed, sign, seed)
            levels.append(e_k)
            seed_vec = v_k
            mu_seed = e_k
        value = richardson_geometric(levels, ratio=4)
        prev = richardson_geometric(levels[:-1], ratio=4)
        err = abs(value - prev)
    return SpectralResult(energy=value, N=N, parity=parity, g=gv,
                          method="lattice", size=npts,
                          error_estimate=err, levels=tuple(levels))
