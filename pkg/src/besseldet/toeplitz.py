"""Bessel-entry Toeplitz matrices M_ij = m_{j-i}, m_k = I_{-k-nu}(t).

The moments and their t-derivatives live in a :class:`MomentTable`; a
:class:`ToeplitzFactorization` keeps pivoted LU factors together with
log|det| and the sign, so determinants far outside the float64 range stay
usable. ``dlogdet`` applies Jacobi's formula for the first three
t-derivatives of log D.

Working precision. The map from moments to D_{n,nu}(t) amplifies relative
errors by kappa = sum_ij |M_ij (M^-1)_ji|, which grows roughly like
10^(0.5 n + 0.4 t) for these matrices (about 1e54 at n = t = 64). Double-double
moments therefore cannot resolve the determinant beyond n ~ 12 at t ~ n.
:func:`auto_digits` picks 32 digits (the dd engine) while the estimate leaves
enough headroom, and an mpmath working precision otherwise. Results are
always returned as :class:`ExtReal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _dd
from ._backend import py
from ._engine import DD_DIGITS, DDEngine, MPEngine, engine_for, mp_context, mpf_to_ext
from .bessel import bessel_i
from .extprec import ExtPrecDomainError, ExtReal, as_ext

__all__ = [
    "MAX_N", "DERIV_ORDERS", "TARGET_DIGITS", "MomentTable", "ToeplitzFactorization",
    "SingularToeplitzError", "log10_kappa_bound", "auto_digits", "build_moment_table",
    "factorize", "solve", "solve_transpose", "dlogdet", "logdet", "sensitivity",
]

MAX_N = 128
DERIV_ORDERS = 3
# orders beyond [-n, n] kept in the table: the orthopoly layer works at n+1
# and forms right-hand sides one index further out
TABLE_MARGIN = 3
# relative accuracy the automatic precision choice aims for in log D and its derivatives
TARGET_DIGITS = 24
GUARD_DIGITS = 8


class SingularToeplitzError(ArithmeticError):
    """A zero pivot: D_{n,nu}(t) vanishes to working precision."""

    def __init__(self, n, nu, t, step):
        super().__init__(f"D_{{{n},{float(nu)}}}({float(t)}) is singular at pivot {step}")
        self.n, self.nu, self.t, self.step = n, nu, t, step


def log10_kappa_bound(n: int, t: float) -> float:
    """A priori upper estimate of log10 of the moment-to-determinant sensitivity."""
    return 0.5 * n + 0.4 * float(t) + 2.0


def auto_digits(n: int, t: float, target: int = TARGET_DIGITS) -> int:
    est = log10_kappa_bound(n, t)
    if DD_DIGITS - est >= target:
        return DD_DIGITS
    return int(math.ceil(target + est + GUARD_DIGITS))


@dataclass(frozen=True, eq=False)
class MomentTable:
    """m_k^{(d)}(t) for kmin <= k <= kmax and d = 0..3.

    ``hi[k - kmin, d] + lo[k - kmin, d]`` is the d-th t-derivative of m_k in
    double-double. When ``digits > 32`` the authoritative values are the mpf
    entries of ``values`` (same indexing) and hi/lo are their roundings.
    """

    nu: ExtReal
    t: ExtReal
    kmin: int
    kmax: int
    hi: np.ndarray = field(repr=False)
    lo: np.ndarray = field(repr=False)
    digits: int = DD_DIGITS
    values: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        self.hi.setflags(write=False)
        self.lo.setflags(write=False)

    @property
    def engine(self):
        return engine_for(self.digits)

    @property
    def store(self):
        return self.engine.from_table(self.hi, self.lo, self.values)

    def m(self, k: int, d: int = 0) -> ExtReal:
        if not self.kmin <= k <= self.kmax:
            raise IndexError(f"moment index {k} outside [{self.kmin}, {self.kmax}]")
        i = k - self.kmin
        return ExtReal._raw(float(self.hi[i, d]), float(self.lo[i, d]))

    def covers(self, n: int) -> bool:
        return self.kmin <= -n and self.kmax >= n

    def matrix(self, n: int, d: int = 0, transpose: bool = False, cols: Optional[int] = None):
        """Engine matrix with entries m_{j-i}^{(d)} (m_{i-j} with ``transpose``).

        Rows run over i = 0..n-1 and columns over j = 0..cols-1 (default n).
        """
        cols = n if cols is None else cols
        if not self.covers(max(n, cols)):
            raise ValueError(f"moment table does not cover n = {max(n, cols)}")
        i, j = np.arange(n), np.arange(cols)
        k = i[:, None] - j[None, :] if transpose else j[None, :] - i[:, None]
        return self.engine.gather(self.store, k - self.kmin, d)

    def vector(self, ks: Sequence[int], d: int = 0):
        """Engine column (len(ks) x 1) holding m_k^{(d)} for k in ks."""
        for k in ks:
            if not self.kmin <= k <= self.kmax:
                raise IndexError(f"moment index {k} outside [{self.kmin}, {self.kmax}]")
        idx = np.asarray(list(ks), dtype=np.int64).reshape(-1, 1) - self.kmin
        return self.engine.gather(self.store, idx, d)

    def perturbed(self, rel: float, seed: int = 0) -> MomentTable:
        """Copy with every slot multiplied by (1 + rel*r), r uniform in [-1, 1].

        Used to show that identity residuals respond to errors in the input.
        """
        r = np.random.default_rng(seed).uniform(-1.0, 1.0, size=self.hi.shape) * rel
        ph, pl = py(_dd.dd_mul_d)(self.hi, self.lo, 1.0 + r)
        values = None
        if self.values is not None:
            ctx = mp_context(self.digits)
            values = tuple(tuple(v * (1 + ctx.mpf(float(r[i, d]))) for d, v in enumerate(row))
                           for i, row in enumerate(self.values))
        return MomentTable(self.nu, self.t, self.kmin, self.kmax, ph, pl, self.digits, values)


def _moments_dd(nu: ExtReal, t: ExtReal, ks):
    return {k: bessel_i(-nu - k, t) for k in ks}


def _moments_mp(nu: ExtReal, t: ExtReal, ks, digits: int):
    ctx = mp_context(digits)
    nu_mp = ctx.mpf(nu.hi) + ctx.mpf(nu.lo)
    t_mp = ctx.mpf(t.hi) + ctx.mpf(t.lo)
    return {k: ctx.besseli(-nu_mp - k, t_mp) for k in ks}


def build_moment_table(nu, t, n: int, digits: Optional[int] = None) -> MomentTable:
    """Moments for k in [-n-3, n+3] with derivatives up to order 3.

    m_k' = (m_{k-1} + m_{k+1})/2 follows from I_mu' = (I_{mu-1} + I_{mu+1})/2,
    so all derivative slots are binomial combinations of plain moments.
    ``digits=None`` chooses the working precision with :func:`auto_digits`;
    32 selects the double-double path (moments from :mod:`besseldet.bessel`).
    """
    if not 1 <= n <= MAX_N:
        raise ExtPrecDomainError(f"n must lie in [1, {MAX_N}]")
    nu, t = as_ext(nu), as_ext(t)
    if not t.hi > 0.0:
        raise ExtPrecDomainError("t must be > 0")
    if digits is None:
        digits = auto_digits(n + 1, t.hi)
    digits = max(int(digits), DD_DIGITS)
    kmin, kmax = -n - TABLE_MARGIN, n + TABLE_MARGIN
    ks = range(kmin - DERIV_ORDERS, kmax + DERIV_ORDERS + 1)
    mp_path = digits > DD_DIGITS
    base = _moments_mp(nu, t, ks, digits) if mp_path else _moments_dd(nu, t, ks)
    zero = mp_context(digits).mpf(0) if mp_path else ExtReal(0.0)
    size = kmax - kmin + 1
    hi = np.empty((size, DERIV_ORDERS + 1))
    lo = np.empty((size, DERIV_ORDERS + 1))
    rows = []
    for k in range(kmin, kmax + 1):
        row = []
        for d in range(DERIV_ORDERS + 1):
            acc = zero
            for j in range(d + 1):
                acc = acc + math.comb(d, j) * base[k - d + 2 * j]
            acc = acc * (0.5 ** d)
            ext = mpf_to_ext(acc) if mp_path else acc
            hi[k - kmin, d], lo[k - kmin, d] = ext.hi, ext.lo
            row.append(acc)
        rows.append(tuple(row))
    values = tuple(rows) if mp_path else None
    return MomentTable(nu, t, kmin, kmax, hi, lo, digits, values)


@dataclass(frozen=True, eq=False)
class ToeplitzFactorization:
    """P M = L U for M_ij = m_{j-i}, unit-diagonal L packed below U."""

    n: int
    nu: ExtReal
    t: ExtReal
    perm: np.ndarray = field(repr=False)
    pivots: list = field(repr=False)
    logdet_abs: ExtReal
    sign: int
    growth: float
    digits: int = DD_DIGITS
    data: object = field(default=None, repr=False)

    @property
    def engine(self):
        return engine_for(self.digits)

    @property
    def lu(self) -> list:
        """Packed factors as rows of ExtReal."""
        if self.n == 0:
            return []
        lu = self.data[0]
        if self.digits <= DD_DIGITS:
            h, l = self.data[0], self.data[1]
            return [[ExtReal._raw(float(h[i, j]), float(l[i, j])) for j in range(self.n)]
                    for i in range(self.n)]
        return [[mpf_to_ext(x) for x in row] for row in lu]

    def determinant(self) -> ExtReal:
        """sign * exp(logdet_abs); raises a range error outside float64 range."""
        from .extprec import exp
        return self.sign * exp(self.logdet_abs)


def factor_matrix(engine, a):
    """(data, perm, logdet_abs, sign, growth, pivots, singular_at) of an engine matrix."""
    data, perm, sign, growth, pivots, singular_at = engine.factor(a)
    if singular_at >= 0:
        return data, perm, None, 0, growth, pivots, singular_at
    n = len(pivots)
    logdet = ExtReal(0.0)
    if isinstance(engine, MPEngine):
        ctx = engine.ctx
        lu = data[0]
        logdet = mpf_to_ext(ctx.fsum(ctx.log(abs(lu[i][i])) for i in range(n)))
        for i in range(n):
            if lu[i][i] < 0:
                sign = -sign
    else:
        for p in pivots:
            if p.hi < 0.0:
                sign, p = -sign, -p
            logdet = logdet + ExtReal._raw(*_dd.dd_log(p.hi, p.lo))
    return data, perm, logdet, int(sign), growth, pivots, -1


def factorize(tab: MomentTable, n: int) -> ToeplitzFactorization:
    """Pivoted LU of (m_{j-i}); n = 0 gives the empty determinant D_0 = 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return ToeplitzFactorization(0, tab.nu, tab.t, np.zeros(0, dtype=np.int64), [],
                                     ExtReal(0.0), 1, 1.0, tab.digits, None)
    data, perm, logdet, sign, growth, pivots, singular_at = factor_matrix(tab.engine, tab.matrix(n, 0))
    if singular_at >= 0:
        raise SingularToeplitzError(n, tab.nu, tab.t, singular_at)
    return ToeplitzFactorization(n, tab.nu, tab.t, perm, pivots, logdet, sign,
                                 growth, tab.digits, data)


def solve_engine(fac: ToeplitzFactorization, b, transpose: bool = False):
    """Engine-level solve of M X = B (M^T X = B with ``transpose``)."""
    if fac.n == 0:
        return b
    rows = fac.engine.shape(b)[0]
    if rows != fac.n:
        raise ValueError(f"right-hand side has {rows} rows, expected {fac.n}")
    return fac.engine.solve(fac.data, fac.perm, b, transpose=transpose)


def _solve_public(fac, rhs, transpose):
    vals = [as_ext(v) for v in rhs]
    if len(vals) != fac.n:
        raise ValueError(f"right-hand side has {len(vals)} entries, expected {fac.n}")
    if fac.n == 0:
        return []
    engine = fac.engine
    x = solve_engine(fac, engine.from_ext(vals, (fac.n, 1)), transpose)
    return engine.column(x)


def solve(fac: ToeplitzFactorization, rhs: Sequence) -> list:
    """x with M x = rhs (dd path: one step of iterative refinement)."""
    return _solve_public(fac, rhs, False)


def solve_transpose(fac: ToeplitzFactorization, rhs: Sequence) -> list:
    """x with M^T x = rhs, reusing the same factors."""
    return _solve_public(fac, rhs, True)


def logdet(tab: MomentTable, n: int):
    """(log|D_n|, sign) for the table's (nu, t)."""
    fac = factorize(tab, n)
    return fac.logdet_abs, fac.sign


def dlogdet(tab: MomentTable, n: int, order: int = 3,
            fac: Optional[ToeplitzFactorization] = None) -> list:
    """[L', L'', L'''][:order] for L(t) = log D_{n,nu}(t), by Jacobi's formula.

    With X_d = M^{-1} M^{(d)}:
        L'   = tr X1
        L''  = tr X2 - tr X1^2
        L''' = tr X3 - 3 tr X2 X1 + 2 tr X1^3
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if n == 0:
        return [ExtReal(0.0)] * order
    if fac is None:
        fac = factorize(tab, n)
    engine = fac.engine
    xs = [solve_engine(fac, tab.matrix(n, d)) for d in range(1, order + 1)]
    out = [engine.trace(xs[0])]
    if order >= 2:
        out.append(engine.trace(xs[1]) - engine.trace_product(xs[0], xs[0]))
    if order >= 3:
        x11 = engine.matmul(xs[0], xs[0])
        out.append(engine.trace(xs[2]) - 3 * engine.trace_product(xs[1], xs[0])
                   + 2 * engine.trace_product(x11, xs[0]))
    return out


def sensitivity(tab: MomentTable, n: int, fac: Optional[ToeplitzFactorization] = None) -> float:
    """kappa = sum_ij |M_ij (M^-1)_ji|: relative-error amplification of log|D_n|."""
    if n == 0:
        return 0.0
    if fac is None:
        fac = factorize(tab, n)
    engine = fac.engine
    a = tab.matrix(n, 0)
    eye = engine.from_ext([ExtReal(1.0 if i == j else 0.0) for i in range(n) for j in range(n)], (n, n))
    inv = solve_engine(fac, eye)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += abs(engine.entry(a, i, j).hi * engine.entry(inv, j, i).hi)
    return total
