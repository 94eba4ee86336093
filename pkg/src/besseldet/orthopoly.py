"""Bi-orthogonal polynomial scalars for the Bessel weight.

The monic polynomials pi_n(z) = sum_j c_j z^j and pi~_n(z) = sum_j ct_j z^j
are fixed by the moment conditions

    sum_{j<n} m_{j-i} c_j  = -m_{n-i},     i = 0..n-1   (M c = r)
    sum_{j<n} m_{i-j} ct_j = -m_{i-n},     i = 0..n-1   (M^T ct = rt)

and h_n = sum_{j<=n} c_j m_{j-n}. Differentiating M c = r in t gives

    c'  = M^{-1} (r' - M' c)
    c'' = M^{-1} (r'' - 2 M' c' - M'' c)

with every primed moment read from the :class:`MomentTable` slots, and the
same for ct with transposed matrices.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .extprec import ExtPrecDomainError, ExtReal, as_ext, sqrt
from .toeplitz import (MomentTable, SingularToeplitzError, ToeplitzFactorization,
                       build_moment_table, factor_matrix, factorize, solve_engine)

__all__ = [
    "OPSnapshot", "op_snapshot", "op_derivatives", "dlogD_via_identity",
    "pi0_bordered", "eval_poly", "eval_reversed", "recurrence_residual",
]


@dataclass(frozen=True, eq=False)
class OPSnapshot:
    n: int
    nu: ExtReal
    t: ExtReal
    c: list
    ct: list
    pi0: ExtReal
    h: ExtReal
    gamma: ExtReal
    # sign of h_n; gamma = |h_n|^{-1/2} and the pair (gamma, h_sign) is reported
    h_sign: int
    a_sub: Optional[ExtReal]
    at_sub: Optional[ExtReal]
    digits: int
    pi0_t: Optional[ExtReal] = None
    pi0_tt: Optional[ExtReal] = None
    a_sub_t: Optional[ExtReal] = None
    at_sub_t: Optional[ExtReal] = None
    c_t: Optional[list] = None
    c_tt: Optional[list] = None
    ct_t: Optional[list] = None
    ct_tt: Optional[list] = None
    _state: object = field(default=None, repr=False)

    @property
    def has_derivatives(self) -> bool:
        return self.pi0_t is not None

    @property
    def dlog_pi0(self) -> ExtReal:
        """d/dt log pi_n(0) = c_0'/c_0."""
        if self.pi0_t is None:
            raise ValueError("snapshot has no derivative fields; call op_derivatives")
        return self.pi0_t / self.pi0


def _table_for(nu, t, n, tab, digits):
    if tab is None:
        return build_moment_table(nu, t, max(n, 1), digits)
    if not tab.covers(n):
        raise ValueError(f"moment table does not cover n = {n}")
    return tab


def op_snapshot(nu, t, n: int, tab: Optional[MomentTable] = None,
                fac: Optional[ToeplitzFactorization] = None,
                digits: Optional[int] = None) -> OPSnapshot:
    """pi_n(0), h_n, gamma_n and the sub-leading coefficients at (nu, t).

    Raises :class:`SingularToeplitzError` when D_{n,nu}(t) = 0.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    tab = _table_for(nu, t, n, tab, digits)
    one = ExtReal(1.0)
    if n == 0:
        h = tab.m(0)
        if h.hi == 0.0:
            raise SingularToeplitzError(1, tab.nu, tab.t, 0)
        return _with_h(OPSnapshot(0, tab.nu, tab.t, [one], [one], one, h, one, 1, None, None,
                                  tab.digits, _state=(tab, None, None, None)))
    if fac is None:
        fac = factorize(tab, n)
    engine = fac.engine
    r = engine.neg(tab.vector([n - i for i in range(n)]))
    rt = engine.neg(tab.vector([i - n for i in range(n)]))
    cvec = solve_engine(fac, r)
    ctvec = solve_engine(fac, rt, transpose=True)
    c = engine.column(cvec) + [one]
    ct = engine.column(ctvec) + [one]
    # h_n = m_0 + sum_{j<n} c_j m_{j-n}: one (1 x n) by (n x 1) product
    row = engine.gather(tab.store, np.arange(n)[None, :] - n - tab.kmin, 0)
    h = engine.entry(engine.matmul(row, cvec), 0, 0) + tab.m(0)
    snap = OPSnapshot(n, tab.nu, tab.t, c, ct, c[0], h, one, 1, c[n - 1], ct[n - 1],
                      tab.digits, _state=(tab, fac, cvec, ctvec))
    return _with_h(snap)


def _with_h(snap: OPSnapshot) -> OPSnapshot:
    if snap.h.hi == 0.0:
        raise ExtPrecDomainError("h_n vanished")
    sgn = 1 if snap.h.hi > 0.0 else -1
    gamma = 1 / sqrt(abs(snap.h))
    return dataclasses.replace(snap, gamma=gamma, h_sign=sgn)


def op_derivatives(snapshot: OPSnapshot, tab: Optional[MomentTable] = None) -> OPSnapshot:
    """Copy of ``snapshot`` with first and second t-derivatives filled in."""
    state_tab, fac, cvec, ctvec = snapshot._state
    tab = tab or state_tab
    n = snapshot.n
    zero = ExtReal(0.0)
    if n == 0:
        z = [zero]
        return dataclasses.replace(snapshot, pi0_t=zero, pi0_tt=zero, c_t=z, c_tt=z, ct_t=z, ct_tt=z)
    engine = fac.engine
    ks = [n - i for i in range(n)]
    r1, r2 = engine.neg(tab.vector(ks, 1)), engine.neg(tab.vector(ks, 2))
    rt1 = engine.neg(tab.vector([-k for k in ks], 1))
    rt2 = engine.neg(tab.vector([-k for k in ks], 2))

    def propagate(x, first, second, transpose):
        m1 = tab.matrix(n, 1, transpose=transpose)
        m2 = tab.matrix(n, 2, transpose=transpose)
        m1x = engine.matmul(m1, x)
        x1 = solve_engine(fac, engine.sub(first, m1x), transpose)
        rhs = engine.sub(engine.sub(second, engine.scale(engine.matmul(m1, x1), 2.0)), engine.matmul(m2, x))
        x2 = solve_engine(fac, rhs, transpose)
        return engine.column(x1) + [zero], engine.column(x2) + [zero]

    c_t, c_tt = propagate(cvec, r1, r2, False)
    ct_t, ct_tt = propagate(ctvec, rt1, rt2, True)
    return dataclasses.replace(snapshot, pi0_t=c_t[0], pi0_tt=c_tt[0], a_sub_t=c_t[n - 1],
                               at_sub_t=ct_t[n - 1], c_t=c_t, c_tt=c_tt, ct_t=ct_t, ct_tt=ct_tt)


def dlogD_via_identity(nu, t, n: int, tab: Optional[MomentTable] = None,
                       snapshot: Optional[OPSnapshot] = None) -> ExtReal:
    """d/dt log D_{n,nu}(t) = -(a_{n,n-1} + a~_{n,n-1})/2."""
    if n == 0:
        return ExtReal(0.0)
    if snapshot is None:
        snapshot = op_snapshot(nu, t, n, tab)
    return -(snapshot.a_sub + snapshot.at_sub) * 0.5


def pi0_bordered(tab: MomentTable, n: int, z=0.0,
                 fac: Optional[ToeplitzFactorization] = None) -> ExtReal:
    """pi_n(z) as det(B(z)) / D_n with the bordered (n+1) x (n+1) matrix

        B = [ m_{j-i} ]_{i<n, j<=n}  over the row (1, z, ..., z^n).
    """
    if n == 0:
        return ExtReal(1.0)
    if fac is None:
        fac = factorize(tab, n)
    engine = fac.engine
    z = as_ext(z)
    powers = [ExtReal(1.0)]
    for _ in range(n):
        powers.append(powers[-1] * z)
    top = tab.matrix(n, 0, cols=n + 1)
    bordered = engine.vstack(top, engine.from_ext(powers, (1, n + 1)))
    _, _, logdet_b, sign_b, _, _, singular_at = factor_matrix(engine, bordered)
    if singular_at >= 0:
        return ExtReal(0.0)
    from .extprec import exp
    return (sign_b * fac.sign) * exp(logdet_b - fac.logdet_abs)


def eval_poly(coeffs, z) -> ExtReal:
    """sum_j coeffs[j] z^j by Horner's rule."""
    z = as_ext(z)
    acc = ExtReal(0.0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def eval_reversed(coeffs, z) -> ExtReal:
    """z^n p(1/z) = sum_j coeffs[j] z^{n-j} for a degree-n coefficient list."""
    return eval_poly(list(reversed(coeffs)), z)


def recurrence_residual(nu, t, n: int, z, tab: Optional[MomentTable] = None) -> ExtReal:
    """pi_{n+1}(z) - z pi_n(z) - pi_{n+1}(0) pi~*_n(z)."""
    tab = tab if tab is not None else build_moment_table(nu, t, n + 1)
    s_n = op_snapshot(nu, t, n, tab)
    s_n1 = op_snapshot(nu, t, n + 1, tab)
    z = as_ext(z)
    return eval_poly(s_n1.c, z) - z * eval_poly(s_n.c, z) - s_n1.pi0 * eval_reversed(s_n.ct, z)
