"""Linear-algebra engines for the determinant layer.

Two interchangeable back ends operate on moment matrices:

* :class:`DDEngine` works on double-double ``(hi, lo)`` array pairs with the
  kernels of ``_ddarray`` (numba-compiled or numpy).
* :class:`MPEngine` works on nested lists of ``mpf`` in a private mpmath
  context at a fixed number of digits. It is used when the matrix is too
  ill-conditioned for 32 digits; see :func:`besseldet.toeplitz.auto_digits`.

Matrices are opaque to callers: everything that leaves an engine is an
:class:`ExtReal` or a list of them.
"""

from __future__ import annotations

import threading

import mpmath
import numpy as np

from . import _dd
from ._backend import py
from ._ddarray import lu_factor, lu_solve, lu_solve_t, matmul, trace_product
from .extprec import ExtReal

DD_DIGITS = 32

_add = py(_dd.dd_add)
_sub = py(_dd.dd_sub)
_mul_d = py(_dd.dd_mul_d)


class DDEngine:
    digits = DD_DIGITS

    # -- construction -------------------------------------------------------
    @staticmethod
    def from_table(hi, lo, values=None):
        return hi, lo

    @staticmethod
    def gather(store, idx, d):
        hi, lo = store
        return hi[idx, d].copy(), lo[idx, d].copy()

    @staticmethod
    def from_ext(values, shape):
        h = np.array([v.hi for v in values], dtype=float).reshape(shape)
        l = np.array([v.lo for v in values], dtype=float).reshape(shape)
        return h, l

    @staticmethod
    def shape(a):
        return a[0].shape

    # -- factorization -------------------------------------------------------
    @staticmethod
    def factor(a):
        """(data, perm, sign, growth, pivots, singular_at)."""
        h, l, perm, sign, growth, singular_at = lu_factor(a[0], a[1])
        n = h.shape[0]
        pivots = [ExtReal._raw(float(h[i, i]), float(l[i, i])) for i in range(n)]
        for arr in (h, l, perm):
            arr.setflags(write=False)
        return (h, l, a[0], a[1]), perm, int(sign), float(growth), pivots, int(singular_at)

    @staticmethod
    def solve(data, perm, b, transpose=False, refine=True):
        luh, lul, ah, al = data
        kernel = lu_solve_t if transpose else lu_solve
        bh, bl = np.ascontiguousarray(b[0]), np.ascontiguousarray(b[1])
        xh, xl = kernel(luh, lul, perm, bh, bl)
        if refine:
            if transpose:
                ah, al = np.ascontiguousarray(ah.T), np.ascontiguousarray(al.T)
            mh, ml = matmul(ah, al, xh, xl)
            rh, rl = _sub(bh, bl, mh, ml)
            dh, dl = kernel(luh, lul, perm, rh, rl)
            xh, xl = _add(xh, xl, dh, dl)
        return xh, xl

    # -- arithmetic ----------------------------------------------------------
    @staticmethod
    def matmul(a, b):
        return matmul(a[0], a[1], b[0], b[1])

    @staticmethod
    def add(a, b):
        return _add(a[0], a[1], b[0], b[1])

    @staticmethod
    def sub(a, b):
        return _sub(a[0], a[1], b[0], b[1])

    @staticmethod
    def scale(a, s: float):
        return _mul_d(a[0], a[1], s)

    @staticmethod
    def neg(a):
        return -a[0], -a[1]

    @staticmethod
    def trace(a):
        sh, sl = 0.0, 0.0
        for i in range(a[0].shape[0]):
            sh, sl = _dd.dd_add(sh, sl, float(a[0][i, i]), float(a[1][i, i]))
        return ExtReal._raw(sh, sl)

    @staticmethod
    def trace_product(a, b):
        return ExtReal._raw(*trace_product(a[0], a[1], b[0], b[1]))

    @staticmethod
    def column(a, j=0) -> list:
        return [ExtReal._raw(float(h), float(l)) for h, l in zip(a[0][:, j], a[1][:, j])]

    @staticmethod
    def entry(a, i, j) -> ExtReal:
        return ExtReal._raw(float(a[0][i, j]), float(a[1][i, j]))

    @staticmethod
    def rows(a, start, stop):
        return a[0][start:stop].copy(), a[1][start:stop].copy()

    @staticmethod
    def vstack(a, b):
        return np.vstack([a[0], b[0]]), np.vstack([a[1], b[1]])


# --- multiprecision ----------------------------------------------------------

_local = threading.local()


def mp_context(digits: int):
    """A private mpmath context per (thread, digits); never the global ``mp``."""
    cache = getattr(_local, "contexts", None)
    if cache is None:
        cache = _local.contexts = {}
    ctx = cache.get(digits)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = digits
        cache[digits] = ctx
    return ctx


def mpf_to_ext(x) -> ExtReal:
    hi = float(x)
    return ExtReal._raw(hi, float(x - hi))


class MPEngine:
    """Dense linear algebra on lists of rows of mpf."""

    def __init__(self, digits: int):
        self.digits = int(digits)

    @property
    def ctx(self):
        return mp_context(self.digits)

    def ext_to_mpf(self, x: ExtReal):
        ctx = self.ctx
        return ctx.mpf(x.hi) + ctx.mpf(x.lo)

    # -- construction -------------------------------------------------------
    def from_table(self, hi, lo, values):
        return values

    def gather(self, store, idx, d):
        return [[store[k][d] for k in row] for row in np.asarray(idx).tolist()]

    def from_ext(self, values, shape):
        flat = [self.ext_to_mpf(v) for v in values]
        rows, cols = shape
        return [flat[i * cols:(i + 1) * cols] for i in range(rows)]

    @staticmethod
    def shape(a):
        return (len(a), len(a[0]) if a else 0)

    # -- factorization -------------------------------------------------------
    def factor(self, a):
        n = len(a)
        lu = [row[:] for row in a]
        perm = list(range(n))
        sign = 1
        amax = max((abs(x) for row in a for x in row), default=0)
        gmax = amax
        for k in range(n):
            p = max(range(k, n), key=lambda i: abs(lu[i][k]))
            if lu[p][k] == 0:
                growth = float(gmax / amax) if amax else 0.0
                return (lu, a), np.array(perm), sign, growth, None, k
            if p != k:
                lu[k], lu[p] = lu[p], lu[k]
                perm[k], perm[p] = perm[p], perm[k]
                sign = -sign
            rowk = lu[k]
            piv = rowk[k]
            for i in range(k + 1, n):
                rowi = lu[i]
                m = rowi[k] / piv
                rowi[k] = m
                for j in range(k + 1, n):
                    rowi[j] -= m * rowk[j]
                gmax = max(gmax, max((abs(x) for x in rowi[k + 1:]), default=0))
        pivots = [mpf_to_ext(lu[i][i]) for i in range(n)]
        return (lu, a), np.array(perm), sign, float(gmax / amax), pivots, -1

    def solve(self, data, perm, b, transpose=False, refine=False):
        # working precision already carries the guard digits; no refinement
        lu, _ = data
        n = len(lu)
        m = len(b[0]) if n else 0
        perm = [int(p) for p in perm]
        if not transpose:
            x = [b[perm[i]][:] for i in range(n)]
            for j in range(n):
                xj = x[j]
                for i in range(j + 1, n):
                    lij = lu[i][j]
                    xi = x[i]
                    for c in range(m):
                        xi[c] -= lij * xj[c]
            for j in range(n - 1, -1, -1):
                xj = x[j]
                piv = lu[j][j]
                for c in range(m):
                    xj[c] /= piv
                for i in range(j):
                    uij = lu[i][j]
                    xi = x[i]
                    for c in range(m):
                        xi[c] -= uij * xj[c]
            return x
        # M^T = U^T L^T P
        y = [row[:] for row in b]
        for j in range(n):
            yj = y[j]
            piv = lu[j][j]
            for c in range(m):
                yj[c] /= piv
            for i in range(j + 1, n):
                uji = lu[j][i]
                yi = y[i]
                for c in range(m):
                    yi[c] -= uji * yj[c]
        for j in range(n - 1, -1, -1):
            yj = y[j]
            for i in range(j):
                lji = lu[j][i]
                yi = y[i]
                for c in range(m):
                    yi[c] -= lji * yj[c]
        x = [None] * n
        for i in range(n):
            x[perm[i]] = y[i]
        return x

    # -- arithmetic ----------------------------------------------------------
    def matmul(self, a, b):
        ctx = self.ctx
        bt = list(zip(*b))
        return [[ctx.fdot(row, col) for col in bt] for row in a]

    @staticmethod
    def add(a, b):
        return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]

    @staticmethod
    def sub(a, b):
        return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]

    @staticmethod
    def scale(a, s: float):
        return [[x * s for x in row] for row in a]

    @staticmethod
    def neg(a):
        return [[-x for x in row] for row in a]

    def trace(self, a):
        return mpf_to_ext(self.ctx.fsum(a[i][i] for i in range(len(a))))

    def trace_product(self, a, b):
        ctx = self.ctx
        n = len(a)
        return mpf_to_ext(ctx.fsum(ctx.fdot(a[i], [b[k][i] for k in range(n)]) for i in range(n)))

    @staticmethod
    def column(a, j=0) -> list:
        return [mpf_to_ext(row[j]) for row in a]

    @staticmethod
    def entry(a, i, j) -> ExtReal:
        return mpf_to_ext(a[i][j])

    @staticmethod
    def rows(a, start, stop):
        return [row[:] for row in a[start:stop]]

    @staticmethod
    def vstack(a, b):
        return [row[:] for row in a] + [row[:] for row in b]


def engine_for(digits: int):
    return DDEngine() if digits <= DD_DIGITS else MPEngine(digits)
