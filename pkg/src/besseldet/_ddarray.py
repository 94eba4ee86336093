"""Dense double-double linear algebra on ``(hi, lo)`` float64 array pairs.

Each kernel exists twice: an explicit-loop version compiled by numba
(``*_loops``) and a vectorized numpy version (``*_vec``). Both apply the
same dd operations to each element in the same order, so they agree bit
for bit. The public names bind to one of them according to
``_backend.USE_NUMBA``.
"""

import numpy as np

from . import _dd
from ._backend import USE_NUMBA, jit, py

_div = py(_dd.dd_div)
_mulsub = py(_dd.dd_mulsub)
_muladd = py(_dd.dd_muladd)


# --- LU with partial pivoting -------------------------------------------------

@jit
def lu_factor_loops(ah, al):
    """Returns (LUh, LUl, perm, sign, growth, singular_at); singular_at = -1 if regular."""
    n = ah.shape[0]
    h = ah.copy()
    l = al.copy()
    perm = np.arange(n)
    sign = 1
    amax = 0.0
    for i in range(n):
        for j in range(n):
            amax = max(amax, abs(h[i, j]))
    gmax = amax
    for k in range(n):
        p = k
        best = abs(h[k, k])
        for i in range(k + 1, n):
            if abs(h[i, k]) > best:
                best = abs(h[i, k])
                p = i
        if best == 0.0:
            return h, l, perm, sign, gmax / amax if amax > 0.0 else 0.0, k
        if p != k:
            for j in range(n):
                h[k, j], h[p, j] = h[p, j], h[k, j]
                l[k, j], l[p, j] = l[p, j], l[k, j]
            perm[k], perm[p] = perm[p], perm[k]
            sign = -sign
        for i in range(k + 1, n):
            mh, ml = _dd.dd_div(h[i, k], l[i, k], h[k, k], l[k, k])
            h[i, k] = mh
            l[i, k] = ml
            for j in range(k + 1, n):
                h[i, j], l[i, j] = _dd.dd_mulsub(h[i, j], l[i, j], mh, ml, h[k, j], l[k, j])
                gmax = max(gmax, abs(h[i, j]))
    return h, l, perm, sign, gmax / amax, -1


def lu_factor_vec(ah, al):
    n = ah.shape[0]
    h = ah.copy()
    l = al.copy()
    perm = np.arange(n)
    sign = 1
    amax = float(np.max(np.abs(h))) if n else 0.0
    gmax = amax
    for k in range(n):
        col = np.abs(h[k:, k])
        p = k + int(np.argmax(col))
        if col[p - k] == 0.0:
            return h, l, perm, sign, gmax / amax if amax > 0.0 else 0.0, k
        if p != k:
            h[[k, p]] = h[[p, k]]
            l[[k, p]] = l[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        if k + 1 < n:
            mh, ml = _div(h[k + 1:, k], l[k + 1:, k], h[k, k], l[k, k])
            h[k + 1:, k] = mh
            l[k + 1:, k] = ml
            sh, sl = _mulsub(h[k + 1:, k + 1:], l[k + 1:, k + 1:],
                             mh[:, None], ml[:, None], h[k, k + 1:][None, :], l[k, k + 1:][None, :])
            h[k + 1:, k + 1:] = sh
            l[k + 1:, k + 1:] = sl
            if sh.size:
                gmax = max(gmax, float(np.max(np.abs(sh))))
    return h, l, perm, sign, gmax / amax, -1


# --- triangular solves with a factored matrix ------------------------------------

@jit
def lu_solve_loops(luh, lul, perm, bh, bl):
    """X with M X = B, where P M = L U is stored in (luh, lul)."""
    n, m = bh.shape
    xh = np.empty((n, m))
    xl = np.empty((n, m))
    for i in range(n):
        for c in range(m):
            xh[i, c] = bh[perm[i], c]
            xl[i, c] = bl[perm[i], c]
    for j in range(n):
        for i in range(j + 1, n):
            for c in range(m):
                xh[i, c], xl[i, c] = _dd.dd_mulsub(xh[i, c], xl[i, c], luh[i, j], lul[i, j], xh[j, c], xl[j, c])
    for j in range(n - 1, -1, -1):
        for c in range(m):
            xh[j, c], xl[j, c] = _dd.dd_div(xh[j, c], xl[j, c], luh[j, j], lul[j, j])
        for i in range(j):
            for c in range(m):
                xh[i, c], xl[i, c] = _dd.dd_mulsub(xh[i, c], xl[i, c], luh[i, j], lul[i, j], xh[j, c], xl[j, c])
    return xh, xl


def lu_solve_vec(luh, lul, perm, bh, bl):
    n = bh.shape[0]
    xh = bh[perm].copy()
    xl = bl[perm].copy()
    for j in range(n):
        if j + 1 < n:
            xh[j + 1:], xl[j + 1:] = _mulsub(xh[j + 1:], xl[j + 1:], luh[j + 1:, j][:, None], lul[j + 1:, j][:, None],
                                             xh[j][None, :], xl[j][None, :])
    for j in range(n - 1, -1, -1):
        xh[j], xl[j] = _div(xh[j], xl[j], luh[j, j], lul[j, j])
        if j:
            xh[:j], xl[:j] = _mulsub(xh[:j], xl[:j], luh[:j, j][:, None], lul[:j, j][:, None],
                                     xh[j][None, :], xl[j][None, :])
    return xh, xl


@jit
def lu_solve_t_loops(luh, lul, perm, bh, bl):
    """X with M^T X = B for the same factorization (M^T = U^T L^T P)."""
    n, m = bh.shape
    yh = bh.copy()
    yl = bl.copy()
    for j in range(n):
        for c in range(m):
            yh[j, c], yl[j, c] = _dd.dd_div(yh[j, c], yl[j, c], luh[j, j], lul[j, j])
        for i in range(j + 1, n):
            for c in range(m):
                yh[i, c], yl[i, c] = _dd.dd_mulsub(yh[i, c], yl[i, c], luh[j, i], lul[j, i], yh[j, c], yl[j, c])
    for j in range(n - 1, -1, -1):
        for i in range(j):
            for c in range(m):
                yh[i, c], yl[i, c] = _dd.dd_mulsub(yh[i, c], yl[i, c], luh[j, i], lul[j, i], yh[j, c], yl[j, c])
    xh = np.empty((n, m))
    xl = np.empty((n, m))
    for i in range(n):
        for c in range(m):
            xh[perm[i], c] = yh[i, c]
            xl[perm[i], c] = yl[i, c]
    return xh, xl


def lu_solve_t_vec(luh, lul, perm, bh, bl):
    n = bh.shape[0]
    yh = bh.copy()
    yl = bl.copy()
    for j in range(n):
        yh[j], yl[j] = _div(yh[j], yl[j], luh[j, j], lul[j, j])
        if j + 1 < n:
            yh[j + 1:], yl[j + 1:] = _mulsub(yh[j + 1:], yl[j + 1:], luh[j, j + 1:][:, None], lul[j, j + 1:][:, None],
                                             yh[j][None, :], yl[j][None, :])
    for j in range(n - 1, -1, -1):
        if j:
            yh[:j], yl[:j] = _mulsub(yh[:j], yl[:j], luh[j, :j][:, None], lul[j, :j][:, None],
                                     yh[j][None, :], yl[j][None, :])
    xh = np.empty_like(yh)
    xl = np.empty_like(yl)
    xh[perm] = yh
    xl[perm] = yl
    return xh, xl


# --- products -----------------------------------------------------------------

@jit
def matmul_loops(ah, al, bh, bl):
    n, r = ah.shape
    m = bh.shape[1]
    ch = np.zeros((n, m))
    cl = np.zeros((n, m))
    for k in range(r):
        for i in range(n):
            for j in range(m):
                ch[i, j], cl[i, j] = _dd.dd_muladd(ch[i, j], cl[i, j], ah[i, k], al[i, k], bh[k, j], bl[k, j])
    return ch, cl


def matmul_vec(ah, al, bh, bl):
    n, r = ah.shape
    m = bh.shape[1]
    ch = np.zeros((n, m))
    cl = np.zeros((n, m))
    for k in range(r):
        ch, cl = _muladd(ch, cl, ah[:, k][:, None], al[:, k][:, None], bh[k][None, :], bl[k][None, :])
    return ch, cl


@jit
def trace_product_loops(ah, al, bh, bl):
    """tr(A B) without forming the product."""
    n = ah.shape[0]
    sh, sl = 0.0, 0.0
    for i in range(n):
        for k in range(n):
            sh, sl = _dd.dd_muladd(sh, sl, ah[i, k], al[i, k], bh[k, i], bl[k, i])
    return sh, sl


def trace_product_vec(ah, al, bh, bl):
    # elementwise products are independent; the accumulation is sequential
    ph, pl = py(_dd.dd_mul)(ah, al, bh.T, bl.T)
    return dd_sum_sequential(ph.ravel(), pl.ravel())


@jit
def dd_sum_loops(xh, xl):
    sh, sl = 0.0, 0.0
    for i in range(xh.shape[0]):
        sh, sl = _dd.dd_add(sh, sl, xh[i], xl[i])
    return sh, sl


def dd_sum_sequential(xh, xl):
    add = _dd.dd_add
    sh, sl = 0.0, 0.0
    for a, b in zip(xh.tolist(), xl.tolist()):
        sh, sl = add(sh, sl, a, b)
    return sh, sl


if USE_NUMBA:
    lu_factor = lu_factor_loops
    lu_solve = lu_solve_loops
    lu_solve_t = lu_solve_t_loops
    matmul = matmul_loops
    trace_product = trace_product_loops
    dd_sum = dd_sum_loops
else:
    lu_factor = lu_factor_vec
    lu_solve = lu_solve_vec
    lu_solve_t = lu_solve_t_vec
    matmul = matmul_vec
    trace_product = trace_product_vec
    dd_sum = dd_sum_sequential
