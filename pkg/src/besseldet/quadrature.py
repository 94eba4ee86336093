"""Quadrature rules in double-double precision.

``k_integral`` evaluates K_a(t) = 1/2 * int_R exp(a u - t cosh u) du with the
trapezoidal rule. The integrand already decays double-exponentially in
``u``, so the plain trapezoid sum is the double-exponential rule for this
integral and converges geometrically as the step is halved.

``gauss_legendre_dd`` and ``adaptive_gl`` provide dd-accurate panels for the
independent oracle in :mod:`besseldet.bessel`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from . import _dd
from ._backend import USE_NUMBA, jit, py
from ._ddarray import dd_sum_sequential
from .extprec import ExtReal

# integrand below exp(-92.1) ~ 1e-40 of its peak is dropped
LOG_DROP = 92.1
K_TOL = 1e-30
K_H0 = 0.5
K_MAX_LEVEL = 12


class QuadratureError(ArithmeticError):
    pass


@jit
def _k_window(b, t):
    """Peak location and truncation window of u -> b*u - t*cosh(u), b >= 0."""
    # centre snapped to a dyadic grid finer than the last level, so that
    # every node us + j*h is an exact float
    us = math.floor(math.asinh(b / t) * 65536.0 + 0.5) / 65536.0
    top = b * us - t * math.cosh(us)
    ur = us
    while b * ur - t * math.cosh(ur) > top - LOG_DROP:
        ur += 0.25
    ul = us
    while b * ul - t * math.cosh(ul) > top - LOG_DROP:
        ul -= 0.25
    return us, ul, ur


@jit
def _k_node(bh, bl, th, tl, u):
    ph, pl = _dd.dd_mul_d(bh, bl, u)
    ch, cl = _dd.dd_cosh(u, 0.0)
    qh, ql = _dd.dd_mul(th, tl, ch, cl)
    eh, el = _dd.dd_sub(ph, pl, qh, ql)
    return _dd.dd_exp(eh, el)


@jit
def k_integral_loops(bh, bl, th, tl):
    """(K_hi, K_lo, levels, converged) for order |b| (b >= 0) and t > 0."""
    us, ul, ur = _k_window(bh, th)
    jl = int(math.ceil((us - ul) / K_H0))
    jr = int(math.ceil((ur - us) / K_H0))
    h = K_H0
    sh, sl = 0.0, 0.0
    for j in range(-jl, jr + 1):
        gh, gl = _k_node(bh, bl, th, tl, us + j * h)
        sh, sl = _dd.dd_add(sh, sl, gh, gl)
    sh, sl = sh * h, sl * h
    for level in range(1, K_MAX_LEVEL + 1):
        h = 0.5 * h
        scale = 1 << level
        nh, nl = 0.0, 0.0
        for j in range(-jl * scale + 1, jr * scale, 2):
            gh, gl = _k_node(bh, bl, th, tl, us + j * h)
            nh, nl = _dd.dd_add(nh, nl, gh, gl)
        newh, newl = _dd.dd_add(0.5 * sh, 0.5 * sl, nh * h, nl * h)
        dh, dl = _dd.dd_sub(newh, newl, sh, sl)
        sh, sl = newh, newl
        if level >= 2 and abs(dh) <= K_TOL * abs(sh):
            return 0.5 * sh, 0.5 * sl, level, True
    return 0.5 * sh, 0.5 * sl, K_MAX_LEVEL, False


def _exp_vec(ah, al):
    """Vectorized twin of ``_dd.dd_exp`` (same operations, numpy rounding)."""
    k = np.floor(ah / _dd.LN2_HI + 0.5)
    ph, pl = py(_dd.two_prod)(k, _dd.LN2_HI)
    rh, rl = py(_dd.dd_sub)(ah, al, ph, pl)
    ph, pl = py(_dd.two_prod)(k, _dd.LN2_LO)
    rh, rl = py(_dd.dd_sub)(rh, rl, ph, pl)
    rh, rl = py(_dd.dd_add_d)(rh, rl, -k * _dd.LN2_3)
    sh, sl = py(_dd._expm1_reduced)(rh, rl)
    hh, hl = py(_dd.dd_add_d)(sh, sl, 1.0)
    ki = k.astype(np.int64)
    return np.ldexp(hh, ki), np.ldexp(hl, ki)


def _k_nodes_vec(bh, bl, th, tl, u):
    ph, pl = py(_dd.dd_mul_d)(bh, bl, u)
    eh, el = _exp_vec(u, np.zeros_like(u))
    ih, il = py(_dd.dd_div)(1.0, 0.0, eh, el)
    ch, cl = py(_dd.dd_add)(eh, el, ih, il)
    ch, cl = 0.5 * ch, 0.5 * cl
    qh, ql = py(_dd.dd_mul)(th, tl, ch, cl)
    eh, el = py(_dd.dd_sub)(ph, pl, qh, ql)
    return _exp_vec(eh, el)


def k_integral_vec(bh, bl, th, tl):
    us, ul, ur = py(_k_window)(bh, th)
    jl = int(math.ceil((us - ul) / K_H0))
    jr = int(math.ceil((ur - us) / K_H0))
    h = K_H0
    gh, gl = _k_nodes_vec(bh, bl, th, tl, us + np.arange(-jl, jr + 1) * h)
    sh, sl = dd_sum_sequential(gh, gl)
    sh, sl = sh * h, sl * h
    for level in range(1, K_MAX_LEVEL + 1):
        h = 0.5 * h
        scale = 1 << level
        gh, gl = _k_nodes_vec(bh, bl, th, tl, us + np.arange(-jl * scale + 1, jr * scale, 2) * h)
        nh, nl = dd_sum_sequential(gh, gl)
        newh, newl = _dd.dd_add(0.5 * sh, 0.5 * sl, nh * h, nl * h)
        dh, _ = _dd.dd_sub(newh, newl, sh, sl)
        sh, sl = newh, newl
        if level >= 2 and abs(dh) <= K_TOL * abs(sh):
            return 0.5 * sh, 0.5 * sl, level, True
    return 0.5 * sh, 0.5 * sl, K_MAX_LEVEL, False


k_integral_kernel = k_integral_loops if USE_NUMBA else k_integral_vec


def k_integral(a: ExtReal, t: ExtReal) -> ExtReal:
    """K_a(t) by the doubly-exponentially convergent trapezoid rule."""
    if a.hi < 0.0:
        a = -a
    kh, kl, level, ok = k_integral_kernel(a.hi, a.lo, t.hi, t.lo)
    if not ok:
        raise QuadratureError(f"K_{a.hi}({t.hi}) quadrature did not converge after {level} halvings")
    if not (math.isfinite(kh) and math.isfinite(kl)):
        raise QuadratureError(f"K_{a.hi}({t.hi}) overflows the float64 range")
    return ExtReal._raw(kh, kl)


# --- Gauss-Legendre panels ----------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre_dd(order: int = 20):
    """Nodes and weights on [-1, 1] refined to dd accuracy by Newton's method.

    Returns four float arrays (node_hi, node_lo, weight_hi, weight_lo).
    """
    x0, _ = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for guess in x0:
        x = ExtReal(float(guess))
        for _ in range(4):
            p, dp = _legendre_with_derivative(order, x)
            x = x - p / dp
        _, dp = _legendre_with_derivative(order, x)
        nodes.append(x)
        weights.append(ExtReal(2.0) / ((1 - x * x) * dp * dp))
    return (np.array([v.hi for v in nodes]), np.array([v.lo for v in nodes]),
            np.array([w.hi for w in weights]), np.array([w.lo for w in weights]))


def _legendre_with_derivative(n, x):
    p0, p1 = ExtReal(1.0), x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1)
    return p1, dp


@jit
def gl_panel(kind, mh, ml, th, tl, ah, al, bh, bl, xh, xl, wh, wl):
    """One Gauss-Legendre panel over [a, b] of an oracle integrand.

    kind 0: exp(t cos s) cos(mu s);   kind 1: exp(-t cosh s - mu s).
    Also returns the panel integral of |integrand|.
    """
    ch, cl = _dd.dd_add(ah, al, bh, bl)
    ch, cl = 0.5 * ch, 0.5 * cl
    rh, rl = _dd.dd_sub(bh, bl, ah, al)
    rh, rl = 0.5 * rh, 0.5 * rl
    sh, sl = 0.0, 0.0
    abs_h, abs_l = 0.0, 0.0
    for i in range(xh.shape[0]):
        uh, ul = _dd.dd_mul(rh, rl, xh[i], xl[i])
        uh, ul = _dd.dd_add(ch, cl, uh, ul)
        if kind == 0:
            _, _, csh, csl = _dd.dd_sincos(uh, ul)
            eh, el = _dd.dd_mul(th, tl, csh, csl)
            eh, el = _dd.dd_exp(eh, el)
            ph, pl = _dd.dd_mul(mh, ml, uh, ul)
            _, _, cmh, cml = _dd.dd_sincos(ph, pl)
            fh, fl = _dd.dd_mul(eh, el, cmh, cml)
        else:
            ch2, cl2 = _dd.dd_cosh(uh, ul)
            eh, el = _dd.dd_mul(th, tl, ch2, cl2)
            ph, pl = _dd.dd_mul(mh, ml, uh, ul)
            eh, el = _dd.dd_add(eh, el, ph, pl)
            fh, fl = _dd.dd_exp(-eh, -el)
        fh, fl = _dd.dd_mul(fh, fl, wh[i], wl[i])
        sh, sl = _dd.dd_add(sh, sl, fh, fl)
        if fh < 0.0:
            abs_h, abs_l = _dd.dd_sub(abs_h, abs_l, fh, fl)
        else:
            abs_h, abs_l = _dd.dd_add(abs_h, abs_l, fh, fl)
    sh, sl = _dd.dd_mul(sh, sl, rh, rl)
    abs_h, abs_l = _dd.dd_mul(abs_h, abs_l, rh, rl)
    return sh, sl, abs_h, abs_l


def adaptive_gl(kind: int, mu: ExtReal, t: ExtReal, a: ExtReal, b: ExtReal,
                rel_tol: float = 1e-31, max_depth: int = 40, initial_panels: int = 8):
    """Adaptive bisection with 20-point panels.

    Returns (integral, integral_of_abs, error_estimate). Acceptance compares a
    panel against its two halves, with the tolerance taken relative to the
    running integral of |f| so that cancelling integrands terminate.
    """
    xh, xl, wh, wl = gauss_legendre_dd(20)

    def panel(lo, hi):
        r = gl_panel(kind, mu.hi, mu.lo, t.hi, t.lo, lo.hi, lo.lo, hi.hi, hi.lo, xh, xl, wh, wl)
        return ExtReal._raw(r[0], r[1]), ExtReal._raw(r[2], r[3])

    width = (b - a) / initial_panels
    edges = [a + width * i for i in range(initial_panels)] + [b]
    coarse = [panel(edges[i], edges[i + 1]) for i in range(initial_panels)]
    scale = sum((p[1] for p in coarse), ExtReal(0.0))
    tol = rel_tol * max(scale.hi, 1e-300)
    total, total_abs, err = ExtReal(0.0), ExtReal(0.0), 0.0
    stack = [(edges[i], edges[i + 1], coarse[i][0], coarse[i][1], 0) for i in range(initial_panels)][::-1]
    while stack:
        lo, hi, whole, whole_abs, depth = stack.pop()
        mid = (lo + hi) * 0.5
        left, left_abs = panel(lo, mid)
        right, right_abs = panel(mid, hi)
        diff = abs((left + right - whole).hi)
        # a panel cannot get below the dd rounding noise of its own |f| integral
        floor = 64 * 2.0 ** -104 * whole_abs.hi
        if diff <= max(tol * (hi - lo).hi / (b - a).hi, floor) or depth >= max_depth:
            total = total + left + right
            total_abs = total_abs + left_abs + right_abs
            err += diff
        else:
            stack.append((mid, hi, right, right_abs, depth + 1))
            stack.append((lo, mid, left, left_abs, depth + 1))
    return total, total_abs, err
