"""Scalar double-double kernels.

Every value is an unevaluated pair ``(hi, lo)`` of float64 with
``|lo| <= ulp(hi)/2``. Functions take and return bare floats/tuples so that
numba can compile them and other kernels can inline them.

The arithmetic primitives (``two_sum`` through ``dd_div``) use only ``+ - * /``
and therefore also work elementwise on numpy arrays when called through
``_backend.py``; the vectorized fallbacks in ``_ddarray`` rely on that.
Elementary functions are scalar only.
"""

import math
from fractions import Fraction

import numpy as np

from ._backend import jit

SPLITTER = 134217729.0  # 2**27 + 1

LN2_HI, LN2_LO, LN2_3 = 0.6931471805599453, 2.3190468138462996e-17, 5.707708438416212e-34
PI_HI, PI_LO = 3.141592653589793, 1.2246467991473532e-16
PIO2_1, PIO2_2, PIO2_3 = 1.5707963267948966, 6.123233995736766e-17, -1.4973849048591698e-33
HALF_LN_2PI_HI, HALF_LN_2PI_LO = 0.9189385332046728, -3.8782941580672414e-17

EXP_HALVINGS = 10
EXP_SCALE = 1.0 / (1 << EXP_HALVINGS)

# Shift target and term count for the Stirling series; the first omitted
# term is bounded below (see LGAMMA_TRUNCATION_BOUND).
LGAMMA_SHIFT = 20.0
LGAMMA_TERMS = 17


def _dd_of(frac):
    hi = float(frac)
    return hi, float(frac - Fraction(hi))


def _table(fracs):
    pairs = [_dd_of(f) for f in fracs]
    return (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))


def _bernoulli_even(count):
    """B_0, B_2, ..., B_{2(count-1)} as exact fractions."""
    b = [Fraction(1)]
    for m in range(1, 2 * count):
        b.append(-sum(Fraction(math.comb(m + 1, k)) * b[k] for k in range(m)) / (m + 1))
    return [b[2 * k] for k in range(count)]


_fact = [Fraction(1, math.factorial(j)) for j in range(40)]
# expm1 Taylor: coefficients of r^j, j = 1..10
EXPM1_HI, EXPM1_LO = _table(_fact[1:11])
# sin(r)/r and cos(r) in powers of r^2
SIN_HI, SIN_LO = _table([(-1) ** j * _fact[2 * j + 1] for j in range(17)])
COS_HI, COS_LO = _table([(-1) ** j * _fact[2 * j] for j in range(17)])

_bern = _bernoulli_even(LGAMMA_TERMS + 2)
_stirling = [_bern[k] / (2 * k * (2 * k - 1)) for k in range(1, LGAMMA_TERMS + 2)]
STIRLING_HI, STIRLING_LO = _table(_stirling[:LGAMMA_TERMS])
LGAMMA_TRUNCATION_BOUND = float(abs(_stirling[LGAMMA_TERMS]) / Fraction(LGAMMA_SHIFT) ** (2 * LGAMMA_TERMS + 1))
del _fact, _bern, _stirling


# --- error-free transformations -------------------------------------------

@jit
def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@jit
def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@jit
def split(a):
    t = SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


@jit
def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


# --- arithmetic -------------------------------------------------------------

@jit
def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


@jit
def dd_sub(ah, al, bh, bl):
    return dd_add(ah, al, -bh, -bl)


@jit
def dd_add_d(ah, al, b):
    s, e = two_sum(ah, b)
    e = e + al
    return quick_two_sum(s, e)


@jit
def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


@jit
def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


@jit
def dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = dd_mul_d(bh, bl, q1)
    rh, rl = dd_sub(ah, al, ph, pl)
    q2 = rh / bh
    ph, pl = dd_mul_d(bh, bl, q2)
    rh, rl = dd_sub(rh, rl, ph, pl)
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return dd_add_d(q1, q2, q3)


@jit
def dd_muladd(ch, cl, ah, al, bh, bl):
    """c + a*b"""
    ph, pl = dd_mul(ah, al, bh, bl)
    return dd_add(ch, cl, ph, pl)


@jit
def dd_mulsub(ch, cl, ah, al, bh, bl):
    """c - a*b"""
    ph, pl = dd_mul(ah, al, bh, bl)
    return dd_sub(ch, cl, ph, pl)


@jit
def dd_sqrt(ah, al):
    if ah <= 0.0:
        return 0.0, 0.0
    x = math.sqrt(ah)
    ph, pl = two_prod(x, x)
    rh, rl = dd_sub(ah, al, ph, pl)
    return quick_two_sum(x, rh / (2.0 * x))


# --- exponential and logarithm ----------------------------------------------

@jit
def _expm1_reduced(rh, rl):
    """expm1 for |r| <= ln2/2: Taylor on r/2^10, then undo by doubling."""
    rh = rh * EXP_SCALE
    rl = rl * EXP_SCALE
    n = EXPM1_HI.shape[0]
    sh, sl = EXPM1_HI[n - 1], EXPM1_LO[n - 1]
    for j in range(n - 2, -1, -1):
        sh, sl = dd_mul(sh, sl, rh, rl)
        sh, sl = dd_add(sh, sl, EXPM1_HI[j], EXPM1_LO[j])
    sh, sl = dd_mul(sh, sl, rh, rl)
    for _ in range(EXP_HALVINGS):
        th, tl = dd_add_d(sh, sl, 2.0)
        sh, sl = dd_mul(sh, sl, th, tl)
    return sh, sl


@jit
def dd_exp(ah, al):
    k = math.floor(ah / LN2_HI + 0.5)
    ph, pl = two_prod(k, LN2_HI)
    rh, rl = dd_sub(ah, al, ph, pl)
    ph, pl = two_prod(k, LN2_LO)
    rh, rl = dd_sub(rh, rl, ph, pl)
    rh, rl = dd_add_d(rh, rl, -k * LN2_3)
    sh, sl = _expm1_reduced(rh, rl)
    hh, hl = dd_add_d(sh, sl, 1.0)
    ki = int(k)
    return math.ldexp(hh, ki), math.ldexp(hl, ki)


@jit
def dd_expm1(ah, al):
    if abs(ah) < 0.5 * LN2_HI:
        return _expm1_reduced(ah, al)
    eh, el = dd_exp(ah, al)
    return dd_add_d(eh, el, -1.0)


@jit
def dd_log(ah, al):
    # one Newton step on exp(y) = a from the float64 logarithm
    y = math.log(ah)
    eh, el = dd_exp(-y, 0.0)
    ph, pl = dd_mul(ah, al, eh, el)
    ph, pl = dd_add_d(ph, pl, -1.0)
    return dd_add_d(ph, pl, y)


@jit
def dd_cosh(ah, al):
    eh, el = dd_exp(ah, al)
    ih, il = dd_div(1.0, 0.0, eh, el)
    sh, sl = dd_add(eh, el, ih, il)
    return 0.5 * sh, 0.5 * sl


@jit
def dd_sinh(ah, al):
    # (e - 1/e)/2 written through expm1 to keep relative accuracy near 0
    neg = ah < 0.0
    if neg:
        ah, al = -ah, -al
    mh, ml = dd_expm1(ah, al)
    dh, dl = dd_add_d(mh, ml, 1.0)
    qh, ql = dd_div(mh, ml, dh, dl)
    sh, sl = dd_add(mh, ml, qh, ql)
    if neg:
        return -0.5 * sh, -0.5 * sl
    return 0.5 * sh, 0.5 * sl


# --- trigonometric -----------------------------------------------------------

@jit
def _sincos_reduced(rh, rl):
    x2h, x2l = dd_mul(rh, rl, rh, rl)
    n = SIN_HI.shape[0]
    sh, sl = SIN_HI[n - 1], SIN_LO[n - 1]
    ch, cl = COS_HI[n - 1], COS_LO[n - 1]
    for j in range(n - 2, -1, -1):
        sh, sl = dd_mul(sh, sl, x2h, x2l)
        sh, sl = dd_add(sh, sl, SIN_HI[j], SIN_LO[j])
        ch, cl = dd_mul(ch, cl, x2h, x2l)
        ch, cl = dd_add(ch, cl, COS_HI[j], COS_LO[j])
    sh, sl = dd_mul(sh, sl, rh, rl)
    return sh, sl, ch, cl


@jit
def dd_sincos(ah, al):
    """(sin a, cos a) after reduction modulo pi/2 with a three-part pi/2."""
    k = math.floor(ah / PIO2_1 + 0.5)
    ph, pl = two_prod(k, PIO2_1)
    rh, rl = dd_sub(ah, al, ph, pl)
    ph, pl = two_prod(k, PIO2_2)
    rh, rl = dd_sub(rh, rl, ph, pl)
    rh, rl = dd_add_d(rh, rl, -k * PIO2_3)
    sh, sl, ch, cl = _sincos_reduced(rh, rl)
    q = int(k) % 4
    if q == 0:
        return sh, sl, ch, cl
    if q == 1:
        return ch, cl, -sh, -sl
    if q == 2:
        return -sh, -sl, -ch, -cl
    return -ch, -cl, sh, sl


@jit
def dd_sin_pi(ah, al):
    """sin(pi*a), reducing a by the nearest integer exactly first."""
    n = math.floor(ah + 0.5)
    fh, fl = dd_add_d(ah, al, -n)
    rh, rl = dd_mul(fh, fl, PI_HI, PI_LO)
    sh, sl, _, _ = dd_sincos(rh, rl)
    if int(n) % 2 == 1:
        return -sh, -sl
    return sh, sl


# --- log-gamma ---------------------------------------------------------------

@jit
def dd_lgamma_pos(xh, xl):
    """ln Gamma(x) for x > 0: shift to x >= 20, then the Stirling series."""
    ph, pl = 1.0, 0.0
    shifted = False
    while xh < LGAMMA_SHIFT:
        ph, pl = dd_mul(ph, pl, xh, xl)
        xh, xl = dd_add_d(xh, xl, 1.0)
        shifted = True
    lxh, lxl = dd_log(xh, xl)
    th, tl = dd_add_d(xh, xl, -0.5)
    th, tl = dd_mul(th, tl, lxh, lxl)
    th, tl = dd_sub(th, tl, xh, xl)
    th, tl = dd_add(th, tl, HALF_LN_2PI_HI, HALF_LN_2PI_LO)
    ih, il = dd_div(1.0, 0.0, xh, xl)
    yh, yl = dd_mul(ih, il, ih, il)
    n = STIRLING_HI.shape[0]
    sh, sl = STIRLING_HI[n - 1], STIRLING_LO[n - 1]
    for k in range(n - 2, -1, -1):
        sh, sl = dd_mul(sh, sl, yh, yl)
        sh, sl = dd_add(sh, sl, STIRLING_HI[k], STIRLING_LO[k])
    sh, sl = dd_mul(sh, sl, ih, il)
    th, tl = dd_add(th, tl, sh, sl)
    if shifted:
        qh, ql = dd_log(ph, pl)
        th, tl = dd_sub(th, tl, qh, ql)
    return th, tl
