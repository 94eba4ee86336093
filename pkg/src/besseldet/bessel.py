"""Modified Bessel functions I_mu(t), K_a(t) for real order and t > 0.

Primary route: the all-positive ascending series for I_a (a >= 0) and, for
negative non-integer orders, the connection formula

    I_{-a}(t) = I_a(t) + (2/pi) sin(a pi) K_a(t),

with K_a from a positive-integrand quadrature. An independent oracle based
on the Schlaefli integral is provided for cross-checks.

Orders may be given as float or :class:`ExtReal`; they are carried in dd so
that order shifts mu +- 1 are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

from . import _dd
from ._backend import jit
from .extprec import ExtPrecDomainError, ExtReal, as_ext, const_pi, sin_pi
from .quadrature import QuadratureError, adaptive_gl, k_integral

__all__ = [
    "BesselEval", "OracleError", "bessel_i_series", "bessel_k_integral", "bessel_i",
    "evaluate_i", "bessel_i_oracle", "bessel_i_derivs", "bessel_i_orders",
]

SERIES_TOL = 1e-34
SERIES_MAX_TERMS = 100_000
ORACLE_MIN_DIGITS = 10.0
_DD_EPS = 2.0 ** -104


class OracleError(ArithmeticError):
    """The oracle cannot certify the requested number of digits."""


@dataclass(frozen=True)
class BesselEval:
    mu: ExtReal
    t: ExtReal
    value: ExtReal
    method: Literal["series", "connection", "oracle-integral"]
    digits: Optional[float] = None


def _check_t(t) -> ExtReal:
    t = as_ext(t)
    if not t.hi > 0.0:
        raise ExtPrecDomainError("Bessel argument t must be > 0")
    return t


@jit
def i_series_kernel(ah, al, th, tl):
    """I_a(t), a >= 0: leading (t/2)^a / Gamma(a+1) in log form, then term ratios."""
    hh, hl = 0.5 * th, 0.5 * tl
    lh, ll = _dd.dd_log(hh, hl)
    eh, el = _dd.dd_mul(ah, al, lh, ll)
    gh, gl = _dd.dd_add_d(ah, al, 1.0)
    gh, gl = _dd.dd_lgamma_pos(gh, gl)
    eh, el = _dd.dd_sub(eh, el, gh, gl)
    term_h, term_l = _dd.dd_exp(eh, el)
    qh, ql = _dd.dd_mul(hh, hl, hh, hl)
    sh, sl = term_h, term_l
    k = 0
    while k < SERIES_MAX_TERMS:
        k += 1
        dh, dl = _dd.dd_add_d(ah, al, float(k))
        dh, dl = _dd.dd_mul_d(dh, dl, float(k))
        rh, rl = _dd.dd_div(qh, ql, dh, dl)
        term_h, term_l = _dd.dd_mul(term_h, term_l, rh, rl)
        sh, sl = _dd.dd_add(sh, sl, term_h, term_l)
        # ratios decrease from here on, so the tail is below term * r/(1-r) <= term
        if rh < 0.5 and term_h <= SERIES_TOL * sh:
            break
    return sh, sl, k


def bessel_i_series(a, t) -> ExtReal:
    """I_a(t) for a >= 0 from the ascending series (all terms positive)."""
    a = as_ext(a)
    t = _check_t(t)
    if a.hi < 0.0:
        raise ExtPrecDomainError("bessel_i_series requires a >= 0")
    h, l, _ = i_series_kernel(a.hi, a.lo, t.hi, t.lo)
    if not (math.isfinite(h) and math.isfinite(l)):
        raise ExtPrecDomainError(f"I_{a.hi}({t.hi}) is outside the float64 range")
    return ExtReal._raw(h, l)


def bessel_k_integral(a, t) -> ExtReal:
    """K_a(t) = int_0^inf exp(-t cosh u) cosh(a u) du; even in a."""
    return k_integral(as_ext(a), _check_t(t))


def evaluate_i(mu, t) -> BesselEval:
    mu = as_ext(mu)
    t = _check_t(t)
    if mu.hi >= 0.0:
        return BesselEval(mu, t, bessel_i_series(mu, t), "series")
    a = -mu
    if a.is_integer():
        return BesselEval(mu, t, bessel_i_series(a, t), "series")
    value = bessel_i_series(a, t) + 2 * sin_pi(a) * bessel_k_integral(a, t) / const_pi()
    return BesselEval(mu, t, value, "connection")


def bessel_i(mu, t) -> ExtReal:
    """I_mu(t) for real mu and t > 0."""
    return evaluate_i(mu, t).value


def bessel_i_orders(mu0, t, offsets) -> dict:
    """{m: I_{mu0+m}(t)} for integer offsets m, with exact dd order shifts."""
    mu0 = as_ext(mu0)
    t = _check_t(t)
    return {m: bessel_i(mu0 + m, t) for m in offsets}


def bessel_i_derivs(mu, t, order: int = 1) -> list:
    """[I_mu, I_mu', ..., I_mu^(order)] at t via I' = (I_{mu-1} + I_{mu+1})/2."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0, 1, 2 or 3")
    vals = bessel_i_orders(mu, t, range(-order, order + 1))
    out = []
    for d in range(order + 1):
        acc = ExtReal(0.0)
        for j in range(d + 1):
            acc = acc + math.comb(d, j) * vals[-d + 2 * j]
        out.append(acc * (0.5 ** d))
    return out


def bessel_i_oracle(mu, t) -> BesselEval:
    """I_mu(t) from the Schlaefli integral, by adaptive Gauss-Legendre panels.

        I_mu(t) = 1/pi int_0^pi e^{t cos s} cos(mu s) ds
                  - sin(mu pi)/pi int_0^inf e^{-t cosh u - mu u} du

    The first integral cancels to roughly e^t / I_mu(t); the returned
    ``digits`` estimates what survives. Raises :class:`OracleError` below
    ten digits.
    """
    mu = as_ext(mu)
    t = _check_t(t)
    pi = const_pi()
    j1, j1_abs, err1 = adaptive_gl(0, mu, t, ExtReal(0.0), pi)
    s = sin_pi(mu)
    j2, err2 = ExtReal(0.0), 0.0
    if s.hi != 0.0:
        m, tf = mu.hi, t.hi
        u0 = max(0.0, math.asinh(-m / tf))
        top = -tf * math.cosh(u0) - m * u0
        upper = u0 + 1.0
        while -tf * math.cosh(upper) - m * upper > top - 92.1:
            upper += 0.5
        j2, _, err2 = adaptive_gl(1, mu, t, ExtReal(0.0), ExtReal(upper))
    value = (j1 - s * j2) / pi
    if value.hi == 0.0:
        raise OracleError("oracle value vanished")
    scale = (j1_abs.hi + abs(s.hi) * j2.hi) / pi.hi
    cancel = scale / abs(value.hi)
    rel_err = max((err1 + abs(s.hi) * err2) / pi.hi / abs(value.hi), 8 * _DD_EPS * cancel)
    digits = -math.log10(rel_err)
    if digits < ORACLE_MIN_DIGITS:
        raise OracleError(f"oracle keeps only {digits:.1f} digits for I_{mu.hi}({t.hi})")
    return BesselEval(mu, t, value, "oracle-integral", digits)
