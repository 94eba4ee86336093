import math
import threading

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besseldet.bessel import (OracleError, bessel_i, bessel_i_derivs, bessel_i_oracle,
                              bessel_i_orders, bessel_i_series, bessel_k_integral, evaluate_i)
from besseldet.extprec import ExtPrecDomainError, ExtReal

from conftest import rel_err, to_mp

# 40-digit mpmath values
I0_1 = "1.266065877752008335598244625214717537608"
K325_10 = "0.00002933532735571176758035032027221649685447"
IM73_12 = "2010.602804559420950191425779905720842627"
IM25_6 = "38.32881290244059240282126508299515294961"
IM403_80 = "111499190834338373208885788565.5407142772"
I402_1 = "4.654541260743548562422678217464536364125e-61"


def closed_half(t):
    pre = mpmath.sqrt(2 / (mpmath.pi * t))
    return pre * mpmath.sinh(t), pre * mpmath.cosh(t), mpmath.sqrt(mpmath.pi / (2 * t)) * mpmath.exp(-t)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 7.5, 20.0, 80.0])
def test_half_integer_closed_forms(t):
    ip, im, k = closed_half(mpmath.mpf(t))
    assert rel_err(bessel_i_series(0.5, t), ip) < 1e-28
    assert rel_err(bessel_i(-0.5, t), im) < 1e-28
    assert rel_err(bessel_k_integral(0.5, t), k) < 1e-28


def test_spec_examples():
    assert rel_err(bessel_i_series(0.5, 2), "2.046236863089055036605183612021") < 1e-28
    assert rel_err(bessel_i_series(0, 1), I0_1) < 1e-30
    k_half = mpmath.sqrt(mpmath.pi / 4) * mpmath.exp(-2)
    assert mpmath.nstr(k_half, 9) == "0.119937772"
    assert rel_err(bessel_k_integral(0.5, 2), k_half) < 1e-28
    diff = bessel_i(-0.5, 2) - bessel_i(0.5, 2)
    assert rel_err(diff, mpmath.sqrt(1 / mpmath.pi) * mpmath.exp(-2)) < 1e-28
    assert bessel_i(-3, 5) == bessel_i(3, 5)


def test_against_mpmath_values():
    assert rel_err(bessel_k_integral(3.25, 10), K325_10) < 1e-29
    assert rel_err(bessel_i(-7.3, 12), IM73_12) < 1e-29
    assert rel_err(bessel_i(-2.5, 6), IM25_6) < 1e-29
    assert rel_err(bessel_i(-40.3, 80), IM403_80) < 1e-28
    assert rel_err(bessel_i(40.2, 1), I402_1) < 1e-28


def test_k_recurrence_cross_check():
    # K_{a+1} = K_{a-1} + (2a/t) K_a, seeded at a in {0.25, 1.25}
    t = 10.0
    k = {0.25: bessel_k_integral(0.25, t), 1.25: bessel_k_integral(1.25, t)}
    a = ExtReal(1.25)
    prev, cur = k[0.25], k[1.25]
    for _ in range(2):
        prev, cur = cur, prev + (2 * a / t) * cur
        a = a + 1
    assert rel_err(cur, bessel_k_integral(3.25, t)) < 1e-28


def test_methods_and_domain():
    assert evaluate_i(2.5, 3).method == "series"
    assert evaluate_i(-2.5, 3).method == "connection"
    assert evaluate_i(-4, 3).method == "series"
    with pytest.raises(ExtPrecDomainError):
        bessel_i(1.0, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 30.0), st.floats(0.1, 60.0))
def test_series_positive(a, t):
    assert bessel_i_series(a, t).hi > 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(-10.0, 10.0), st.floats(0.5, 30.0))
def test_k_even(a, t):
    assert bessel_k_integral(a, t) == bessel_k_integral(-a, t)


@pytest.mark.parametrize("t", [1.0, 5.0, 12.0, 80.0])
def test_recurrence_grid(t):
    worst = 0.0
    for j in range(-40, 41, 4):
        for off in (0.0, 0.3, 0.5):
            mu = ExtReal(j) + off
            vals = bessel_i_orders(mu, t, (-1, 0, 1))
            term = (2 * mu / t) * vals[0]
            scale = max(abs(vals[-1].hi), abs(vals[1].hi), abs(term.hi))
            worst = max(worst, abs(float(vals[-1] - vals[1] - term)) / scale)
    assert worst <= 1e-26


@pytest.mark.parametrize("mu,t", [(0.0, 1.0), (0.5, 2.0), (-2.5, 6.0), (-7.3, 12.0), (3.3, 10.0)])
def test_oracle_agreement(mu, t):
    ev = bessel_i_oracle(mu, t)
    assert ev.method == "oracle-integral"
    assert ev.digits >= 15
    assert rel_err(bessel_i(mu, t), ev.value) <= max(1e-18, 10 ** -ev.digits * 10)


def test_oracle_refuses_when_cancellation_too_large():
    with pytest.raises(OracleError):
        bessel_i_oracle(60.3, 1.0)


def test_derivs_closed_form():
    d = bessel_i_derivs(0.5, 2.0, 1)
    with mpmath.workdps(50):
        want = mpmath.diff(lambda x: mpmath.sqrt(2 / (mpmath.pi * x)) * mpmath.sinh(x), 2)
    assert rel_err(d[1], want) < 1e-28


def test_derivs_second_order_fd():
    # dyadic step so that t +- h are exact
    mu, t, h = -1.3, 4.0, 2.0 ** -20
    d = bessel_i_derivs(mu, t, 2)
    fd = (to_mp(bessel_i(mu, t + h)) - 2 * to_mp(bessel_i(mu, t)) + to_mp(bessel_i(mu, t - h))) / mpmath.mpf(h) ** 2
    assert abs(float(fd - to_mp(d[2]))) < 1e-10 * abs(d[2].hi) + 1e-10


def test_thread_safe():
    ref = [bessel_i(-3.7, t) for t in (1.0, 3.0, 9.0)]
    out = [None] * 4

    def work(i):
        out[i] = [bessel_i(-3.7, t) for t in (1.0, 3.0, 9.0)]

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(o == ref for o in out)
