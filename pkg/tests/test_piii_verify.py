from fractions import Fraction

import mpmath
import pytest

from besseldet.extprec import ExtReal
from besseldet.piii_verify import (LATTICE, PIII_TOL, SIGMA_TOL, AlphaDerivs, alpha_and_derivs,
                                   check_point, perturbation_growth, piii_residual, run_lattice,
                                   sigma_and_derivs, sigma_residual, sigma_residual_n0)

from conftest import rel_err, to_mp

# nu = 0.3, n = 3, x = 1: alpha = -pi_4(0)/pi_3(0) and d^2/dx^2 of it (60-digit mpmath)
ALPHA = "2.638349975745791336250908863672935162128"
ALPHA_D1 = "-0.568729554863851667107682774251903683605"
ALPHA_D2 = "14.65867098394112676205368183090298973347"


@pytest.fixture(scope="module")
def lattice():
    return run_lattice(LATTICE)


def test_lattice_shape():
    assert len(LATTICE) == 24
    assert {p[0] for p in LATTICE} == {-0.7, 0.0, 0.3, 1.0}
    assert {p[1] for p in LATTICE} == {1, 3, 6}
    assert {p[2] for p in LATTICE} == {0.5, 2.0}


def test_lattice_residuals(lattice):
    assert lattice.max_piii_rel <= PIII_TOL and lattice.piii_pass
    assert lattice.max_sigma_rel <= SIGMA_TOL and lattice.sigma_pass
    assert [(p.nu, p.n, p.x) for p in lattice.points] == [tuple(map(float, q)) for q in LATTICE]


def test_parallel_lattice_matches_serial(lattice):
    par = run_lattice(LATTICE[:6], jobs=2)
    assert par.points == lattice.points[:6]


def test_alpha_matches_oracle():
    ad = alpha_and_derivs(0.3, 3, 1.0)
    assert rel_err(ad.alpha, ALPHA) < 1e-26
    assert rel_err(ad.d1, ALPHA_D1) < 1e-22
    assert rel_err(ad.d2, ALPHA_D2) < 1e-22


@pytest.mark.parametrize("nu,n,x", [(0.3, 3, 0.5), (0.3, 3, 1.0), (0.3, 3, 2.0), (0.0, 1, 1.0)])
def test_piii_examples(nu, n, x):
    p = check_point(nu, n, x)
    assert abs(p.piii_residual) <= 1e-18 * p.piii_scale


@pytest.mark.parametrize("x", [0.75, 1.5, 3.0])
def test_sigma_examples(x):
    p = check_point(0.0, 2, x)
    assert abs(p.sigma_residual) <= 1e-15 * p.sigma_scale


@pytest.mark.parametrize("nu,x", [(0.0, 0.7), (0.3, 1.5), (-0.7, 2.5)])
def test_alpha_n0_closed_form(nu, x):
    ad = alpha_and_derivs(nu, 0, x)
    t = 2 * mpmath.mpf(x)
    nu_m = to_mp(ExtReal(nu))
    assert rel_err(ad.alpha, mpmath.besseli(-1 - nu_m, t) / mpmath.besseli(-nu_m, t)) < 1e-29


def test_alpha_small_t():
    # alpha = I_1(t)/I_0(t) = t/2 (1 - t^2/8 + ...) for nu = 0, n = 0
    t = 1e-3
    a = float(alpha_and_derivs(0.0, 0, t / 2).alpha)
    assert a == pytest.approx(t / 2, rel=1e-6)
    assert a > 0


@pytest.mark.parametrize("nu,n,x", [(0.3, 3, 1.0), (-0.7, 6, 2.0)])
def test_alpha_derivatives_against_fd(nu, n, x):
    h = 1e-4
    ad = alpha_and_derivs(nu, n, x)
    ap = to_mp(alpha_and_derivs(nu, n, x + h).alpha)
    am = to_mp(alpha_and_derivs(nu, n, x - h).alpha)
    a0 = to_mp(ad.alpha)
    fd2 = (ap - 2 * a0 + am) / mpmath.mpf(h) ** 2
    fd1 = (ap - am) / (2 * mpmath.mpf(h))
    assert abs(fd2 - to_mp(ad.d2)) <= 1e-6 * max(abs(to_mp(ad.d2)), 1)
    assert abs(fd1 - to_mp(ad.d1)) <= 1e-6 * max(abs(to_mp(ad.d1)), 1)


@pytest.mark.parametrize("nu,n,x", [(0.0, 2, 1.5), (0.3, 6, 0.5)])
def test_sigma_derivative_against_fd(nu, n, x):
    h = 2.0 ** -16
    s, s1, s2 = sigma_and_derivs(nu, n, x)
    sp = to_mp(sigma_and_derivs(nu, n, x + h)[0])
    sm = to_mp(sigma_and_derivs(nu, n, x - h)[0])
    assert abs((sp - sm) / (2 * h) - to_mp(s1)) <= 1e-8 * max(abs(to_mp(s1)), 1)
    s1p = to_mp(sigma_and_derivs(nu, n, x + h)[1])
    s1m = to_mp(sigma_and_derivs(nu, n, x - h)[1])
    assert abs((s1p - s1m) / (2 * h) - to_mp(s2)) <= 1e-7 * max(abs(to_mp(s2)), 1)


def _sigma_form_exact(nu, x):
    # sigma = -x^2, th0 = nu, thi = -nu, evaluated in exact rationals
    s, s1, s2 = -x * x, -2 * x, Fraction(-2)
    th0, thi = nu, -nu
    lhs = (x * s2 - s1) ** 2
    rhs = (4 * (2 * s - x * s1) * (s1 * s1 - 4 * x * x)
           + 2 * (th0 ** 2 + thi ** 2) * (s1 * s1 + 4 * x * x) - 16 * th0 * thi * x * s1)
    return lhs - rhs


def test_sigma_n0_identity():
    # the residual is a polynomial of degree <= 4 in x and <= 2 in nu: vanishing on
    # a 5 x 3 grid of exact rationals proves it vanishes identically
    for nu in (Fraction(-1, 3), Fraction(0), Fraction(7, 5)):
        for x in (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(5)):
            assert _sigma_form_exact(nu, x) == 0
    for nu, x in ((0.3, 1.0), (-0.7, 2.5)):
        assert sigma_residual_n0(nu, x) == ExtReal(0.0)
    assert sigma_and_derivs(0.3, 0, 1.5)[2] == ExtReal(-2.0)


def test_alpha_perturbation_is_detected():
    nu, n, x = 0.3, 3, 1.0
    ad = alpha_and_derivs(nu, n, x)
    base = abs(float(piii_residual(nu, n, x, derivs=ad)))
    bumped = AlphaDerivs(ad.alpha * (1 + ExtReal(1e-6)), ad.d1, ad.d2)
    moved = abs(float(piii_residual(nu, n, x, derivs=bumped)))
    assert moved >= 1e10 * max(base, 1e-40)


def test_moment_perturbation_growth():
    rows = perturbation_growth(0.3, 3, 1.0, rels=(0.0, 1e-12, 1e-10, 1e-8))
    piii = [r[1] for r in rows]
    sig = [r[2] for r in rows]
    assert piii == sorted(piii) and sig == sorted(sig)
    assert piii[-1] > 1e6 * max(piii[0], 1e-30)
    assert sig[-1] > 1e6 * max(sig[0], 1e-30)
    # at 1e-8 the checks fail, so they are not vacuous
    assert piii[-1] > PIII_TOL and sig[-1] > SIGMA_TOL


def test_sigma_residual_direct_call():
    r = sigma_residual(0.0, 2, 1.5)
    p = check_point(0.0, 2, 1.5)
    assert float(r) == p.sigma_residual
