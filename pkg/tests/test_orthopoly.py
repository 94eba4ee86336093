import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besseldet.extprec import ExtReal
from besseldet.orthopoly import (dlogD_via_identity, eval_poly, op_derivatives, op_snapshot,
                                 pi0_bordered, recurrence_residual)
from besseldet.toeplitz import build_moment_table, dlogdet, factorize

from conftest import rel_err, to_mp

# nu = 0.3, t = 5, n = 6, from a 60-digit mpmath solve of the moment system
PI0 = "-0.2620311127946427313608007227453128649446"
H6 = "1.236236562766128047126638174606589889091"
A_SUB = "-1.94697411278545316534061225032210988597"
AT_SUB = "-2.666974112785453138695259659318352915802"
DLOG_PI0 = "-1.1499133792029966498524435908143108289"


def test_snapshot_matches_oracle():
    snap = op_derivatives(op_snapshot(0.3, 5.0, 6))
    assert rel_err(snap.pi0, PI0) < 1e-24
    assert rel_err(snap.h, H6) < 1e-24
    assert rel_err(snap.a_sub, A_SUB) < 1e-24
    assert rel_err(snap.at_sub, AT_SUB) < 1e-24
    assert rel_err(snap.dlog_pi0, DLOG_PI0) < 1e-20
    assert snap.h_sign == 1


def test_n0_and_n1_closed_forms():
    nu, t = -0.4, 1.7
    tab = build_moment_table(nu, t, 2)
    m = lambda k: to_mp(tab.m(k))
    s0 = op_snapshot(nu, t, 0, tab)
    assert s0.pi0 == ExtReal(1.0)
    assert rel_err(s0.h, m(0)) < 1e-31
    assert rel_err(s0.gamma, 1 / mpmath.sqrt(m(0))) < 1e-30
    s1 = op_snapshot(nu, t, 1, tab)
    assert rel_err(s1.pi0, -m(1) / m(0)) < 1e-30
    assert rel_err(s1.ct[0], -m(-1) / m(0)) < 1e-30
    assert rel_err(s1.h, m(0) - m(1) * m(-1) / m(0)) < 1e-29


@pytest.mark.parametrize("z", [0.0, 0.5, -1.3])
def test_bordered_determinant(z):
    nu, t, n = 0.3, 4.0, 5
    tab = build_moment_table(nu, t, n)
    snap = op_snapshot(nu, t, n, tab)
    want = eval_poly(snap.c, z)
    assert rel_err(pi0_bordered(tab, n, z), want) < 1e-22


@pytest.mark.parametrize("z", [0.3, -0.7])
@pytest.mark.parametrize("nu", [0.0, 0.3, -1.5])
def test_recurrence(nu, z):
    t, n = 3.0, 2
    tab = build_moment_table(nu, t, n + 1)
    s_n1 = op_snapshot(nu, t, n + 1, tab)
    scale = abs(float(eval_poly(s_n1.c, z))) + abs(z) * abs(float(eval_poly(op_snapshot(nu, t, n, tab).c, z)))
    assert abs(float(recurrence_residual(nu, t, n, z, tab))) / scale < 1e-27


@pytest.mark.parametrize("nu,t,n", [(0.3, 5.0, 6), (-0.7, 3.0, 4), (1.0, 8.0, 7)])
def test_orthogonality(nu, t, n):
    tab = build_moment_table(nu, t, n)
    snap = op_snapshot(nu, t, n, tab)
    for i in range(n):
        terms = [snap.c[j] * tab.m(j - i) for j in range(n + 1)]
        terms_t = [snap.ct[j] * tab.m(i - j) for j in range(n + 1)]
        for ts in (terms, terms_t):
            acc = ExtReal(0.0)
            for x in ts:
                acc = acc + x
            assert abs(float(acc)) / max(abs(x.hi) for x in ts) < 1e-26
    acc = ExtReal(0.0)
    for j in range(n + 1):
        acc = acc + snap.c[j] * tab.m(j - n)
    assert rel_err(acc, snap.h) < 1e-26


@settings(max_examples=25, deadline=None)
@given(nu=st.floats(-2.0, 2.0), n=st.integers(1, 6), frac=st.floats(0.0, 1.0))
def test_identity_and_normalisation(nu, n, frac):
    t = 1.0 + frac * (2 * n - 1)
    tab = build_moment_table(nu, t, n)
    fac = factorize(tab, n)
    snap = op_snapshot(nu, t, n, tab, fac)
    assert snap.h_sign == (1 if snap.h.hi > 0 else -1)
    assert rel_err(snap.gamma * snap.gamma * abs(snap.h), ExtReal(1.0)) < 1e-30
    (l1,) = dlogdet(tab, n, 1, fac)
    ident = dlogD_via_identity(nu, t, n, tab, snap)
    assert abs(float(ident - l1)) <= 1e-20 * max(abs(float(l1)), 1.0)


@pytest.mark.parametrize("nu,t,n", [(0.3, 5.0, 6), (-1.2, 2.0, 3)])
def test_coefficient_derivatives_against_fd(nu, t, n):
    h = 2.0 ** -14
    snap = op_derivatives(op_snapshot(nu, t, n))
    plus = op_derivatives(op_snapshot(nu, t + h, n))
    minus = op_derivatives(op_snapshot(nu, t - h, n))
    for j in range(n):
        fd1 = (to_mp(plus.c[j]) - to_mp(minus.c[j])) / (2 * h)
        fd2 = (to_mp(plus.c_t[j]) - to_mp(minus.c_t[j])) / (2 * h)
        fdt = (to_mp(plus.ct[j]) - to_mp(minus.ct[j])) / (2 * h)
        sc = max(abs(to_mp(snap.c_t[j])), 1e-3)
        assert abs(fd1 - to_mp(snap.c_t[j])) / sc < 1e-7
        assert abs(fd2 - to_mp(snap.c_tt[j])) / max(abs(to_mp(snap.c_tt[j])), 1e-3) < 1e-7
        assert abs(fdt - to_mp(snap.ct_t[j])) / max(abs(to_mp(snap.ct_t[j])), 1e-3) < 1e-7
    assert snap.c_t[n] == ExtReal(0.0)


def test_snapshot_requires_derivatives():
    snap = op_snapshot(0.3, 5.0, 6)
    assert not snap.has_derivatives
    with pytest.raises(ValueError):
        snap.dlog_pi0
    with pytest.raises(ValueError):
        op_snapshot(0.3, 5.0, 6, build_moment_table(0.3, 5.0, 1))
