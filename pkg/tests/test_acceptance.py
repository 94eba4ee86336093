"""Acceptance criteria 1-8, each at its stated tolerance and runtime limit.

One PASS/FAIL line per criterion is printed to the terminal even when pytest
captures output.
"""

import pytest

from besseldet import verify
from besseldet.cli import main
from besseldet.piii_verify import PIII_TOL, SIGMA_TOL
from besseldet.scaling import SLOPE_BOUND


@pytest.fixture(scope="module")
def results():
    verify._lattice_cache.clear()
    out = {}
    for num, *_ in verify.CRITERIA:
        out[num] = verify.run_criterion(num)
    verify._lattice_cache.clear()
    return out


def _report(capsys, verdict, dt=None):
    status = "PASS" if verdict["pass"] else "FAIL"
    extra = f" ({dt:.1f} s)" if dt is not None else ""
    with capsys.disabled():
        print(f"\n[acceptance] {status} {verdict['name']}{extra}")


def _check(results, capsys, num):
    verdict, dt = results[num]
    _report(capsys, verdict, dt)
    limit = verdict["metrics"]["runtime_limit_s"]
    assert dt < limit, f"runtime {dt:.1f} s exceeds {limit} s"
    return verdict


def test_criterion_1_bessel(results, capsys):
    v = _check(results, capsys, 1)
    m = v["metrics"]
    assert m["closed_form_rel"] <= 1e-28
    assert m["recurrence_rel"] <= 1e-26
    assert m["oracle_rel"] <= 1e-15 and m["oracle_compared"] > 0
    assert v["pass"]


def test_criterion_2_identity(results, capsys):
    v = _check(results, capsys, 2)
    assert v["metrics"]["max_rel"] <= 1e-20
    assert v["pass"]


def test_criterion_3_painleve_iii(results, capsys):
    v = _check(results, capsys, 3)
    assert v["metrics"]["max_rel"] <= PIII_TOL == 1e-15
    assert v["pass"]


def test_criterion_4_sigma_form(results, capsys):
    v = _check(results, capsys, 4)
    assert v["metrics"]["max_rel"] <= SIGMA_TOL == 1e-12
    assert v["pass"]


def test_criterion_5_painleve_ii(results, capsys):
    v = _check(results, capsys, 5)
    m = v["metrics"]
    assert max(m["ode_residual"].values()) <= 1e-8
    assert m["oracle_diff"] <= 1e-6
    assert m["symmetry_sup"] <= 1e-8
    assert max(max(c) for c in m["asymptotic_constants"].values()) <= 10.0
    assert v["pass"]


def test_criterion_6_scaling(results, capsys):
    v = _check(results, capsys, 6)
    for nu, lad in v["metrics"]["ladders"].items():
        for key, s in lad["slopes"].items():
            assert s <= SLOPE_BOUND, (nu, key, s)
        assert lad["last_le_first"]
        assert lad["max_identity_rel"] <= 1e-20
    assert v["pass"]


def test_criterion_7_symmetry(results, capsys):
    v = _check(results, capsys, 7)
    assert v["metrics"]["max_abs_diff"] <= 1e-24
    assert v["pass"]


def test_criterion_8_determinism(capsys):
    reports = []
    for _ in range(2):
        code = main(["verify-all", "--skip-determinism"])
        out, _ = capsys.readouterr()
        assert code == 0
        reports.append(out)
    v = verify.determinism_verdict(*reports)
    _report(capsys, v)
    assert v["metrics"]["bytes"] > 0
    assert v["pass"]
