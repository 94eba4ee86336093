"""The acceptance suite: one deterministic verdict per criterion.

Each check returns ``{"name", "pass", "metrics"}``. Wall times are measured
but kept out of the verdict itself (only the boolean ``runtime_ok`` enters),
so repeated runs produce byte-identical JSON.
"""

from __future__ import annotations

import json
import time
from typing import Callable, Optional

import mpmath
import numpy as np

from .bessel import OracleError, bessel_i, bessel_i_oracle, bessel_k_integral
from .extprec import ExtReal
from .orthopoly import dlogD_via_identity, op_snapshot
from .painleve2 import (PIIProblem, asymptotic_constants, continuous_residual,
                        shooting_oracle, solve_hastings_mcleod)
from .piii_verify import LATTICE, PIII_TOL, SIGMA_TOL, run_lattice
from .scaling import SLOPE_BOUND, ScalingConfig, run_ladder
from .toeplitz import build_moment_table, dlogdet, factorize

__all__ = ["CRITERIA", "run_criterion", "run_all", "report_json", "determinism_verdict"]

CLOSED_FORM_TOL = 1e-28
RECURRENCE_TOL = 1e-26
ORACLE_TOL = 1e-15
ORACLE_MIN_DIGITS = 15.0
IDENTITY_TOL = 1e-20
PII_RESIDUAL_TOL = 1e-8
PII_ORACLE_TOL = 1e-6
PII_SYMMETRY_TOL = 1e-8
PII_CONST_MAX = 10.0
SYMMETRY_TOL = 1e-24


def _mp(x: ExtReal):
    return mpmath.mpf(x.hi) + mpmath.mpf(x.lo)


def _rel(a: ExtReal, b: ExtReal) -> float:
    return float(abs(a - b) / abs(b))


def _verdict(name, ok, metrics):
    return {"name": name, "pass": bool(ok), "metrics": metrics}


def criterion_bessel(jobs: int = 1):
    closed = 0.0
    with mpmath.workdps(50):
        for t in (0.5, 1.0, 2.0, 5.0, 12.0, 40.0, 80.0):
            tm = mpmath.mpf(t)
            pre = mpmath.sqrt(2 / (mpmath.pi * tm))
            pairs = [(bessel_i(0.5, t), pre * mpmath.sinh(tm)),
                     (bessel_i(-0.5, t), pre * mpmath.cosh(tm)),
                     (bessel_k_integral(0.5, t), mpmath.sqrt(mpmath.pi / (2 * tm)) * mpmath.exp(-tm))]
            for got, want in pairs:
                closed = max(closed, float(abs(_mp(got) - want) / want))
    mus = sorted(set(np.round(np.linspace(-40.0, 40.0, 81) + 0.3, 12).tolist()
                     + list(range(-40, 41, 8)) + [-39.5, -0.5, 0.5, 20.5]))
    mus = [m for m in mus if -40.0 <= m <= 40.0]
    rec = 0.0
    for t in (1.0, 5.0, 12.0, 30.0, 80.0):
        for mu in mus:
            m = ExtReal(mu)
            # dd order shifts keep mu - 1 and mu + 1 exact
            lo, mid, hi = bessel_i(m - 1, t), bessel_i(m, t), bessel_i(m + 1, t)
            term = (2 * m / t) * mid
            scale = max(abs(lo.hi), abs(hi.hi), abs(term.hi))
            rec = max(rec, abs(float(lo - hi - term)) / scale)
    oracle, compared, skipped = 0.0, 0, 0
    for mu in (-7.3, -2.5, -0.7, 0.0, 0.5, 3.3, 12.7):
        for t in (1.0, 6.0, 12.0):
            try:
                ev = bessel_i_oracle(mu, t)
            except OracleError:
                skipped += 1
                continue
            if ev.digits < ORACLE_MIN_DIGITS:
                skipped += 1
                continue
            compared += 1
            oracle = max(oracle, _rel(bessel_i(mu, t), ev.value))
    ok = closed <= CLOSED_FORM_TOL and rec <= RECURRENCE_TOL and oracle <= ORACLE_TOL and compared > 0
    return ok, {"closed_form_rel": closed, "recurrence_rel": rec, "oracle_rel": oracle,
                "oracle_compared": compared, "oracle_skipped": skipped,
                "recurrence_points": 5 * len(mus)}


def criterion_identity(jobs: int = 1):
    worst, rows = 0.0, []
    for nu in (-0.7, 0.0, 0.3):
        for n in (2, 6, 12):
            t = float(n)
            tab = build_moment_table(nu, t, n)
            fac = factorize(tab, n)
            (l1,) = dlogdet(tab, n, 1, fac)
            ident = dlogD_via_identity(nu, t, n, tab, op_snapshot(nu, t, n, tab, fac))
            rel = _rel(ident, l1)
            worst = max(worst, rel)
            rows.append([nu, n, float(l1), rel])
    return worst <= IDENTITY_TOL, {"max_rel": worst, "configs": rows}


_lattice_cache = {}


def _lattice(jobs: int = 1):
    # criteria 3 and 4 share the lattice evaluation within one process
    if "report" not in _lattice_cache:
        _lattice_cache["report"] = run_lattice(LATTICE, jobs=jobs)
    return _lattice_cache["report"]


def criterion_piii(jobs: int = 1):
    rep = _lattice(jobs)
    return rep.max_piii_rel <= PIII_TOL, {"max_rel": rep.max_piii_rel, "tol": PIII_TOL,
                                         "points": len(rep.points)}


def criterion_sigma(jobs: int = 1):
    rep = _lattice(jobs)
    return rep.max_sigma_rel <= SIGMA_TOL, {"max_rel": rep.max_sigma_rel, "tol": SIGMA_TOL,
                                           "points": len(rep.points)}


def criterion_pii(jobs: int = 1):
    res, consts = {}, {}
    sols = {}
    for nu in (-0.5, 0.0, -1.0):
        sol = solve_hastings_mcleod(PIIProblem(nu))
        sols[nu] = sol
        _, r = continuous_residual(sol)
        res[str(nu)] = float(np.max(np.abs(r)))
        consts[str(nu)] = list(asymptotic_constants(sol))
    u0 = sols[-0.5].at(0.0)[0]
    _, shot = shooting_oracle()
    oracle_diff = abs(u0 - shot[0.0])
    # integer branch solved directly (no reflection) so the symmetry is a real test
    direct0 = solve_hastings_mcleod(PIIProblem(0.0, strategy="direct"))
    sym = float(np.max(np.abs(direct0.u + sols[-1.0].u)))
    ok = (max(res.values()) <= PII_RESIDUAL_TOL and oracle_diff <= PII_ORACLE_TOL
          and sym <= PII_SYMMETRY_TOL and max(max(c) for c in consts.values()) <= PII_CONST_MAX)
    return ok, {"ode_residual": res, "u0_nu_m_half": u0, "u0_shooting": shot[0.0],
                "oracle_diff": oracle_diff, "symmetry_sup": sym, "asymptotic_constants": consts}


def criterion_scaling(jobs: int = 1):
    out, ok = {}, True
    for nu in (0.0, 0.5):
        v = run_ladder(ScalingConfig(nu, 0.0), jobs=jobs)
        verdict = v.verdict()
        ok = ok and verdict["pass"]
        out[str(nu)] = {
            "slopes": verdict["metrics"]["slopes"],
            "slope_stderr": verdict["metrics"]["slope_stderr"],
            "last_le_first": verdict["metrics"]["last_le_first"],
            "max_identity_rel": verdict["metrics"]["max_identity_rel"],
            "err": {str(r.n): [r.err_D, r.err_gamma, r.err_R] for r in v.rows},
        }
    return ok, {"slope_bound": SLOPE_BOUND, "ladders": out}


def criterion_symmetry(jobs: int = 1):
    worst, rows = 0.0, []
    for n in (4, 16):
        for t in (4.0, 16.0):
            lp = factorize(build_moment_table(1.0, t, n), n).logdet_abs
            lm = factorize(build_moment_table(-1.0, t, n), n).logdet_abs
            d = abs(float(lp - lm))
            worst = max(worst, d)
            rows.append([n, t, float(lp), d])
    return worst <= SYMMETRY_TOL, {"max_abs_diff": worst, "configs": rows}


# (number, name, runtime limit in seconds, check)
CRITERIA: list = [
    (1, "bessel layer", 30.0, criterion_bessel),
    (2, "differential identity", 60.0, criterion_identity),
    (3, "painleve III residual", 120.0, criterion_piii),
    (4, "sigma-form residual", 120.0, criterion_sigma),
    (5, "painleve II solver", 120.0, criterion_pii),
    (6, "double-scaling rates", 300.0, criterion_scaling),
    (7, "nu -> -nu symmetry", 30.0, criterion_symmetry),
]


def run_criterion(number: int, jobs: int = 1):
    """(verdict, seconds) for criterion ``number`` in 1..7."""
    for num, name, limit, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            ok, metrics = fn(jobs)
            dt = time.perf_counter() - t0
            metrics = dict(metrics, runtime_limit_s=limit, runtime_ok=dt < limit)
            return _verdict(f"{num}. {name}", ok and dt < limit, metrics), dt
    raise ValueError(f"no criterion {number}")


def run_all(progress: Optional[Callable] = None, jobs: int = 1):
    """Verdicts for criteria 1..7 and their timings."""
    _lattice_cache.clear()
    verdicts, timings = [], {}
    for num, *_ in CRITERIA:
        v, dt = run_criterion(num, jobs)
        verdicts.append(v)
        timings[v["name"]] = dt
        if progress:
            progress(v, dt)
    _lattice_cache.clear()
    return verdicts, timings


def report_json(verdicts) -> str:
    return json.dumps(verdicts, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, ExtReal):
        return float(x)
    raise TypeError(type(x).__name__)


def determinism_verdict(first: str, second: str):
    same = first == second
    return _verdict("8. determinism", same, {"bytes": len(first), "identical": same})
