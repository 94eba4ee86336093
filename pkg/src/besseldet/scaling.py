"""Double-scaling harness: Toeplitz-side quantities against PII predictions.

For fixed xi each rung uses t = n(1 + xi n^{-2/3}) and the PII data at
x = 2^{2/3} xi. Compared pairs:

    L'(t)          vs  t/2 + 2^{2/3} n^{-1/3} H(x; nu)
    gamma_n        vs  1 + 2^{-1/3} n^{-1/3} H(x; nu)
    c_0'/c_0       vs  -2^{2/3} n^{-1/3} u(x; nu)

Errors are absolute differences; decay rates are least-squares slopes of
log err against log n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from scipy.stats import linregress

from .orthopoly import op_derivatives, op_snapshot
from .painleve2 import PIIProblem, PIISolution, solve_hastings_mcleod
from .toeplitz import SingularToeplitzError, build_moment_table, dlogdet, factorize

__all__ = [
    "SLOPE_BOUND", "IDENTITY_TOL", "POLE_MARGIN", "ScalingConfig", "ScalingRow", "ScalingReport",
    "ScalingConfigError", "pii_data", "evaluate_rung", "run_ladder", "sweep_xi", "fit_slope",
    "REPORT_COLUMNS",
]

SLOPE_BOUND = -2.0 / 3.0 + 0.15
IDENTITY_TOL = 1e-20
# x_target closer than this to a real pole of u is rejected
POLE_MARGIN = 0.05
C23 = 2.0 ** (2.0 / 3.0)
C13 = 2.0 ** (-1.0 / 3.0)

REPORT_COLUMNS = ("n", "t", "LHS_D", "RHS_D", "err_D", "LHS_γ", "RHS_γ", "err_γ",
                  "LHS_R", "RHS_R", "err_R")


class ScalingConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScalingConfig:
    nu: float
    xi: float = 0.0
    ns: tuple = (8, 16, 32, 64)
    xL: float = -12.0
    xR: float = 12.0
    N: int = 4000

    @property
    def x_target(self) -> float:
        return C23 * self.xi

    def t_for(self, n: int) -> float:
        return n * (1.0 + self.xi * n ** (-2.0 / 3.0))

    def pii_problem(self) -> PIIProblem:
        return PIIProblem(self.nu, self.xL, self.xR, self.N)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    t: float
    LHS_D: float
    RHS_D: float
    LHS_gamma: float
    RHS_gamma: float
    LHS_R: float
    RHS_R: float
    # |trace formula - identity| / |trace formula| for L'
    identity_rel: float
    digits: int

    @property
    def err_D(self) -> float:
        return abs(self.LHS_D - self.RHS_D)

    @property
    def err_gamma(self) -> float:
        return abs(self.LHS_gamma - self.RHS_gamma)

    @property
    def err_R(self) -> float:
        return abs(self.LHS_R - self.RHS_R)

    def as_tuple(self) -> tuple:
        return (self.n, self.t, self.LHS_D, self.RHS_D, self.err_D, self.LHS_gamma,
                self.RHS_gamma, self.err_gamma, self.LHS_R, self.RHS_R, self.err_R)


@dataclass(frozen=True)
class Slope:
    slope: float
    stderr: float
    intercept: float


def fit_slope(ns: Sequence[int], errs: Sequence[float]) -> Slope:
    """Least-squares slope of log err against log n, with its standard error."""
    if len(ns) < 2:
        return Slope(math.nan, math.nan, math.nan)
    if any(e <= 0.0 for e in errs):
        raise ValueError("errors must be positive to fit a log-log slope")
    fit = linregress([math.log(n) for n in ns], [math.log(e) for e in errs])
    stderr = float(fit.stderr) if len(ns) > 2 else 0.0
    return Slope(float(fit.slope), stderr, float(fit.intercept))


@dataclass(frozen=True)
class ScalingReport:
    config: ScalingConfig
    H: float
    u: float
    rows: tuple
    skipped: tuple = field(default_factory=tuple)

    @property
    def ns(self) -> list:
        return [r.n for r in self.rows]

    def slopes(self) -> dict:
        return {key: fit_slope(self.ns, [getattr(r, "err_" + key) for r in self.rows])
                for key in ("D", "gamma", "R")}

    @property
    def max_identity_rel(self) -> float:
        return max((r.identity_rel for r in self.rows), default=0.0)

    def verdict(self, slope_bound: float = SLOPE_BOUND, identity_tol: float = IDENTITY_TOL) -> dict:
        slopes = self.slopes()
        first, last = self.rows[0], self.rows[-1]
        shrink = all(getattr(last, "err_" + k) <= getattr(first, "err_" + k)
                     for k in ("D", "gamma", "R"))
        ok_slopes = all(s.slope <= slope_bound for s in slopes.values())
        ok = (ok_slopes and shrink and not self.skipped
              and self.max_identity_rel <= identity_tol)
        return {
            "name": f"scaling nu={self.config.nu} xi={self.config.xi}",
            "pass": bool(ok),
            "metrics": {
                "slopes": {k: s.slope for k, s in slopes.items()},
                "slope_stderr": {k: s.stderr for k, s in slopes.items()},
                "slope_bound": slope_bound,
                "last_le_first": bool(shrink),
                "max_identity_rel": self.max_identity_rel,
                "skipped": list(self.skipped),
            },
        }


def pii_data(cfg: ScalingConfig, sol: Optional[PIISolution] = None):
    """(H, u) at x_target, rejecting configurations that sit on a pole."""
    x0 = cfg.x_target
    if not cfg.xL < x0 < cfg.xR:
        raise ScalingConfigError(f"x_target = {x0} outside the PII domain")
    sol = sol if sol is not None else solve_hastings_mcleod(cfg.pii_problem())
    if sol.pole_flag and sol.distance_to_pole(x0) < POLE_MARGIN:
        raise ScalingConfigError(f"x_target = {x0} is within {POLE_MARGIN} of a pole of u")
    u0, _, h0 = sol.at(x0)
    if not (math.isfinite(u0) and math.isfinite(h0)):
        raise ScalingConfigError("PII solve failed")
    return h0, u0


def evaluate_rung(nu: float, n: int, t: float, H: float, u: float,
                  digits: Optional[int] = None) -> ScalingRow:
    tab = build_moment_table(nu, t, n, digits)
    fac = factorize(tab, n)
    (l1,) = dlogdet(tab, n, 1, fac)
    snap = op_derivatives(op_snapshot(nu, t, n, tab, fac))
    ident = -(snap.a_sub + snap.at_sub) * 0.5
    scale = n ** (-1.0 / 3.0)
    return ScalingRow(
        n, t,
        float(l1), t / 2.0 + C23 * scale * H,
        float(snap.gamma), 1.0 + C13 * scale * H,
        float(snap.dlog_pi0), -C23 * scale * u,
        abs(float(l1 - ident)) / abs(float(l1)),
        tab.digits,
    )


def _rung_task(args):
    nu, n, t, H, u = args
    try:
        return evaluate_rung(nu, n, t, H, u)
    except SingularToeplitzError:
        return n


def _map(tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_rung_task, tasks))
    return [_rung_task(a) for a in tasks]


def run_ladder(cfg: ScalingConfig, sol: Optional[PIISolution] = None, jobs: int = 1) -> ScalingReport:
    H, u = pii_data(cfg, sol)
    tasks = [(cfg.nu, n, cfg.t_for(n), H, u) for n in cfg.ns]
    results = _map(tasks, jobs)
    rows = tuple(r for r in results if isinstance(r, ScalingRow))
    skipped = tuple(r for r in results if not isinstance(r, ScalingRow))
    return ScalingReport(cfg, H, u, rows, skipped)


@dataclass(frozen=True)
class SweepTable:
    nu: float
    n: int
    xis: tuple
    rows: tuple
    # max over xi and the three errors of err * n^{2/3}
    C: float

    def max_adjacent_ratio(self) -> float:
        worst = 1.0
        for key in ("err_D", "err_gamma", "err_R"):
            vals = [getattr(r, key) for r in self.rows]
            for a, b in zip(vals, vals[1:]):
                worst = max(worst, max(a, b) / min(a, b))
        return worst


def sweep_xi(nu: float, xis: Sequence[float], n: int, sol: Optional[PIISolution] = None,
             jobs: int = 1, **pii_kw) -> SweepTable:
    """Errors at fixed n across a window of xi, sharing one PII solve."""
    base = ScalingConfig(nu, 0.0, (n,), **pii_kw)
    sol = sol if sol is not None else solve_hastings_mcleod(base.pii_problem())
    tasks = []
    for xi in xis:
        cfg = ScalingConfig(nu, xi, (n,), **pii_kw)
        H, u = pii_data(cfg, sol)
        tasks.append((nu, n, cfg.t_for(n), H, u))
    results = _map(tasks, jobs)
    bad = [xi for xi, r in zip(xis, results) if not isinstance(r, ScalingRow)]
    if bad:
        raise SingularToeplitzError(n, nu, None, -1)
    c = max(max(r.err_D, r.err_gamma, r.err_R) for r in results) * n ** (2.0 / 3.0)
    return SweepTable(nu, n, tuple(xis), tuple(results), c)
