"""Residual checks of the Painleve III equation and its sigma form.

alpha(x) = -pi_{n+1}(0)/pi_n(0) evaluated at t = 2x should satisfy

    a'' = a'^2/a - a'/x + (4/x)((nu - n) a^2 + n + nu + 1) + 4 a^3 - 4/a,

and sigma(x) = 2x L'(2x) - x^2, with L = log D_{n,nu}, should satisfy

    (x s'' - s')^2 = 4(2s - x s')(s'^2 - 4x^2)
                     + 2(th0^2 + thi^2)(s'^2 + 4x^2) - 16 th0 thi x s'

with th0 = nu - n and thi = -(n + nu). All derivatives come from the
analytic propagation in :mod:`orthopoly` and :func:`toeplitz.dlogdet`;
finite differences appear only in cross-checks. Residuals are paired with the
magnitude of the largest composed term so thresholds can be relative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from .extprec import ExtPrecDomainError, ExtReal, as_ext
from .orthopoly import op_derivatives, op_snapshot
from .toeplitz import MomentTable, build_moment_table, dlogdet

__all__ = [
    "LATTICE", "PIII_TOL", "SIGMA_TOL", "AlphaDerivs", "PIIIPoint", "PIIIResidualReport",
    "alpha_and_derivs", "piii_residual", "sigma_and_derivs", "sigma_residual",
    "sigma_residual_n0", "check_point", "run_lattice", "perturbation_growth",
]

LATTICE = tuple(product((-0.7, 0.0, 0.3, 1.0), (1, 3, 6), (0.5, 2.0)))
PIII_TOL = 1e-15
SIGMA_TOL = 1e-12


@dataclass(frozen=True)
class AlphaDerivs:
    alpha: ExtReal
    d1: ExtReal
    d2: ExtReal


def _table(nu, x, n, tab, digits):
    if tab is not None:
        return tab
    return build_moment_table(nu, 2 * as_ext(x), n + 1, digits)


def alpha_and_derivs(nu, n: int, x, tab: Optional[MomentTable] = None,
                     digits: Optional[int] = None) -> AlphaDerivs:
    """alpha and its first two x-derivatives (d/dx = 2 d/dt)."""
    x = as_ext(x)
    t = 2 * x
    tab = _table(nu, x, n, tab, digits)
    s0 = op_derivatives(op_snapshot(nu, t, n, tab))
    s1 = op_derivatives(op_snapshot(nu, t, n + 1, tab))
    a = -s1.pi0 / s0.pi0
    # log-derivative form: a'/a = g, a''/a = g^2 + g'
    r1, r0 = s1.pi0_t / s1.pi0, s0.pi0_t / s0.pi0
    g = r1 - r0
    dg = s1.pi0_tt / s1.pi0 - r1 * r1 - s0.pi0_tt / s0.pi0 + r0 * r0
    return AlphaDerivs(a, 2 * a * g, 4 * a * (g * g + dg))


def _piii_terms(nu, n, x, ad: AlphaDerivs):
    a, a1 = ad.alpha, ad.d1
    if a.hi == 0.0:
        raise ExtPrecDomainError("alpha vanishes; the Painleve III residual is undefined")
    nu = as_ext(nu)
    return [a1 * a1 / a, -a1 / x, (4 / x) * ((nu - n) * a * a + n + nu + 1), 4 * a ** 3, -4 / a]


def piii_residual(nu, n: int, x, tab: Optional[MomentTable] = None,
                  derivs: Optional[AlphaDerivs] = None) -> ExtReal:
    x = as_ext(x)
    ad = derivs or alpha_and_derivs(nu, n, x, tab)
    rhs = ExtReal(0.0)
    for term in _piii_terms(nu, n, x, ad):
        rhs = rhs + term
    return ad.d2 - rhs


def piii_scale(ad: AlphaDerivs) -> float:
    return max(abs(ad.d2.hi), 4 * abs(ad.alpha.hi) ** 3)


def sigma_and_derivs(nu, n: int, x, tab: Optional[MomentTable] = None):
    """(sigma, sigma', sigma'') in x from L', L'', L''' at t = 2x."""
    x = as_ext(x)
    if n == 0:
        return -(x * x), -2 * x, ExtReal(-2.0)
    tab = tab if tab is not None else build_moment_table(nu, 2 * x, n)
    l1, l2, l3 = dlogdet(tab, n, 3)
    return 2 * x * l1 - x * x, 2 * l1 + 4 * x * l2 - 2 * x, 8 * l2 + 8 * x * l3 - 2


def _sigma_sides(nu, n, x, s, s1, s2):
    nu = as_ext(nu)
    th0, thi = nu - n, -(nu + n)
    lhs = (x * s2 - s1) ** 2
    rhs = (4 * (2 * s - x * s1) * (s1 * s1 - 4 * x * x)
           + 2 * (th0 * th0 + thi * thi) * (s1 * s1 + 4 * x * x)
           - 16 * th0 * thi * x * s1)
    return lhs, rhs


def sigma_residual(nu, n: int, x, tab: Optional[MomentTable] = None, sig=None) -> ExtReal:
    x = as_ext(x)
    s, s1, s2 = sig or sigma_and_derivs(nu, n, x, tab)
    lhs, rhs = _sigma_sides(nu, n, x, s, s1, s2)
    return lhs - rhs


def sigma_scale(x, sig) -> float:
    x = abs(float(x))
    _, s1, s2 = sig
    return abs(s2.hi) * x + abs(s1.hi) ** 3 + x ** 3


def sigma_residual_n0(nu, x) -> ExtReal:
    """Residual of sigma = -x^2 (the D_0 = 1 convention) with th0 = nu, thi = -nu."""
    return sigma_residual(nu, 0, x)


@dataclass(frozen=True)
class PIIIPoint:
    nu: float
    n: int
    x: float
    alpha: float
    alpha_d1: float
    alpha_d2: float
    piii_residual: float
    piii_scale: float
    sigma: float
    sigma_d1: float
    sigma_d2: float
    sigma_residual: float
    sigma_scale: float

    @property
    def piii_rel(self) -> float:
        return abs(self.piii_residual) / self.piii_scale

    @property
    def sigma_rel(self) -> float:
        return abs(self.sigma_residual) / self.sigma_scale


@dataclass(frozen=True)
class PIIIResidualReport:
    points: tuple = field(default_factory=tuple)
    piii_tol: float = PIII_TOL
    sigma_tol: float = SIGMA_TOL

    @property
    def max_piii_rel(self) -> float:
        return max((p.piii_rel for p in self.points), default=0.0)

    @property
    def max_sigma_rel(self) -> float:
        return max((p.sigma_rel for p in self.points), default=0.0)

    @property
    def piii_pass(self) -> bool:
        return self.max_piii_rel <= self.piii_tol

    @property
    def sigma_pass(self) -> bool:
        return self.max_sigma_rel <= self.sigma_tol


def check_point(nu, n: int, x, tab: Optional[MomentTable] = None,
                digits: Optional[int] = None) -> PIIIPoint:
    """Both residuals at one (nu, n, x), sharing one moment table."""
    x = as_ext(x)
    tab = _table(nu, x, n, tab, digits)
    ad = alpha_and_derivs(nu, n, x, tab)
    pr = piii_residual(nu, n, x, derivs=ad)
    sig = sigma_and_derivs(nu, n, x, tab)
    sr = sigma_residual(nu, n, x, sig=sig)
    return PIIIPoint(float(as_ext(nu)), n, float(x), float(ad.alpha), float(ad.d1), float(ad.d2),
                     float(pr), piii_scale(ad), float(sig[0]), float(sig[1]), float(sig[2]),
                     float(sr), sigma_scale(x, sig))


def _point_task(args):
    nu, n, x = args
    return check_point(nu, n, x)


def run_lattice(points: Sequence = LATTICE, jobs: int = 1) -> PIIIResidualReport:
    """Evaluate every lattice point; output order follows ``points``."""
    points = list(points)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point_task, points))
    else:
        results = [_point_task(p) for p in points]
    return PIIIResidualReport(tuple(results))


def perturbation_growth(nu, n: int, x, rels: Sequence[float] = (0.0, 1e-12, 1e-10, 1e-8),
                        seed: int = 0):
    """Relative residuals [(rel, piii_rel, sigma_rel)] under moment-table perturbations."""
    x = as_ext(x)
    base = _table(nu, x, n, None, None)
    out = []
    for rel in rels:
        tab = base.perturbed(rel, seed) if rel else base
        p = check_point(nu, n, x, tab)
        out.append((rel, p.piii_rel, p.sigma_rel))
    return out
