"""Hastings-McLeod solution of u'' = 2u^3 + x u + (nu + 1/2).

The boundary-value problem on [xL, xR] is discretized with second-order
central differences and solved by damped Newton iteration (tridiagonal
Jacobian); two grids N and 2N are combined by Richardson extrapolation.
Dirichlet data come from the large-|x| expansions

    u ~ -(nu + 1/2)/x                           x -> +inf
    u ~ +-sqrt(-x/2) + (nu + 1/2)/(2x)           x -> -inf

with the minus sign for nu in N = {0, 1, 2, ...}.

How each nu is reached (``strategy="auto"``):

* nu < 0: solved directly;
* nu in N: reflection u(x; nu) = -u(x; -nu-1) of a direct solve;
* nu > 0 not in N: the solution may have real poles, so the direct BVP is
  ill-posed. It is built from a direct solve at nu - ceil(nu) in (-1, 0) by
  ceil(nu) Baecklund steps mu -> mu + 1,

      u_new = -u - (mu + 1)/D,   D = u' + u^2 + x/2,

  and the real poles (sign changes of D) are reported.

The Hamiltonian is H = z(z + x)/2 + z u^2 - nu u with z = u' - u^2 - x/2.
This module works in float64; its results feed comparisons whose own error
is O(n^{-2/3}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.linalg import solve_banded
from scipy.special import airy

__all__ = [
    "PIIProblem", "PIISolution", "PIIError", "is_natural", "boundary_values",
    "initial_guess", "solve_hastings_mcleod", "hamiltonian", "hamiltonian_profile",
    "continuous_residual", "shooting_oracle", "asymptotic_constants",
]

NATURAL_TOL = 1e-12
POLE_BOUND = 1e3
MAX_NEWTON = 60
MIN_DAMPING = 2.0 ** -12


class PIIError(RuntimeError):
    pass


def is_natural(nu: float) -> bool:
    r = round(nu)
    return r >= 0 and abs(nu - r) <= NATURAL_TOL


@dataclass(frozen=True)
class PIIProblem:
    nu: float
    xL: float = -12.0
    xR: float = 12.0
    N: int = 4000
    tol: float = 1e-9
    branch: Optional[Literal["generic", "integer-nu"]] = None
    strategy: Literal["auto", "direct"] = "auto"
    richardson: bool = True

    def __post_init__(self):
        if self.branch is None:
            object.__setattr__(self, "branch", "integer-nu" if is_natural(self.nu) else "generic")
        elif (self.branch == "integer-nu") != is_natural(self.nu):
            raise ValueError(f"branch {self.branch!r} does not match nu = {self.nu}")
        if self.xL > -8.0 or self.xR < 8.0:
            raise ValueError("the domain must contain [-8, 8]")
        if self.N < 16 or self.N % 2:
            raise ValueError("N must be an even integer >= 16")


@dataclass(frozen=True, eq=False)
class PIISolution:
    nu: float
    x: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    newton_iters: int = 0
    final_residual: float = 0.0
    pole_flag: bool = False
    pole_locations: tuple = ()
    method: str = "direct"
    richardson_delta: float = 0.0

    def at(self, x0: float):
        """(u, u', H) at x0 by cubic Hermite (u) and cubic spline (H) interpolation."""
        if not self.x[0] <= x0 <= self.x[-1]:
            raise ValueError(f"x = {x0} outside the solution grid")
        spline = CubicHermiteSpline(self.x, self.u, self.du)
        u0 = float(spline(x0))
        du0 = float(spline.derivative()(x0))
        return u0, du0, float(CubicSpline(self.x, self.H)(x0))

    def distance_to_pole(self, x0: float) -> float:
        if not self.pole_locations:
            return math.inf
        return min(abs(x0 - p) for p in self.pole_locations)


def boundary_values(nu: float, xL: float, xR: float, branch: Optional[str] = None):
    """(uL, uR) from the truncated large-|x| expansions."""
    if xL > -8.0 or xR < 8.0:
        raise ValueError("boundary expansions need xL <= -8 and xR >= 8")
    if branch is None:
        branch = "integer-nu" if is_natural(nu) else "generic"
    a = nu + 0.5
    s = -1.0 if branch == "integer-nu" else 1.0
    return s * math.sqrt(-xL / 2.0) + a / (2.0 * xL), -a / xR


def initial_guess(nu: float, x: np.ndarray, branch: str) -> np.ndarray:
    """Sigmoid blend (centre 0, width 2) of the two one-sided asymptotic shapes."""
    s = -1.0 if branch == "integer-nu" else 1.0
    g = 0.5 * (1.0 - np.tanh(x / 2.0))
    left = s * np.sqrt(0.5 * np.logaddexp(0.0, -x))
    right = -(nu + 0.5) * x / (x * x + 1.0)
    return g * left + (1.0 - g) * right


def _residual(u, x, h, a):
    f = np.empty_like(u)
    f[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (h * h) - 2.0 * u[1:-1] ** 3 - x[1:-1] * u[1:-1] - a
    f[0] = f[-1] = 0.0
    return f


def _newton(nu, x, u0, tol):
    """Damped Newton on the interior nodes; returns (u, iterations, residual, converged)."""
    h = x[1] - x[0]
    a = nu + 0.5
    u = u0.copy()
    f = _residual(u, x, h, a)
    norm = np.max(np.abs(f))
    inv_h2 = 1.0 / (h * h)
    n_int = len(x) - 2
    ab = np.empty((3, n_int))
    for it in range(1, MAX_NEWTON + 1):
        if norm <= tol:
            return u, it - 1, norm, True
        ab[0, 1:] = inv_h2
        ab[0, 0] = 0.0
        ab[1] = -2.0 * inv_h2 - 6.0 * u[1:-1] ** 2 - x[1:-1]
        ab[2, :-1] = inv_h2
        ab[2, -1] = 0.0
        step = solve_banded((1, 1), ab, -f[1:-1])
        lam = 1.0
        while lam >= MIN_DAMPING:
            trial = u.copy()
            trial[1:-1] += lam * step
            ft = _residual(trial, x, h, a)
            nt = np.max(np.abs(ft))
            if np.isfinite(nt) and nt < norm:
                break
            lam *= 0.5
        else:
            return u, it, norm, False
        u, f, norm = trial, ft, nt
        if np.max(np.abs(u)) > POLE_BOUND:
            return u, it, norm, False
    return u, MAX_NEWTON, norm, norm <= tol


def _derivative4(u, h):
    """Fourth-order finite-difference first derivative on a uniform grid."""
    d = np.empty_like(u)
    d[2:-2] = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * h)
    d[0] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * h)
    d[1] = (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) / (12.0 * h)
    d[-1] = (25.0 * u[-1] - 48.0 * u[-2] + 36.0 * u[-3] - 16.0 * u[-4] + 3.0 * u[-5]) / (12.0 * h)
    d[-2] = (3.0 * u[-1] + 10.0 * u[-2] - 18.0 * u[-3] + 6.0 * u[-4] - u[-5]) / (12.0 * h)
    return d


def hamiltonian(x, u, du, nu):
    z = du - u * u - 0.5 * x
    return 0.5 * z * (z + x) + z * u * u - nu * u


def _solve_direct(nu, xL, xR, N, tol, branch, richardson):
    uL, uR = boundary_values(nu, xL, xR, branch)
    x = np.linspace(xL, xR, N + 1)
    guess = initial_guess(nu, x, branch)
    guess[0], guess[-1] = uL, uR
    u, iters, res, ok = _newton(nu, x, guess, tol)
    if not ok:
        return x, u, iters, res, False, 0.0
    delta = 0.0
    if richardson:
        xf = np.linspace(xL, xR, 2 * N + 1)
        gf = np.interp(xf, x, u)
        gf[0], gf[-1] = uL, uR
        uf, it2, res2, ok = _newton(nu, xf, gf, tol)
        iters += it2
        res = max(res, res2)
        if not ok:
            return x, u, iters, res, False, 0.0
        delta = float(np.max(np.abs(uf[::2] - u)))
        u = (4.0 * uf[::2] - u) / 3.0
    return x, u, iters, res, True, delta


def _pole_failure(nu, x, u, iters, res, method):
    k = int(np.argmax(np.abs(u)))
    du = np.full_like(u, np.nan)
    return PIISolution(nu, x, u, du, np.full_like(u, np.nan), iters, float(res), True,
                       (float(x[k]),), method)


def _backlund_step(x, u, du, mu):
    """Solution data at mu + 1 from (u, u') at mu, plus real zeros of D."""
    d = du + u * u + 0.5 * x
    dd = 2.0 * u ** 3 + x * u + (mu + 0.5) + 2.0 * u * du + 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        un = -u - (mu + 1.0) / d
        dun = -du + (mu + 1.0) * dd / (d * d)
    poles = [_local_root(x, d, i) for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)[0]]
    return un, dun, poles


def _local_root(x, d, i):
    """Zero of d in [x_i, x_{i+1}] from a cubic spline through nearby nodes."""
    lo, hi = max(i - 3, 0), min(i + 5, len(x))
    roots = CubicSpline(x[lo:hi], d[lo:hi]).roots(extrapolate=False)
    inside = [r for r in roots if x[i] <= r <= x[i + 1]]
    if inside:
        return float(inside[0])
    w = d[i] / (d[i] - d[i + 1]) if d[i] != d[i + 1] else 0.0
    return float(x[i] + w * (x[i + 1] - x[i]))


def solve_hastings_mcleod(prob: PIIProblem) -> PIISolution:
    nu = float(prob.nu)
    if prob.strategy == "direct":
        x, u, iters, res, ok, delta = _solve_direct(nu, prob.xL, prob.xR, prob.N, prob.tol,
                                                    prob.branch, prob.richardson)
        if not ok:
            return _pole_failure(nu, x, u, iters, res, "direct")
        du = _derivative4(u, x[1] - x[0])
        return PIISolution(nu, x, u, du, hamiltonian(x, u, du, nu), iters, float(res), False, (),
                           "direct", delta)
    if is_natural(nu):
        base = solve_hastings_mcleod(PIIProblem(-round(nu) - 1.0, prob.xL, prob.xR, prob.N, prob.tol,
                                                strategy="direct", richardson=prob.richardson))
        if base.pole_flag:
            return base
        u, du = -base.u, -base.du
        return PIISolution(nu, base.x, u, du, hamiltonian(base.x, u, du, nu), base.newton_iters,
                           base.final_residual, False, (), "reflection", base.richardson_delta)
    if nu < 0.0:
        return solve_hastings_mcleod(PIIProblem(nu, prob.xL, prob.xR, prob.N, prob.tol,
                                                strategy="direct", richardson=prob.richardson))
    steps = math.ceil(nu)
    mu = nu - steps
    base = solve_hastings_mcleod(PIIProblem(mu, prob.xL, prob.xR, prob.N, prob.tol,
                                            strategy="direct", richardson=prob.richardson))
    if base.pole_flag:
        return base
    x, u, du = base.x, base.u, base.du
    poles = []
    for _ in range(steps):
        u, du, found = _backlund_step(x, u, du, mu)
        poles.extend(found)
        mu += 1.0
    return PIISolution(nu, x, u, du, hamiltonian(x, u, du, nu), base.newton_iters,
                       base.final_residual, bool(poles), tuple(sorted(poles)), "backlund",
                       base.richardson_delta)


def hamiltonian_profile(sol: PIISolution, nu: Optional[float] = None) -> list:
    """[(x_i, H_i)] recomposed from (u, u') with the given parameter."""
    nu = sol.nu if nu is None else nu
    H = hamiltonian(sol.x, sol.u, sol.du, nu)
    return list(zip(sol.x.tolist(), H.tolist()))


# --- checks -------------------------------------------------------------------

def _stencil_weights(offsets, at, order):
    """Weights w with sum_k w_k f(offsets_k) ~ f^(order)(at), exact for degree len-1."""
    offsets = np.asarray(offsets, dtype=float) - at
    m = len(offsets)
    v = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(v, rhs)


def continuous_residual(sol: PIISolution, nu: Optional[float] = None, degree: int = 7,
                        margin: float = 0.0):
    """Residual of the continuous ODE at cell midpoints.

    A degree-7 local Lagrange interpolant through the eight nearest nodes
    supplies u and u'' at each midpoint. Returns (midpoints, residuals).
    """
    nu = sol.nu if nu is None else nu
    x, u = sol.x, sol.u
    h = x[1] - x[0]
    half = (degree + 1) // 2
    offsets = np.arange(-half + 1, half + 1)
    w0 = _stencil_weights(offsets, 0.5, 0)
    w2 = _stencil_weights(offsets, 0.5, 2) / (h * h)
    idx = np.arange(half - 1, len(x) - half)
    stencil = u[idx[:, None] + offsets[None, :]]
    um = stencil @ w0
    u2 = stencil @ w2
    xm = x[idx] + 0.5 * h
    res = u2 - 2.0 * um ** 3 - xm * um - (nu + 0.5)
    keep = (xm >= x[0] + margin) & (xm <= x[-1] - margin)
    return xm[keep], res[keep]


def shooting_oracle(x0: float = 12.0, x_stop: float = -8.0, bracket=(0.5, 1.5),
                    iters: int = 60, rtol: float = 1e-13, report=(0.0,)):
    """Homogeneous case nu = -1/2: u'' = 2u^3 + xu with u ~ k Ai(x) at x0.

    Integrates backwards from x0 and bisects on k: too large a k blows up
    above sqrt(-x/2), too small a k turns negative; a trajectory that does
    neither is classified by its end value. Returns (k, {x: u(x)}).
    """
    ai, aip, _, _ = airy(x0)

    def rhs(x, y):
        return [y[1], 2.0 * y[0] ** 3 + x * y[0]]

    def blowup(x, y):
        return y[0] - (math.sqrt(max(-x, 0.0) / 2.0) + 1.0)
    blowup.terminal = True

    def negative(x, y):
        return y[0]
    negative.terminal = True

    def shoot(k, dense=False):
        return solve_ivp(rhs, (x0, x_stop), [k * ai, k * aip], method="DOP853", rtol=rtol,
                         atol=1e-300, events=(blowup, negative), dense_output=dense)

    lo, hi = bracket
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sol = shoot(mid)
        if sol.t_events[0].size:
            hi = mid
        elif sol.t_events[1].size:
            lo = mid
        elif sol.y[0, -1] > math.sqrt(-x_stop / 2.0):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * mid:
            break
    k = 0.5 * (lo + hi)
    sol = shoot(k, dense=True)
    values = {}
    for xr in report:
        if not min(sol.t) <= xr <= max(sol.t):
            raise PIIError(f"shooting trajectory does not reach x = {xr}")
        values[xr] = float(sol.sol(xr)[0])
    return k, values


def asymptotic_constants(sol: PIISolution, lo: float = 8.0, hi: Optional[float] = None):
    """Fitted constants C_u = max |u + (nu+1/2)/x| x^{5/2} and
    C_H = max |H + x^2/8 - (nu^2 - 1/4)/(2x)| x^3 over lo <= x <= hi."""
    hi = sol.x[-1] if hi is None else hi
    m = (sol.x >= lo) & (sol.x <= hi)
    x, u, H = sol.x[m], sol.u[m], sol.H[m]
    nu = sol.nu
    cu = float(np.max(np.abs(u + (nu + 0.5) / x) * x ** 2.5))
    ch = float(np.max(np.abs(H + x * x / 8.0 - (nu * nu - 0.25) / (2.0 * x)) * x ** 3))
    return cu, ch
