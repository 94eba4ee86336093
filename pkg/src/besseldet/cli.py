"""Command-line front end.

Tabular output is CSV on stdout; verdicts and summaries are JSON on stderr.
With ``--out-dir`` (or ``BESSELDET_OUTPUT_DIR``) the same content is also
written to files, together with a run manifest.

Exit codes: 0 success, 2 a verdict failed, 1 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bessel import bessel_i_derivs
from .extprec import ExtPrecError, ExtReal
from .orthopoly import op_derivatives, op_snapshot
from .painleve2 import PIIProblem, continuous_residual, solve_hastings_mcleod
from .piii_verify import PIII_TOL, SIGMA_TOL, check_point
from .scaling import REPORT_COLUMNS, SLOPE_BOUND, ScalingConfig, ScalingConfigError, run_ladder
from .toeplitz import SingularToeplitzError, build_moment_table, dlogdet, factorize
from .verify import determinism_verdict, report_json, run_all

EXIT_OK, EXIT_USAGE, EXIT_VERDICT = 0, 1, 2
OUTPUT_ENV = "BESSELDET_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for verdict failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, ExtReal):
        return v.to_decimal_string()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, ExtReal):
        return float(x)
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(type(x).__name__)


def _digits(args) -> Optional[int]:
    if args.digits is not None:
        if args.digits < 32:
            raise UsageError("--digits must be >= 32")
        return args.digits
    return {"auto": None, "dd": 32}[args.precision]


# --- subcommands ---------------------------------------------------------------

def cmd_bessel(args):
    rows = []
    for mu in args.mu:
        for t in args.t:
            i0, i1 = bessel_i_derivs(mu, t, 1)
            rows.append((mu, t, i0, i1))
    return _csv(("μ", "t", "I_μ", "I′_μ"), rows), None


def cmd_toeplitz(args):
    n, order = args.n, args.derivs
    tab = build_moment_table(args.nu, args.t, max(n, 1), _digits(args))
    fac = factorize(tab, n)
    ders = dlogdet(tab, n, order, fac) if order else []
    ders = list(ders) + [None] * (3 - len(ders))
    row = (n, args.nu, args.t, fac.logdet_abs, fac.sign, *ders)
    return _csv(("n", "ν", "t", "logdet", "sign", "L′", "L″", "L‴"), [row]), None


def cmd_op(args):
    tab = build_moment_table(args.nu, args.t, max(args.n, 1), _digits(args))
    snap = op_snapshot(args.nu, args.t, args.n, tab)
    dlog = None
    if args.derivs:
        snap = op_derivatives(snap)
        dlog = snap.dlog_pi0
    row = (args.n, args.nu, args.t, snap.pi0, snap.h, snap.gamma, snap.a_sub, snap.at_sub, dlog)
    header = ("n", "ν", "t", "π_n(0)", "h_n", "γ_n", "a_{n,n−1}", "ã_{n,n−1}", "d/dt log π_n(0)")
    return _csv(header, [row]), {"h_sign": snap.h_sign, "digits": snap.digits}


def cmd_pii(args):
    prob = PIIProblem(args.nu, args.xl, args.xr, args.grid, args.tol)
    sol = solve_hastings_mcleod(prob)
    rows = [(float(x), float(u), float(d), float(h))
            for x, u, d, h in zip(sol.x[::args.stride], sol.u[::args.stride],
                                  sol.du[::args.stride], sol.H[::args.stride])]
    summary = {
        "name": "pii", "nu": args.nu, "method": sol.method, "newton_iters": sol.newton_iters,
        "final_residual": sol.final_residual, "pole_flag": sol.pole_flag,
        "pole_locations": list(sol.pole_locations), "richardson_delta": sol.richardson_delta,
    }
    if args.xl < 0.0 < args.xr and sol.distance_to_pole(0.0) > 0.05:
        u0, du0, h0 = sol.at(0.0)
        summary.update({"u(0)": u0, "u'(0)": du0, "H(0)": h0})
    if not sol.pole_flag:
        _, r = continuous_residual(sol)
        summary["ode_residual"] = float(abs(r).max())
    summary["pass"] = bool(sol.final_residual <= prob.tol and np.all(np.isfinite(sol.u)))
    return _csv(("x", "u", "u′", "H"), rows), summary


def cmd_piii_check(args):
    rows, worst_p, worst_s = [], 0.0, 0.0
    for x in args.x_grid:
        p = check_point(args.nu, args.n, x, digits=_digits(args))
        worst_p, worst_s = max(worst_p, p.piii_rel), max(worst_s, p.sigma_rel)
        rows.append((x, p.alpha, p.piii_residual, p.sigma, p.sigma_residual))
    ok = worst_p <= args.piii_tol and worst_s <= args.sigma_tol
    verdict = {"name": "piii-check", "pass": ok,
               "metrics": {"nu": args.nu, "n": args.n, "max_piii_rel": worst_p,
                           "max_sigma_rel": worst_s, "piii_tol": args.piii_tol,
                           "sigma_tol": args.sigma_tol}}
    return _csv(("x", "α", "residual_PIII", "σ", "residual_σform"), rows), verdict


def cmd_scaling(args):
    cfg = ScalingConfig(args.nu, args.xi, tuple(args.ladder), args.xl, args.xr, args.grid)
    rep = run_ladder(cfg, jobs=args.jobs)
    verdict = rep.verdict(slope_bound=args.slope_bound)
    return _csv(REPORT_COLUMNS, [r.as_tuple() for r in rep.rows]), verdict


def cmd_verify_all(args):
    def progress(v, dt):
        status = "PASS" if v["pass"] else "FAIL"
        print(f"{status} {v['name']} ({dt:.1f} s)", file=sys.stderr)

    verdicts, _ = run_all(progress, jobs=args.jobs)
    first = report_json(verdicts)
    if not args.skip_determinism:
        again, _ = run_all(jobs=args.jobs)
        d = determinism_verdict(first, report_json(again))
        print(f"{'PASS' if d['pass'] else 'FAIL'} {d['name']}", file=sys.stderr)
        verdicts = verdicts + [d]
    return None, {"name": "verify-all", "pass": all(v["pass"] for v in verdicts),
                  "criteria": verdicts}


COMMANDS = {
    "bessel": cmd_bessel, "toeplitz": cmd_toeplitz, "op": cmd_op, "pii": cmd_pii,
    "piii-check": cmd_piii_check, "scaling": cmd_scaling, "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="besseldet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--out-dir", default=None,
                   help=f"also write CSV/JSON and a manifest here (default ${OUTPUT_ENV})")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def precision(sp):
        sp.add_argument("--precision", choices=("auto", "dd"), default="auto",
                        help="auto escalates beyond double-double when the matrix needs it")
        sp.add_argument("--digits", type=int, default=None, help="force a working precision")

    sp = sub.add_parser("bessel", help="I_mu(t) and I_mu'(t)")
    sp.add_argument("--mu", type=_floats, required=True)
    sp.add_argument("--t", type=_floats, required=True)

    sp = sub.add_parser("toeplitz", help="log D_{n,nu}(t) and its t-derivatives")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--derivs", type=int, choices=(0, 1, 2, 3), default=3)
    precision(sp)

    sp = sub.add_parser("op", help="orthogonal-polynomial scalars")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--derivs", action="store_true")
    precision(sp)

    sp = sub.add_parser("pii", help="Hastings-McLeod solution and Hamiltonian")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--xl", type=float, default=-12.0)
    sp.add_argument("--xr", type=float, default=12.0)
    sp.add_argument("--grid", type=int, default=4000)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--stride", type=int, default=1, help="emit every k-th grid node")

    sp = sub.add_parser("piii-check", help="Painleve III and sigma-form residuals")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--x-grid", type=_floats, default=[0.5, 2.0])
    sp.add_argument("--piii-tol", type=float, default=PIII_TOL)
    sp.add_argument("--sigma-tol", type=float, default=SIGMA_TOL)
    precision(sp)

    sp = sub.add_parser("scaling", help="double-scaling ladder")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--xi", type=float, default=0.0)
    sp.add_argument("--ladder", type=_ints, default=[8, 16, 32, 64])
    sp.add_argument("--xl", type=float, default=-12.0)
    sp.add_argument("--xr", type=float, default=12.0)
    sp.add_argument("--grid", type=int, default=4000)
    sp.add_argument("--slope-bound", type=float, default=SLOPE_BOUND)
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("verify-all", help="run the acceptance suite")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--skip-determinism", action="store_true",
                    help="run the suite once, without the repeat comparison")
    return p


def _write_outputs(out_dir: Path, command: str, csv_text, summary, args, elapsed):
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if csv_text is not None:
        path = out_dir / f"{command}.csv"
        path.write_text(csv_text, encoding="utf-8")
        paths.append(str(path))
    if summary is not None:
        path = out_dir / f"{command}.json"
        path.write_text(_json(summary) + "\n", encoding="utf-8")
        paths.append(str(path))
    params = {k: v for k, v in vars(args).items() if k not in ("out_dir",)}
    manifest = {"subcommand": command, "parameters": params, "version": __version__,
                "wall_time_s": elapsed, "outputs": paths}
    (out_dir / f"{command}.manifest.json").write_text(_json(manifest) + "\n", encoding="utf-8")


_NEGATIVE_LIST = re.compile(r"^-[0-9.]")


def _join_negative_values(argv: Sequence[str]) -> list:
    """Turn ``--mu -0.5,1`` into ``--mu=-0.5,1``; argparse would read it as an option."""
    out = []
    for tok in argv:
        if (out and _NEGATIVE_LIST.match(tok) and out[-1].startswith("--")
                and "=" not in out[-1] and "," in tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        if getattr(args, "stride", 1) < 1:
            raise UsageError("--stride must be >= 1")
        t0 = time.perf_counter()
        csv_text, summary = COMMANDS[args.command](args)
        elapsed = time.perf_counter() - t0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ExtPrecError, SingularToeplitzError, ScalingConfigError, ValueError) as exc:
        print(f"besseldet {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if csv_text is not None:
        sys.stdout.write(csv_text)
    if summary is not None:
        if args.command == "verify-all":
            sys.stdout.write(report_json(summary["criteria"]))
        else:
            print(_json(summary), file=sys.stderr)
    out = args.out_dir or os.environ.get(OUTPUT_ENV)
    if out:
        _write_outputs(Path(out), args.command, csv_text, summary, args, elapsed)
    if summary is not None and "pass" in summary and not summary["pass"]:
        return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
