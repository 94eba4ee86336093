"""Compare the numba and pure-numpy kernel backends.

Kernel timings call both implementations in one process (the ``*_loops``
kernels are the numba-compiled ones when numba is available). The end-to-end
timing runs a double-double determinant workload in two subprocesses with
``BESSELDET_BACKEND`` set to each value.

    python3 benchmarks/bench_backends.py [--n 24] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from besseldet import _ddarray, quadrature
from besseldet._backend import USE_NUMBA

WORKLOAD = """
import time
from besseldet.toeplitz import build_moment_table, dlogdet, factorize
t0 = time.perf_counter()
for nu in (-0.7, 0.0, 0.3, 1.0):
    tab = build_moment_table(nu, 10.0, {n}, digits=32)
    fac = factorize(tab, {n})
    dlogdet(tab, {n}, 3, fac)
print(time.perf_counter() - t0)
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernels(n, repeat):
    rng = np.random.default_rng(1)
    ah = rng.standard_normal((n, n)) + n * np.eye(n)
    al = ah * 1e-17
    bh, bl = rng.standard_normal((n, n)), np.zeros((n, n))
    rows = []
    for name, loops, vec, args in [
        ("lu_factor", _ddarray.lu_factor_loops, _ddarray.lu_factor_vec, (ah, al)),
        ("matmul", _ddarray.matmul_loops, _ddarray.matmul_vec, (ah, al, bh, bl)),
        ("k_integral", quadrature.k_integral_loops, quadrature.k_integral_vec,
         (3.25, 0.0, float(n), 0.0)),
    ]:
        loops(*args)  # compile outside the timing
        rows.append((name, best(lambda: loops(*args), repeat), best(lambda: vec(*args), repeat)))
    perm = _ddarray.lu_factor_loops(ah, al)
    luh, lul, p = perm[0], perm[1], perm[2]
    _ddarray.lu_solve_loops(luh, lul, p, bh, bl)
    rows.append(("lu_solve", best(lambda: _ddarray.lu_solve_loops(luh, lul, p, bh, bl), repeat),
                 best(lambda: _ddarray.lu_solve_vec(luh, lul, p, bh, bl), repeat)))
    return rows


def end_to_end(n):
    out = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, BESSELDET_BACKEND=backend)
        # first run warms the numba cache; the second is timed
        for _ in range(2):
            res = subprocess.run([sys.executable, "-c", WORKLOAD.format(n=n)], env=env,
                                 capture_output=True, text=True, check=True)
        out[backend] = float(res.stdout.strip())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    label = "numba" if USE_NUMBA else "numpy (numba unavailable)"
    print(f"loops kernels compiled with: {label}")
    print(f"{'kernel':<12} {'loops [ms]':>12} {'numpy [ms]':>12} {'ratio':>8}")
    for name, a, b in kernels(args.n, args.repeat):
        print(f"{name:<12} {a * 1e3:12.3f} {b * 1e3:12.3f} {b / a:8.2f}")
    if not args.skip_end_to_end:
        e2e = end_to_end(args.n)
        print(f"end-to-end dd workload (n={args.n}): numba {e2e['numba']:.3f} s, "
              f"numpy {e2e['numpy']:.3f} s")


if __name__ == "__main__":
    main()
