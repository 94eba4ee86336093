import json
import os
import subprocess
import sys

import numpy as np
import pytest

from besseldet import _ddarray
from besseldet._backend import BACKEND, py

SCRIPT = """
import json
from besseldet._backend import BACKEND
from besseldet.toeplitz import build_moment_table, dlogdet, factorize
from besseldet.orthopoly import op_derivatives, op_snapshot
out = {"backend": BACKEND, "vals": []}
for nu, t, n in ((-0.7, 8.0, 10), (0.3, 5.0, 6), (0.0, 12.0, 12)):
    tab = build_moment_table(nu, t, n, digits=32)
    fac = factorize(tab, n)
    vals = [fac.logdet_abs] + dlogdet(tab, n, 3, fac)
    snap = op_derivatives(op_snapshot(nu, t, n, tab, fac))
    vals += [snap.pi0, snap.h, snap.dlog_pi0]
    out["vals"].append([[v.hi, v.lo] for v in vals])
print(json.dumps(out))
"""


def _run(backend):
    env = dict(os.environ, BESSELDET_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True,
                          env=env, check=True)
    return json.loads(proc.stdout)


def test_numpy_backend_matches_default():
    ref, alt = _run(BACKEND), _run("numpy")
    assert alt["backend"] == "numpy"
    for a, b in zip(ref["vals"], alt["vals"]):
        for (ah, al), (bh, bl) in zip(a, b):
            assert abs((ah - bh) + (al - bl)) <= 1e-26 * abs(ah)


def test_unknown_backend_is_rejected():
    env = dict(os.environ, BESSELDET_BACKEND="fortran")
    proc = subprocess.run([sys.executable, "-c", "import besseldet"], capture_output=True,
                          text=True, env=env)
    assert proc.returncode != 0
    assert "BESSELDET_BACKEND" in proc.stderr


def _dd_random(rng, shape, diag=0.0):
    hi = rng.standard_normal(shape)
    if diag:
        hi = hi + diag * np.eye(shape[0])
    lo = hi * rng.uniform(-1e-17, 1e-17, shape)
    return hi, lo


@pytest.mark.parametrize("n", [1, 5, 17])
def test_loop_and_vector_kernels_agree(n):
    rng = np.random.default_rng(n)
    ah, al = _dd_random(rng, (n, n), diag=n)
    bh, bl = _dd_random(rng, (n, 3))
    fl = py(_ddarray.lu_factor_loops)(ah.copy(), al.copy())
    fv = _ddarray.lu_factor_vec(ah.copy(), al.copy())
    for x, y in zip(fl, fv):
        np.testing.assert_allclose(np.asarray(x, dtype=float), np.asarray(y, dtype=float),
                                   rtol=1e-14, atol=1e-300)
    luh, lul, perm = fl[0], fl[1], fl[2]
    for loops, vec in ((_ddarray.lu_solve_loops, _ddarray.lu_solve_vec),
                       (_ddarray.lu_solve_t_loops, _ddarray.lu_solve_t_vec)):
        xl = py(loops)(luh, lul, perm, bh, bl)
        xv = vec(luh, lul, perm, bh, bl)
        np.testing.assert_allclose(xl[0] + xl[1], xv[0] + xv[1], rtol=1e-28 * n, atol=1e-300)
    ml = py(_ddarray.matmul_loops)(ah, al, bh, bl)
    mv = _ddarray.matmul_vec(ah, al, bh, bl)
    np.testing.assert_allclose(ml[0], mv[0], rtol=1e-15)
    np.testing.assert_allclose(ml[1], mv[1], rtol=1e-6, atol=1e-30 * np.abs(mv[0]).max())
