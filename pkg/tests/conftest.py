import mpmath
import pytest

from besseldet.extprec import ExtReal


def to_mp(x):
    if isinstance(x, ExtReal):
        return mpmath.mpf(x.hi) + mpmath.mpf(x.lo)
    return mpmath.mpf(x)


def rel_err(got, want) -> float:
    """Relative error of ``got`` against a reference given as str/mpf/ExtReal."""
    with mpmath.workdps(60):
        w = mpmath.mpf(want) if isinstance(want, str) else to_mp(want)
        return float(abs(to_mp(got) - w) / abs(w))


@pytest.fixture(autouse=True)
def _mp_precision():
    # tests that use mpmath as an oracle always run at a declared precision
    with mpmath.workdps(60):
        yield
