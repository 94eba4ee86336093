"""Bessel-entry Toeplitz determinants, their orthogonal polynomials, and
Painleve II/III checks in extended precision."""

from .extprec import ExtReal
from .bessel import bessel_i, bessel_i_oracle, bessel_k_integral
from .toeplitz import MomentTable, build_moment_table, dlogdet, factorize, logdet
from .orthopoly import op_derivatives, op_snapshot
from .painleve2 import PIIProblem, PIISolution, solve_hastings_mcleod
from .scaling import ScalingConfig, run_ladder, sweep_xi

__version__ = "0.1.0"

__all__ = [
    "ExtReal", "bessel_i", "bessel_i_oracle", "bessel_k_integral", "MomentTable",
    "build_moment_table", "dlogdet", "factorize", "logdet", "op_derivatives", "op_snapshot",
    "PIIProblem", "PIISolution", "solve_hastings_mcleod", "ScalingConfig", "run_ladder",
    "sweep_xi", "__version__",
]
