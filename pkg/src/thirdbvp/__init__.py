"""Green's-function fixed-point solver for third-order two-point BVPs.

Solves ``u''' = f(t, u, u', u'')`` on [0, 1] with ``u(0) = c1``,
``u'(0) = c2``, ``u'(1) = c3`` by Picard iteration on ``phi = u'''``, using a
trapezium (second order) or modified Simpson (third order) discretisation of
the Green's integrals.
"""

from .analysis import (
    ConvergenceRow,
    UniquenessReport,
    apriori_bound,
    estimate_constants,
    order_table,
    uniqueness_report,
)
from .examples import NamedExample, example_path, get_example
from .green import KernelBounds, KernelId, analytic_row_integral, eval_kernel, kernel_bounds
from .problemspec import parse, read_problem_file, tokenize
from .quadrature import Grid, GridFunction, QuadratureMethod, simpson_mod_row, simpson_weights, trap_row, trap_weights
from .solver import (
    NonFiniteIterate,
    NotConverged,
    Problem,
    SolveResult,
    SolverConfig,
    homogenize,
    initial_phi,
    iterate_once,
    max_norm_diff,
    solve,
)

__version__ = "0.1.0"
