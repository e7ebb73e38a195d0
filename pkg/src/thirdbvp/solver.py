"""Fixed-point iteration for u''' = f(t, u, u', u'') on [0, 1].

Boundary data ``u(0) = c1, u'(0) = c2, u'(1) = c3``. The problem is first
shifted to zero boundary data by a quadratic ``P2``; then, starting from
``Phi_0 = f(t, 0, 0, 0)``, each step integrates ``Phi_k`` against the Green's
kernels to get ``(U_k, Y_k, Z_k)`` and sets ``Phi_{k+1} = f(t, U_k, Y_k, Z_k)``.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional

import numpy as np

from .green import KernelId
from .quadrature import Grid, GridFunction, QuadratureMethod, row_block, row_operator

logger = logging.getLogger(__name__)

Rhs = Callable[..., "np.ndarray | float"]

# above this size rows are rebuilt blockwise on every sweep instead of cached
_DENSE_LIMIT = 2048
_BLOCK_ROWS = 256
_DIVERGENCE_FACTOR = 1e6


class SolverError(Exception):
    pass


class NonFiniteIterate(SolverError):
    """The right-hand side produced inf/nan, i.e. the iterate left the domain of ``f``."""

    def __init__(self, node: int, iteration: int | None, t: float):
        self.node = node
        self.iteration = iteration
        self.t = t
        where = f"node {node} (t={t:.17g})"
        when = "initial guess" if iteration in (None, 0) else f"iteration {iteration}"
        super().__init__(f"non-finite right-hand side at {where}, {when}")


class NotConverged(SolverError):
    def __init__(self, result: "SolveResult", reason: str):
        self.result = result
        self.reason = reason
        super().__init__(reason)


@dataclass
class Problem:
    """A third-order two-point BVP.

    ``rhs(t, x, y, z)`` receives numpy arrays of equal shape (x, y, z stand for
    u, u', u'') and must return an array of that shape or a scalar.
    ``exact`` is an optional vectorized exact solution used for error studies.
    ``M``, ``L0``, ``L1``, ``L2`` are optional bound and Lipschitz constants.
    """

    rhs: Rhs
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    exact: Optional[Callable[[np.ndarray], np.ndarray]] = None
    M: Optional[float] = None
    L0: Optional[float] = None
    L1: Optional[float] = None
    L2: Optional[float] = None

    @property
    def homogeneous(self) -> bool:
        return self.c1 == 0.0 and self.c2 == 0.0 and self.c3 == 0.0

    @property
    def lipschitz(self) -> Optional[tuple[float, float, float]]:
        if None in (self.L0, self.L1, self.L2):
            return None
        return (self.L0, self.L1, self.L2)


@dataclass(frozen=True)
class SolverConfig:
    n: int
    tol: float = 1e-10
    max_iter: int = 100
    method: QuadratureMethod = QuadratureMethod.TRAPEZIUM

    def __post_init__(self):
        Grid(self.n)
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.method is QuadratureMethod.MODIFIED_SIMPSON and self.n % 2:
            raise ValueError(f"modified Simpson needs an even N, got N={self.n}")

    @property
    def grid(self) -> Grid:
        return Grid(self.n)


@dataclass
class SolveResult:
    """Grid approximations of u, u', u'', u''' and the iteration record.

    ``u``, ``y``, ``z`` come from the last quadrature sweep, i.e. they were
    computed from ``Phi_{K-1}``; ``phi`` is ``Phi_K``.
    """

    u: GridFunction
    y: GridFunction
    z: GridFunction
    phi: GridFunction
    iterations: int
    residuals: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def error(self, exact: Callable[[np.ndarray], np.ndarray]) -> float:
        """Max-norm distance of ``u`` to an exact solution on the nodes."""
        return float(np.max(np.abs(self.u.values - np.asarray(exact(self.t), dtype=float))))


@dataclass
class Iterate:
    """One sweep: ``(u, y, z)`` integrate ``phi`` and ``phi_next = f(t, u, y, z)``."""

    k: int
    u: np.ndarray
    y: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    phi_next: np.ndarray
    residual: float


def boundary_polynomial(c1: float, c2: float, c3: float) -> tuple[float, float, float]:
    """Coefficients ``(a0, a1, a2)`` of ``P2 = a0 + a1 t + a2 t^2``.

    ``P2(0) = c1``, ``P2'(0) = c2``, ``P2'(1) = c3``.
    """
    return (c1, c2, 0.5 * (c3 - c2))


def _p2_values(c1: float, c2: float, c3: float, t: np.ndarray):
    a0, a1, a2 = boundary_polynomial(c1, c2, c3)
    p = a0 + t * (a1 + a2 * t)
    # written this way P2'(0) == c2 and P2'(1) == c3 hold bit for bit
    dp = c2 * (1.0 - t) + c3 * t
    ddp = np.full_like(np.asarray(t, dtype=float), 2.0 * a2)
    return p, dp, ddp


def homogenize(p: Problem) -> tuple[Problem, tuple[float, float, float]]:
    """Shift ``u = v + P2`` so the returned problem has zero boundary data."""
    c1, c2, c3 = p.c1, p.c2, p.c3
    coeffs = boundary_polynomial(c1, c2, c3)
    if p.homogeneous:
        return p, coeffs
    f = p.rhs

    def rhs(t, x, y, z):
        q, dq, ddq = _p2_values(c1, c2, c3, t)
        return f(t, x + q, y + dq, z + ddq)

    exact = None
    if p.exact is not None:
        u_star = p.exact

        def exact(t):
            return np.asarray(u_star(t), dtype=float) - _p2_values(c1, c2, c3, np.asarray(t, dtype=float))[0]

    return replace(p, rhs=rhs, c1=0.0, c2=0.0, c3=0.0, exact=exact), coeffs


def _eval_rhs(p: Problem, t: np.ndarray, x, y, z, iteration: int | None) -> np.ndarray:
    with np.errstate(all="ignore"):
        values = np.asarray(p.rhs(t, x, y, z), dtype=float)
    values = np.array(np.broadcast_to(values, t.shape), dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        node = int(np.argmax(bad))
        raise NonFiniteIterate(node, iteration, float(t[node]))
    return values


def initial_phi(p: Problem, grid: Grid) -> GridFunction:
    """``Phi_0(t_i) = f(t_i, 0, 0, 0)``."""
    t = grid.nodes
    zero = np.zeros_like(t)
    return GridFunction(grid, _eval_rhs(p, t, zero, zero, zero, 0))


class _Sweep:
    """Applies the three row operators of one method to a whole grid function."""

    _kernels = (KernelId.G0, KernelId.G1, KernelId.G2STAR)

    def __init__(self, method: QuadratureMethod, grid: Grid):
        if method is QuadratureMethod.MODIFIED_SIMPSON:
            grid.require_even()
        self.method = method
        self.grid = grid
        self.dense = grid.n <= _DENSE_LIMIT
        if self.dense:
            self.ops = [row_operator(method, k, grid) for k in self._kernels]

    def __call__(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.dense:
            return tuple(W @ phi for W in self.ops)
        size = self.grid.n + 1
        out = [np.empty(size) for _ in self._kernels]
        for start in range(0, size, _BLOCK_ROWS):
            stop = min(start + _BLOCK_ROWS, size)
            for dst, k in zip(out, self._kernels):
                dst[start:stop] = row_block(self.method, k, self.grid, start, stop) @ phi
        return tuple(out)


@functools.lru_cache(maxsize=4)
def _sweep(method: QuadratureMethod, grid: Grid) -> _Sweep:
    return _Sweep(method, grid)


def iterate_once(p: Problem, phi_k: GridFunction, method: QuadratureMethod, iteration: int | None = None):
    """One quadrature sweep followed by the right-hand-side update.

    Returns ``(u, y, z, phi_next)`` as grid functions. ``p`` must be
    homogeneous.
    """
    grid = phi_k.grid
    u, y, z = _sweep(method, grid)(phi_k.values)
    nxt = _eval_rhs(p, grid.nodes, u, y, z, iteration)
    return (GridFunction(grid, u), GridFunction(grid, y), GridFunction(grid, z), GridFunction(grid, nxt))


def iterates(p: Problem, grid: Grid, method: QuadratureMethod) -> Iterator[Iterate]:
    """Unbounded stream of sweeps for a homogeneous problem, starting at ``Phi_0``."""
    if not p.homogeneous:
        raise ValueError("iterates() needs a homogeneous problem; call homogenize() first")
    sweep = _sweep(method, grid)
    t = grid.nodes
    phi = initial_phi(p, grid).values
    k = 0
    while True:
        u, y, z = sweep(phi)
        nxt = _eval_rhs(p, t, u, y, z, k + 1)
        res = float(np.max(np.abs(nxt - phi)))
        yield Iterate(k, u, y, z, phi, nxt, res)
        phi = nxt
        k += 1


def max_norm_diff(a: GridFunction, b: GridFunction) -> float:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: N={a.grid.n} vs N={b.grid.n}")
    return float(np.max(np.abs(a.values - b.values)))


def solve(p: Problem, cfg: SolverConfig) -> SolveResult:
    """Iterate until ``max|Phi_{k+1} - Phi_k| <= tol`` on the grid.

    ``iterations`` counts right-hand-side updates (``Phi_0 -> Phi_1`` is the
    first). The returned ``u, y, z`` include ``P2`` and its derivatives, so the
    boundary values are reproduced exactly.

    Raises:
        NotConverged: ``max_iter`` reached, or residuals grew by a factor 1e6
            over the first one. The exception carries the partial result.
        NonFiniteIterate: ``f`` returned inf/nan at some node.
    """
    grid = cfg.grid
    hp, _ = homogenize(p)
    q, dq, ddq = _p2_values(p.c1, p.c2, p.c3, grid.nodes)
    residuals: list[float] = []
    reason = None
    for it in iterates(hp, grid, cfg.method):
        residuals.append(it.residual)
        logger.debug("iteration %d residual %.3e", it.k + 1, it.residual)
        if it.residual <= cfg.tol:
            break
        if it.residual > _DIVERGENCE_FACTOR * residuals[0]:
            reason = f"iteration diverged: residual {it.residual:.3e} after {it.k + 1} steps"
            break
        if it.k + 1 >= cfg.max_iter:
            reason = f"no convergence to tol={cfg.tol:g} in {cfg.max_iter} iterations (residual {it.residual:.3e})"
            break
    result = SolveResult(
        u=GridFunction(grid, it.u + q),
        y=GridFunction(grid, it.y + dq),
        z=GridFunction(grid, it.z + ddq),
        phi=GridFunction(grid, it.phi_next),
        iterations=it.k + 1,
        residuals=residuals,
        converged=reason is None,
    )
    if reason is not None:
        raise NotConverged(result, reason)
    return result
