"""Composite trapezium and modified Simpson rows for kernel integrals.

A *row* is the quadrature approximation of ``int_0^1 K(t_i, s) phi(s) ds`` at
one grid node. The modified Simpson rule is the composite Simpson sum plus, on
odd nodes, the correction ``h/6 (g_{i-1} - 2 g_i + g_{i+1})`` with
``g_j = K(t_i, t_j) phi_j``. That correction swaps Simpson for two trapezia on
the panel that straddles the kernel kink at ``t_i``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .green import KernelId, kernel_matrix, kernel_values


class QuadratureMethod(enum.Enum):
    TRAPEZIUM = "trap"
    MODIFIED_SIMPSON = "simpson"


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [0, 1] into ``n`` subintervals."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"grid needs a positive integer number of subintervals, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @functools.cached_property
    def nodes(self) -> np.ndarray:
        # i / n keeps nodes[n] == 1.0 exactly for every n
        t = np.arange(self.n + 1) / self.n
        t.setflags(write=False)
        return t

    def require_even(self) -> None:
        if self.n % 2:
            raise ValueError(f"modified Simpson needs an even number of subintervals, got N={self.n}")


@dataclass
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n + 1,):
            raise ValueError(
                f"grid function needs {self.grid.n + 1} values, got shape {self.values.shape}"
            )

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self) -> int:
        return len(self.values)


def trap_weights(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    rho = np.ones(n + 1)
    rho[0] = rho[-1] = 0.5
    return rho


def simpson_weights(n: int) -> np.ndarray:
    if n < 2 or n % 2:
        raise ValueError(f"Simpson weights need an even n >= 2, got {n}")
    rho = np.full(n + 1, 2.0 / 3.0)
    rho[1::2] = 4.0 / 3.0
    rho[0] = rho[-1] = 1.0 / 3.0
    return rho


def weights(method: QuadratureMethod, n: int) -> np.ndarray:
    if method is QuadratureMethod.TRAPEZIUM:
        return trap_weights(n)
    return simpson_weights(n)


def _check_row_args(kernel: KernelId, i: int, phi: GridFunction) -> Grid:
    if kernel is KernelId.G2:
        raise ValueError("quadrature rows use G2STAR, not the raw G2 kernel")
    grid = phi.grid
    if not 0 <= i <= grid.n:
        raise IndexError(f"node index {i} outside 0..{grid.n}")
    return grid


def _sum(terms: np.ndarray, compensated: bool) -> float:
    if compensated:
        return math.fsum(terms)
    return float(np.sum(terms))


def _weighted_terms(kernel: KernelId, i: int, phi: GridFunction, rho: np.ndarray) -> np.ndarray:
    grid = phi.grid
    k_row = kernel_matrix(kernel, grid.nodes[i : i + 1], grid.nodes)[0]
    return grid.h * rho * k_row * phi.values


def trap_row(kernel: KernelId, i: int, phi: GridFunction, compensated: bool = False) -> float:
    """Trapezium approximation of ``int_0^1 K(t_i, s) phi(s) ds``."""
    grid = _check_row_args(kernel, i, phi)
    return _sum(_weighted_terms(kernel, i, phi, trap_weights(grid.n)), compensated)


def simpson_mod_row(kernel: KernelId, i: int, phi: GridFunction, compensated: bool = False) -> float:
    """Modified Simpson approximation of ``int_0^1 K(t_i, s) phi(s) ds``.

    Even ``i`` gives the plain composite Simpson sum; odd ``i`` adds the
    second-difference correction on the straddling panel.
    """
    grid = _check_row_args(kernel, i, phi)
    grid.require_even()
    plain = _sum(_weighted_terms(kernel, i, phi, simpson_weights(grid.n)), compensated)
    if i % 2 == 0:
        return plain
    t = grid.nodes
    g = kernel_values(kernel, t[i], t[i - 1 : i + 2]) * phi.values[i - 1 : i + 2]
    return plain + grid.h / 6.0 * (g[0] - 2.0 * g[1] + g[2])


def row(method: QuadratureMethod, kernel: KernelId, i: int, phi: GridFunction, compensated: bool = False) -> float:
    if method is QuadratureMethod.TRAPEZIUM:
        return trap_row(kernel, i, phi, compensated)
    return simpson_mod_row(kernel, i, phi, compensated)


def row_block(method: QuadratureMethod, kernel: KernelId, grid: Grid, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows ``start:stop`` of the matrix ``W`` with ``W @ phi`` = all rows at once.

    Row ``i`` of ``W`` holds the coefficients multiplying ``phi_j`` in
    :func:`row` for node ``i``.
    """
    if kernel is KernelId.G2:
        raise ValueError("quadrature rows use G2STAR, not the raw G2 kernel")
    if method is QuadratureMethod.MODIFIED_SIMPSON:
        grid.require_even()
    stop = grid.n + 1 if stop is None else stop
    t = grid.nodes
    h = grid.h
    rho = weights(method, grid.n)
    W = h * rho[None, :] * kernel_matrix(kernel, t[start:stop], t)
    if method is QuadratureMethod.MODIFIED_SIMPSON:
        odd = np.arange(start + (start % 2 == 0), stop, 2)
        odd = odd[odd < grid.n]
        r = odd - start
        for offset, coef in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            cols = odd + offset
            W[r, cols] += coef * h / 6.0 * kernel_values(kernel, t[odd], t[cols])
    return W


@functools.lru_cache(maxsize=12)
def row_operator(method: QuadratureMethod, kernel: KernelId, grid: Grid) -> np.ndarray:
    """Full ``(N+1) x (N+1)`` row matrix, cached and read-only."""
    W = row_block(method, kernel, grid)
    W.setflags(write=False)
    return W
