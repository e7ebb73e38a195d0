"""Green's kernels for u''' = phi with u(0) = u'(0) = u'(1) = 0.

The solution of the linear problem is ``u(t) = int_0^1 G0(t, s) phi(s) ds`` and
its first two derivatives use the kernels ``G1 = dG0/dt`` and ``G2 = dG1/dt``.
``G2`` jumps by one across the diagonal; ``G2STAR`` replaces the diagonal value
with the mean of the one-sided limits so composite quadrature rows stay
accurate across the jump.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class KernelId(enum.Enum):
    G0 = "G0"
    G1 = "G1"
    G2 = "G2"
    G2STAR = "G2*"


@dataclass(frozen=True)
class KernelBounds:
    """``max_t int_0^1 |K(t, s)| ds`` for K = G0, G1, G2."""

    m0: float = 1.0 / 12.0
    m1: float = 1.0 / 8.0
    m2: float = 1.0 / 2.0


_BOUNDS = KernelBounds()


def kernel_bounds() -> KernelBounds:
    return _BOUNDS


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}={value!r} outside [0, 1]")


def eval_kernel(kernel: KernelId, t: float, s: float) -> float:
    """Evaluate one kernel at a single point of the unit square.

    Branches are selected with ``s <= t`` (lower) versus ``s > t`` (upper).
    On the diagonal ``G2`` takes its lower value ``s``; ``G2STAR`` takes
    ``s - 1/2`` in the interior. At the corners (0, 0) and (1, 1) the jump sits
    on the boundary of [0, 1], so ``G2STAR`` uses the only one-sided limit
    that lies inside the interval: -1 at the origin, 1 at (1, 1).

    Raises:
        ValueError: if ``t`` or ``s`` lies outside [0, 1].
    """
    _check_unit("t", t)
    _check_unit("s", s)
    return float(kernel_values(kernel, t, s))


def kernel_values(kernel: KernelId, t, s) -> np.ndarray:
    """Elementwise kernel values with numpy broadcasting of ``t`` against ``s``.

    No domain check is performed; callers pass grid nodes.
    """
    T, S = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    lower = S <= T
    if kernel is KernelId.G0:
        return np.where(lower, 0.5 * S * (T * T - 2.0 * T + S), 0.5 * T * T * (S - 1.0))
    if kernel is KernelId.G1:
        return np.where(lower, S * (T - 1.0), T * (S - 1.0))
    if kernel is KernelId.G2:
        return np.where(lower, S, S - 1.0)
    if kernel is KernelId.G2STAR:
        mid = np.where(T == 0.0, -1.0, np.where(T == 1.0, 1.0, S - 0.5))
        return np.where(S == T, mid, np.where(S < T, S, S - 1.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def kernel_matrix(kernel: KernelId, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Kernel values on the outer product of node vectors ``t`` (rows) and ``s``."""
    return kernel_values(kernel, np.asarray(t, dtype=float)[:, None], np.asarray(s, dtype=float)[None, :])


def analytic_row_integral(kernel: KernelId, t: float) -> float:
    """Closed form of ``int_0^1 K(t, s) ds`` for K in {G0, G1, G2}.

    Used as an oracle for quadrature exactness. ``G2STAR`` differs from ``G2``
    only on a null set and has no separate analytic role, so it is rejected.
    """
    _check_unit("t", t)
    if kernel is KernelId.G0:
        return t**3 / 6.0 - t**2 / 4.0
    if kernel is KernelId.G1:
        return 0.5 * t * (t - 1.0)
    if kernel is KernelId.G2:
        return t - 0.5
    raise ValueError(f"no analytic row integral for {kernel.value}")
