"""Uniqueness hypotheses, a-priori iteration bounds and convergence orders."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .green import kernel_bounds
from .solver import Problem


@dataclass(frozen=True)
class UniquenessReport:
    """Contraction check ``q = L0*M0 + L1*M1 + L2*M2 < 1``.

    ``domain_box`` is ``(M0*M, M1*M, M2*M)``: the bounds on |u|, |u'|, |u''|
    inside which ``|f| <= M`` and the Lipschitz constants must hold.
    """

    m_bound: float
    lipschitz: tuple[float, float, float]
    q: float
    satisfied: bool
    domain_box: tuple[float, float, float]


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    k_iters: int
    error: float
    order: Optional[float] = None
    warning: Optional[str] = None


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def contraction_number(L0: float, L1: float, L2: float) -> float:
    b = kernel_bounds()
    return L0 * b.m0 + L1 * b.m1 + L2 * b.m2


def uniqueness_report(M: float, L0: float, L1: float, L2: float) -> UniquenessReport:
    M = _finite("M", M)
    L = tuple(_finite(name, v) for name, v in (("L0", L0), ("L1", L1), ("L2", L2)))
    if M <= 0:
        raise ValueError(f"M must be positive, got {M!r}")
    if min(L) < 0:
        raise ValueError(f"Lipschitz constants must be nonnegative, got {L!r}")
    b = kernel_bounds()
    q = contraction_number(*L)
    return UniquenessReport(
        m_bound=M,
        lipschitz=L,
        q=q,
        satisfied=q < 1.0,
        domain_box=(b.m0 * M, b.m1 * M, b.m2 * M),
    )


def apriori_bound(k: int, q: float, delta0: float) -> tuple[float, float, float, float]:
    """``p_k = q^k delta0 / (1 - q)`` and the bounds ``(M0 p_k, M1 p_k, M2 p_k)``.

    ``delta0`` is ``||phi_1 - phi_0||``; the bounds cap the distance of the
    k-th iterate (and its first two derivatives) to the exact solution.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if not 0.0 <= q < 1.0:
        raise ValueError(f"a-priori bound needs 0 <= q < 1, got q={q!r}")
    if delta0 < 0:
        raise ValueError("delta0 must be >= 0")
    p = q**k * delta0 / (1.0 - q)
    b = kernel_bounds()
    return p, b.m0 * p, b.m1 * p, b.m2 * p


def order_table(rows: Iterable[tuple[int, int, float]]) -> list[ConvergenceRow]:
    """Attach ``log2(e_{N/2} / e_N)`` to each row after the first.

    Rows must come with N doubling. A row whose error (or predecessor's error)
    is not positive gets no order and a warning string instead.
    """
    rows = list(rows)
    out: list[ConvergenceRow] = []
    for idx, (n, k, err) in enumerate(rows):
        err = float(err)
        if idx == 0:
            out.append(ConvergenceRow(int(n), int(k), err))
            continue
        prev_n, _, prev_err = rows[idx - 1]
        if n != 2 * prev_n:
            raise ValueError(f"N must double between rows, got {prev_n} -> {n}")
        if err > 0 and prev_err > 0:
            out.append(ConvergenceRow(int(n), int(k), err, math.log2(prev_err / err)))
        else:
            out.append(ConvergenceRow(int(n), int(k), err, None, "non-positive error, order undefined"))
    return out


def domain_lattice(M: float, samples_per_axis: int) -> tuple[np.ndarray, ...]:
    """Axis samples of ``D_M = [0,1] x [-M/12, M/12] x [-M/8, M/8] x [-M/2, M/2]``.

    Each axis gets ``samples_per_axis`` equal steps (``samples_per_axis + 1``
    points, endpoints included), so doubling the count refines the lattice.
    """
    b = kernel_bounds()
    s = samples_per_axis
    return (
        np.linspace(0.0, 1.0, s + 1),
        np.linspace(-b.m0 * M, b.m0 * M, s + 1),
        np.linspace(-b.m1 * M, b.m1 * M, s + 1),
        np.linspace(-b.m2 * M, b.m2 * M, s + 1),
    )


def estimate_constants(p: Problem, M: float, samples_per_axis: int = 16) -> tuple[float, float, float, float]:
    """Sampled ``sup|f|`` and per-axis Lipschitz constants on ``D_M``.

    Lipschitz estimates are the largest absolute divided differences between
    neighbouring lattice points along x, y and z with the other arguments
    fixed. Both are lower estimates of the true constants: a sampled q < 1 is
    evidence, not proof, that the contraction hypothesis holds. Prefer
    constants derived by hand when they are available.

    Raises:
        ValueError: for ``samples_per_axis < 2``, ``M <= 0``, or non-finite
            values of ``f`` on the lattice.
    """
    if samples_per_axis < 2:
        raise ValueError("samples_per_axis must be >= 2")
    if not M > 0:
        raise ValueError(f"M must be positive, got {M!r}")
    ts, xs, ys, zs = domain_lattice(M, samples_per_axis)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    steps = (xs[1] - xs[0], ys[1] - ys[0], zs[1] - zs[0])
    sup_f = 0.0
    lips = [0.0, 0.0, 0.0]
    for t in ts:
        T = np.full_like(X, t)
        with np.errstate(all="ignore"):
            F = np.broadcast_to(np.asarray(p.rhs(T, X, Y, Z), dtype=float), X.shape)
        if not np.all(np.isfinite(F)):
            raise ValueError(f"right-hand side is not finite on D_M at t={t:g}")
        sup_f = max(sup_f, float(np.max(np.abs(F))))
        for axis in range(3):
            dd = np.abs(np.diff(F, axis=axis)) / steps[axis]
            lips[axis] = max(lips[axis], float(np.max(dd)))
    return sup_f, lips[0], lips[1], lips[2]
