"""The four benchmark problems with native right-hand sides and reference tables.

Each example is also shipped as a ``.prob`` file (see :func:`example_path`).
Reference tables hold the published rows ``(N, K, error_trap, error_simpson)``;
Example 4 has no exact solution and only iteration counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .solver import Problem


@dataclass(frozen=True)
class ReferenceTable:
    tol: float
    # (N, K, error_trap, error_simpson); None where the table has no entry
    rows: tuple[tuple[int, int, Optional[float], Optional[float]], ...]
    label: str = ""


@dataclass(frozen=True)
class NamedExample:
    id: int
    problem: Problem
    table_refs: tuple[ReferenceTable, ...] = field(default_factory=tuple)


def _ex1_rhs(t, x, y, z):
    # forcing = u*''' - t^4 u* + u*^2 with u* = (t-1) sin t, u*''' = -3 sin t - (t-1) cos t;
    # term order matches ex1.prob so file and closure agree bit for bit
    return (
        t**4 * x - x**2
        - 3.0 * np.sin(t) - (t - 1.0) * np.cos(t)
        - t**4 * (t - 1.0) * np.sin(t) + ((t - 1.0) * np.sin(t)) ** 2
    )


def _ex1_exact(t):
    t = np.asarray(t, dtype=float)
    return (t - 1.0) * np.sin(t)


def _ex2_rhs(t, x, y, z):
    return -t * z - 6.0 * t**2 + 3.0 * t - 6.0


def _ex2_exact(t):
    t = np.asarray(t, dtype=float)
    return t**2 * (1.5 - t)


def _ex3_rhs(t, x, y, z):
    return x**2 + y - np.exp(2.0 * t)


def _ex3_exact(t):
    return np.exp(np.asarray(t, dtype=float))


def _ex4_rhs(t, x, y, z):
    return -np.exp(x) - np.exp(y) - z**2 / 10.0 + 0.0 * t


_EX1_TABLES = (
    ReferenceTable(1e-4, (
        (8, 3, 9.9153e-04, 9.7143e-04),
        (16, 3, 2.4646e-04, 1.3101e-04),
        (32, 3, 6.0906e-05, 1.6020e-05),
        (64, 3, 1.4563e-05, 1.2587e-06),
        (128, 3, 2.9796e-06, 8.8553e-07),
        (256, 3, 4.3187e-07, 8.8165e-07),
        (512, 3, 6.7435e-07, 8.8118e-07),
        (1024, 3, 8.2295e-07, 8.8112e-07),
    ), "ex1 tol=1e-4"),
    ReferenceTable(1e-6, (
        (8, 4, 9.99237e-04, 9.7223e-04),
        (16, 4, 2.4734e-04, 1.3189e-04),
        (32, 4, 6.1802e-05, 1.6915e-05),
        (64, 4, 1.5462e-05, 2.1492e-06),
        (128, 4, 3.8797e-06, 2.8688e-07),
        (256, 4, 9.8437e-07, 5.2749e-08),
        (512, 4, 2.6054e-07, 2.3446e-08),
        (1024, 4, 7.9583e-08, 1.9786e-08),
    ), "ex1 tol=1e-6"),
    ReferenceTable(1e-10, (
        (8, 7, 9.9235e-04, 9.7222e-04),
        (16, 7, 2.4732e-04, 1.3187e-04),
        (32, 7, 6.1782e-05, 1.6896e-05),
        (64, 7, 1.5443e-05, 2.1301e-06),
        (128, 7, 3.8605e-06, 2.6774e-07),
        (256, 7, 9.6511e-07, 3.3544e-08),
        (512, 7, 2.4128e-07, 4.1977e-09),
        (1024, 7, 6.0319e-08, 5.2483e-10),
    ), "ex1 tol=1e-10"),
)

_EX2_TABLES = (
    ReferenceTable(1e-4, (
        (8, 6, 0.0078, 9.7662e-04),
        (16, 6, 0.0020, 1.2215e-04),
        (32, 6, 4.8837e-04, 1.5345e-05),
        (64, 6, 1.2216e-04, 1.9936e-06),
        (128, 6, 3.0604e-05, 3.2471e-07),
        (256, 6, 7.7157e-06, 1.1612e-07),
        (512, 6, 1.9937e-06, 9.0051e-08),
        (1024, 6, 5.6316e-07, 8.6794e-08),
    ), "ex2 tol=1e-4"),
    ReferenceTable(1e-10, (
        (8, 11, 0.0078, 2.0650e-13),
        (16, 11, 0.0020, 2.6790e-13),
        (32, 11, 4.8828e-04, 2.6279e-13),
        (64, 11, 1.2207e-04, 2.5890e-13),
        (128, 11, 3.0518e-05, 2.5790e-13),
        (256, 11, 7.6294e-06, 2.5802e-13),
    ), "ex2 tol=1e-10"),
)

_EX3_TABLES = (
    ReferenceTable(1e-4, (
        (16, 8, 5.4059e-04, 5.2038e-05),
        (32, 8, 1.3655e-04, 1.4204e-05),
        (64, 8, 3.5582e-05, 4.9811e-06),
        (128, 8, 1.0341e-05, 2.6902e-06),
        (256, 8, 4.0312e-06, 2.1184e-06),
        (512, 8, 2.4537e-06, 1.9755e-06),
    ), "ex3 tol=1e-4"),
    ReferenceTable(1e-6, (
        (16, 11, 5.3866e-04, 5.0053e-05),
        (32, 11, 1.3460e-04, 1.2241e-05),
        (64, 11, 3.3627e-05, 3.0231e-06),
        (128, 11, 8.3853e-06, 7.3348e-07),
        (256, 11, 2.0750e-06, 1.6199e-07),
        (512, 11, 4.9743e-07, 1.9180e-08),
    ), "ex3 tol=1e-6"),
)

_EX4_TABLES = (
    ReferenceTable(1e-10, tuple((n, 15, None, None) for n in (8, 16, 32, 64)), "ex4 tol=1e-10"),
)


def _build(id: int) -> NamedExample:
    if id == 1:
        p = Problem(_ex1_rhs, 0.0, -1.0, float(np.sin(1.0)), _ex1_exact, M=7.0)
        return NamedExample(1, p, _EX1_TABLES)
    if id == 2:
        p = Problem(_ex2_rhs, 0.0, 0.0, 0.0, _ex2_exact, M=9.0, L0=0.0, L1=0.0, L2=1.0)
        return NamedExample(2, p, _EX2_TABLES)
    if id == 3:
        p = Problem(_ex3_rhs, 1.0, 1.0, float(np.e), _ex3_exact, M=10.0)
        return NamedExample(3, p, _EX3_TABLES)
    if id == 4:
        p = Problem(
            _ex4_rhs, 0.0, 0.0, 0.0, None,
            M=3.0, L0=float(np.exp(0.25)), L1=float(np.exp(0.375)), L2=0.3,
        )
        return NamedExample(4, p, _EX4_TABLES)
    raise KeyError(f"unknown example id {id!r}; expected 1..4")


def get_example(id: int) -> NamedExample:
    return _build(id)


def example_path(id: int) -> Path:
    """Path of the shipped ``exN.prob`` file."""
    if id not in (1, 2, 3, 4):
        raise KeyError(f"unknown example id {id!r}; expected 1..4")
    return Path(str(resources.files("thirdbvp") / "problems" / f"ex{id}.prob"))
