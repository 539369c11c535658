"""Exact Sobolev seminorms, grid-sampled uniform norms, realization equality.

For a bias-free shallow network the Jacobian is constant on every linear
region, so the seminorm ``ess sup_x |D R(x)|_inf`` is a finite maximum over
attainable sign patterns of ``|sum_{s_i = 1} c_i a_i^T|_inf``.  The matrix
norm is the entrywise maximum absolute value throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, UsageError
from .network import ShallowNet, SignPattern, evaluate
from .regions import attainable_patterns

MAX_GRID_POINTS = 10**8
EQUALITY_RTOL = 1e-9


@dataclass(frozen=True)
class SeminormBreakdown:
    value: float
    argmax_pattern: SignPattern
    per_pattern: dict = field(repr=False)

    @property
    def cells(self) -> int:
        return len(self.per_pattern)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "argmax_pattern": list(self.argmax_pattern),
            "cells": self.cells,
        }


def _breakdown(per_pattern: dict) -> SeminormBreakdown:
    # Ties resolve to the lexicographically smallest pattern.
    argmax = max(per_pattern, key=lambda p: (per_pattern[p], [-b for b in p]))
    return SeminormBreakdown(per_pattern[argmax], argmax, per_pattern)


def seminorm(net: ShallowNet) -> SeminormBreakdown:
    """``|R(net)|_{W^{1,inf}}`` by exhaustive enumeration of linear regions."""
    per_pattern = {}
    for cell in attainable_patterns(net.A):
        s = np.asarray(cell.pattern, dtype=np.float64)
        per_pattern[cell.pattern] = float(np.abs((net.C * s) @ net.A).max())
    return _breakdown(per_pattern)


def sobolev_distance(p: ShallowNet, q: ShallowNet) -> SeminormBreakdown:
    """``|R(p) - R(q)|_{W^{1,inf}}`` over the joint arrangement of both networks.

    This is the seminorm of ``concat(p, negate(q))``; the two Jacobians are
    summed separately so that ``p == q`` gives exactly zero.  Patterns in
    the breakdown list the bits of ``p``'s neurons followed by those of ``q``.
    """
    if p.d != q.d or p.D != q.D:
        raise UsageError("sobolev_distance needs equal input and output dimensions")
    per_pattern = {}
    for cell in attainable_patterns(np.vstack([p.A, q.A])):
        s = np.asarray(cell.pattern, dtype=np.float64)
        gap = (p.C * s[: p.m]) @ p.A - (q.C * s[p.m:]) @ q.A
        per_pattern[cell.pattern] = float(np.abs(gap).max())
    return _breakdown(per_pattern)


def _grid_points(B: float, grid: int, d: int, chunk: int):
    axis = np.linspace(-B, B, grid)
    total = grid**d
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.empty((idx.size, d), dtype=np.int64)
        rest = idx
        for j in range(d - 1, -1, -1):
            digits[:, j] = rest % grid
            rest = rest // grid
        yield axis[digits]


def uniform_norm_box(net: ShallowNet, B: float, grid: int, chunk: int = 250_000) -> float:
    """Max of ``|R(net)(x)|_inf`` over a ``grid^d`` lattice of ``[-B, B]^d``.

    A lower bound on the supremum over the box, exact in the limit.
    """
    if grid < 2:
        raise UsageError("grid must be at least 2")
    if not B > 0:
        raise UsageError("box half-width B must be positive")
    if grid**net.d > MAX_GRID_POINTS:
        raise CapacityError(f"grid^d = {grid}^{net.d} exceeds {MAX_GRID_POINTS} points")
    best = 0.0
    for pts in _grid_points(float(B), grid, net.d, chunk):
        best = max(best, float(np.abs(evaluate(net, pts)).max()))
    return best


@dataclass(frozen=True)
class EqualityReport:
    """Outcome of :func:`realizations_equal`.

    ``gap`` is the Jacobian difference ``D R(p) - D R(q)`` on the cell where
    it is largest; ``constant_gap`` says whether that difference is the same
    on every joint cell (the two realizations then differ by a linear map).
    """

    equal: bool
    max_gap: float
    tolerance: float
    worst_pattern: SignPattern
    gap: np.ndarray = field(repr=False)
    constant_gap: bool
    cells: int

    def __bool__(self) -> bool:
        return self.equal

    def to_json(self) -> dict:
        return {
            "equal": self.equal,
            "max_gap": self.max_gap,
            "tolerance": self.tolerance,
            "worst_pattern": list(self.worst_pattern),
            "gap": self.gap.tolist(),
            "constant_gap": self.constant_gap,
            "cells": self.cells,
        }


def realizations_equal(p: ShallowNet, q: ShallowNet) -> EqualityReport:
    """Decide ``R(p) == R(q)`` by comparing Jacobians on every joint cell.

    Both realizations are continuous, piecewise linear and vanish at the
    origin, so agreement of the Jacobians on all cells of the joint
    arrangement is equivalent to equality of the functions.
    """
    if p.d != q.d or p.D != q.D:
        raise UsageError("realizations_equal needs equal input and output dimensions")
    scale = max(np.abs(p.products()).max(), np.abs(q.products()).max())
    tol = EQUALITY_RTOL * scale
    joint = np.vstack([p.A, q.A])
    worst, worst_pattern, worst_gap = -1.0, None, None
    first_gap, constant = None, True
    cells = attainable_patterns(joint)
    for cell in cells:
        s = np.asarray(cell.pattern, dtype=np.float64)
        gap = (p.C * s[: p.m]) @ p.A - (q.C * s[p.m:]) @ q.A
        size = float(np.abs(gap).max())
        if first_gap is None:
            first_gap = gap
        elif constant and np.abs(gap - first_gap).max() > tol:
            constant = False
        if size > worst:
            worst, worst_pattern, worst_gap = size, cell.pattern, gap
    return EqualityReport(
        equal=bool(worst <= tol),
        max_gap=worst,
        tolerance=float(tol),
        worst_pattern=worst_pattern,
        gap=worst_gap,
        constant_gap=constant,
        cells=len(cells),
    )
