"""Normal forms for shallow parametrizations and the reparametrization conditions.

All three maps below leave the realization untouched:

* zero-pair normalization kills neurons with ``a_i = 0`` or ``c_i = 0``;
* balancing rescales each neuron so that ``|a_i|_inf = |c_i|_inf``;
* parallel merging folds positively parallel neurons into the
  lowest-indexed member of their class and zeroes the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .metrics import sobolev_distance
from .network import ShallowNet
from .regions import FEAS_TOL

DIR_TOL = 1e-9
BALANCE_RTOL = 1e-9


def _norms(net: ShallowNet) -> tuple[np.ndarray, np.ndarray]:
    return np.abs(net.A).max(axis=1), np.abs(net.C).max(axis=0)


def unit_directions(A: np.ndarray) -> np.ndarray:
    """Rows scaled to unit infinity norm; zero rows stay zero."""
    norms = np.abs(A).max(axis=1, keepdims=True)
    return np.divide(A, norms, out=np.zeros_like(A), where=norms > 0)


def normalize_zero_pairs(net: ShallowNet) -> ShallowNet:
    a_norm, c_norm = _norms(net)
    dead = (a_norm == 0) | (c_norm == 0)
    if not dead.any():
        return net
    A, C = net.A.copy(), net.C.copy()
    A[dead] = 0.0
    C[:, dead] = 0.0
    return ShallowNet(A, C)


def balance(net: ShallowNet) -> ShallowNet:
    """Rescale every live neuron to ``|a_i|_inf = |c_i|_inf = (|a_i| |c_i|)^(1/2)``.

    Neurons with a zero side are left alone; normalize zero pairs first.
    """
    a_norm, c_norm = _norms(net)
    live = (a_norm > 0) & (c_norm > 0)
    factor = np.ones(net.m)
    factor[live] = np.sqrt(c_norm[live] / a_norm[live])
    return ShallowNet(net.A * factor[:, None], net.C / factor[None, :])


def parallel_classes(net: ShallowNet, tol: float = DIR_TOL) -> list[list[int]]:
    """Classes of nonzero neurons with the same normalized direction, by first index."""
    U = unit_directions(net.A)
    a_norm = np.abs(net.A).max(axis=1)
    classes: list[list[int]] = []
    for i in range(net.m):
        if a_norm[i] == 0:
            continue
        for cls in classes:
            if np.abs(U[i] - U[cls[0]]).max() <= tol:
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes


def merge_parallel(net: ShallowNet) -> ShallowNet:
    """Merge each class of positively parallel neurons into its smallest index.

    The representative ``j`` receives ``sum_k c_k |a_k|_inf / |a_j|_inf``;
    the other members are set to zero, so the architecture is unchanged.
    """
    classes = [cls for cls in parallel_classes(net) if len(cls) > 1]
    if not classes:
        return net
    A, C = net.A.copy(), net.C.copy()
    a_norm = np.abs(net.A).max(axis=1)
    for cls in classes:
        rep = cls[0]
        C[:, rep] = sum(net.C[:, k] * (a_norm[k] / a_norm[rep]) for k in cls)
        for k in cls[1:]:
            A[k] = 0.0
            C[:, k] = 0.0
    return normalize_zero_pairs(ShallowNet(A, C))


def canonicalize(net: ShallowNet, merge: bool = True, do_balance: bool = True) -> ShallowNet:
    """Zero-pair normalization, then optional merging and balancing."""
    out = normalize_zero_pairs(net)
    if merge:
        out = merge_parallel(out)
    if do_balance:
        out = balance(out)
    return out


@dataclass(frozen=True)
class Violation:
    condition: str
    neurons: tuple
    value: float
    net: str = "gamma"

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "neurons": list(self.neurons),
            "value": self.value,
            "net": self.net,
        }


@dataclass(frozen=True)
class ConditionReport:
    beta_used: float
    r: float
    violations: tuple = field(default=())

    def _ok(self, cond: str) -> bool:
        return not any(v.condition == cond for v in self.violations)

    @property
    def c1_ok(self) -> bool:
        return self._ok("C1")

    @property
    def c2_ok(self) -> bool:
        return self._ok("C2")

    @property
    def c3a_ok(self) -> bool:
        return self._ok("C3a")

    @property
    def c3b_ok(self) -> bool:
        return self._ok("C3b")

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "beta": self.beta_used,
            "c1": self.c1_ok,
            "c2": self.c2_ok,
            "c3a": self.c3a_ok,
            "c3b": self.c3b_ok,
            "r": self.r,
            "violations": [v.to_json() for v in self.violations],
        }


def small_neurons(gamma: ShallowNet, r: float) -> np.ndarray:
    """Indices whose product norm ``|c_i a_i^T|_inf`` is at most ``2 r``."""
    a_norm, c_norm = _norms(gamma)
    return np.flatnonzero(a_norm * c_norm <= 2.0 * r)


def minimal_beta(gamma: ShallowNet, r: float) -> float:
    """Smallest ``beta`` for which the balance condition C.1 holds at distance ``r``."""
    a_norm, c_norm = _norms(gamma)
    idx = small_neurons(gamma, r)
    if idx.size == 0:
        return 0.0
    return float(np.maximum(a_norm[idx], c_norm[idx]).max())


def _pairs(U: np.ndarray, live: np.ndarray, sign: float):
    idx = np.flatnonzero(live)
    for x, i in enumerate(idx):
        for j in idx[x + 1:]:
            gap = float(np.abs(U[i] - sign * U[j]).max())
            if gap <= DIR_TOL:
                yield int(i), int(j), gap


def check_conditions(
    gamma: ShallowNet, theta: ShallowNet, beta: float, r: float | None = None
) -> ConditionReport:
    """Check conditions C.1, C.2, C.3(a) and C.3(b) for the pair ``(gamma, theta)``.

    ``r`` defaults to the exact Sobolev distance of the two realizations.
    For multi-output networks C.1 bounds ``|c_i|_inf``.
    """
    if gamma.arch != theta.arch:
        raise UsageError(f"architecture mismatch: {gamma.arch} vs {theta.arch}")
    if beta < 0:
        raise UsageError("beta must be nonnegative")
    if r is None:
        r = sobolev_distance(theta, gamma).value
    violations: list[Violation] = []

    a_norm, c_norm = _norms(gamma)
    slack = 1e-12 * max(1.0, beta)
    for i in small_neurons(gamma, r):
        size = max(a_norm[i], c_norm[i])
        if size > beta + slack:
            violations.append(Violation("C1", (int(i),), float(size)))

    Ug, Ut = unit_directions(gamma.A), unit_directions(theta.A)
    live_g = np.abs(gamma.A).max(axis=1) > 0
    live_t = np.abs(theta.A).max(axis=1) > 0
    for i, j, gap in _pairs(Ug, live_g, 1.0):
        violations.append(Violation("C2", (i, j), gap))
    for i, j, gap in _pairs(Ug, live_g, -1.0):
        violations.append(Violation("C3b", (i, j), gap, "gamma"))
    for i, j, gap in _pairs(Ut, live_t, -1.0):
        violations.append(Violation("C3b", (i, j), gap, "theta"))
    for i in np.flatnonzero(live_g):
        for j in np.flatnonzero(live_t):
            gap = float(np.abs(Ug[i] + Ut[j]).max())
            if gap <= DIR_TOL:
                violations.append(Violation("C3a", (int(i), int(j)), gap, "both"))
    return ConditionReport(float(beta), float(r), tuple(violations))


@dataclass(frozen=True)
class Membership:
    ok: bool
    reasons: tuple

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "reasons": list(self.reasons)}


def in_restricted_space(net: ShallowNet) -> Membership:
    """Balanced, no parallel directions, last two coordinates strictly positive."""
    reasons = []
    a_norm, c_norm = _norms(net)
    for i in range(net.m):
        if abs(a_norm[i] - c_norm[i]) > BALANCE_RTOL * max(a_norm[i], c_norm[i]):
            reasons.append(f"unbalanced neuron {i}")
    for i, j, _ in _pairs(unit_directions(net.A), a_norm > 0, 1.0):
        reasons.append(f"parallel neurons {i} and {j}")
    if net.d < 2:
        reasons.append("input dimension below 2")
    else:
        tol = FEAS_TOL * max(float(a_norm.max()), 1e-300)
        for i in range(net.m):
            if not (net.A[i, -2] > tol and net.A[i, -1] > tol):
                reasons.append(f"neuron {i} has a nonpositive last-two coordinate")
    return Membership(not reasons, tuple(reasons))
