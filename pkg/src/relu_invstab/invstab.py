"""Constructive inverse stability for shallow bias-free ReLU networks.

Given a reference parametrization ``gamma`` and a parametrization ``theta``
of a target function ``g``, :func:`reparametrize` builds ``phi`` with
``R(phi) = g`` whose parameter distance to ``gamma`` is bounded in terms of
``r = |g - R(gamma)|_{W^{1,inf}}``:

* restricted mode (both networks balanced, non-redundant, last two input
  coordinates positive): ``|phi - gamma|_inf <= 4 r^(1/2)``;
* general mode (single output, conditions C.1 to C.3 with a given
  ``beta``): ``|phi - gamma|_inf <= beta + 2 r^(1/2)``.

The construction matches every neuron of ``gamma`` with the neuron of
``theta`` that shares its hyperplane and half-space, reorders ``theta``
accordingly, and then rebalances each neuron of the copy depending on the
size of the matched pair.  The returned :class:`Certificate` can be checked
from scratch with :func:`verify_certificate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .canonical import (
    DIR_TOL,
    check_conditions,
    in_restricted_space,
    merge_parallel,
    minimal_beta,
    normalize_zero_pairs,
    unit_directions,
)
from .errors import ConditionError, InconsistencyError, PreconditionError, UsageError
from .metrics import realizations_equal, sobolev_distance
from .network import ShallowNet, param_distance, permute

RESTRICTED = "restricted"
GENERAL = "general"

BOUND_RTOL = 1e-9


@dataclass(frozen=True)
class Matching:
    """Neuron correspondence between ``gamma`` and ``theta``.

    ``pi[i]`` is the ``theta`` neuron placed at position ``i``.  ``I2``
    holds the ``gamma`` neurons whose direction is positively parallel to
    ``theta`` neuron ``pi[i]``; ``I1`` holds the rest.  ``cases`` maps each
    position to the rule applied by :func:`reparametrize`.
    """

    pi: tuple
    I1: tuple
    I2: tuple
    cases: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "pi": list(self.pi),
            "I1": list(self.I1),
            "I2": list(self.I2),
            "cases": [self.cases.get(i) for i in range(len(self.pi))],
        }


def _live(net: ShallowNet) -> np.ndarray:
    return np.abs(net.A).max(axis=1) > 0


def _parallel_pair(net: ShallowNet) -> Optional[tuple]:
    U = unit_directions(net.A)
    idx = np.flatnonzero(_live(net))
    for x, i in enumerate(idx):
        for j in idx[x + 1:]:
            if np.abs(U[i] - U[j]).max() <= DIR_TOL:
                return int(i), int(j)
    return None


def match_directions(gamma: ShallowNet, theta: ShallowNet) -> Matching:
    """Pair each nonzero ``gamma`` direction with its positively parallel ``theta`` twin."""
    if gamma.d != theta.d or gamma.m != theta.m:
        raise UsageError("match_directions needs equal input dimension and width")
    for name, net in (("gamma", gamma), ("theta", theta)):
        pair = _parallel_pair(net)
        if pair is not None:
            raise ConditionError(
                f"C.2 violated: {name} neurons {pair[0]} and {pair[1]} are positively parallel"
                + ("; apply merge_parallel first" if name == "theta" else "")
            )
    Ug, Ut = unit_directions(gamma.A), unit_directions(theta.A)
    live_t = np.flatnonzero(_live(theta))
    pi = [-1] * gamma.m
    used = set()
    for i in np.flatnonzero(_live(gamma)):
        for j in live_t:
            if j not in used and np.abs(Ug[i] - Ut[j]).max() <= DIR_TOL:
                pi[i] = int(j)
                used.add(int(j))
                break
    I2 = tuple(i for i in range(gamma.m) if pi[i] >= 0)
    I1 = tuple(i for i in range(gamma.m) if pi[i] < 0)
    spare = iter(j for j in range(theta.m) if j not in used)
    for i in I1:
        pi[i] = next(spare)
    return Matching(tuple(pi), I1, I2)


@dataclass(frozen=True)
class Certificate:
    phi: ShallowNet
    r: float
    bound: float
    achieved: float
    matching: Matching
    restricted: bool
    beta: Optional[float] = None

    @property
    def mode(self) -> str:
        return RESTRICTED if self.restricted else GENERAL

    @property
    def holds(self) -> bool:
        return self.achieved <= self.bound + BOUND_RTOL * max(1.0, self.bound)

    def to_json(self) -> dict:
        from .io import net_to_json

        out = {
            "phi": net_to_json(self.phi),
            "r": self.r,
            "bound": self.bound,
            "achieved": self.achieved,
            "mode": self.mode,
            "cases": [self.matching.cases.get(i) for i in range(self.phi.m)],
            "pi": list(self.matching.pi),
            "I1": list(self.matching.I1),
            "I2": list(self.matching.I2),
        }
        if not self.restricted:
            out["beta"] = self.beta
        return out

    @classmethod
    def from_json(cls, payload: dict) -> "Certificate":
        from .io import net_from_json

        try:
            phi = net_from_json(payload["phi"])
            mode = payload["mode"]
            cases = payload.get("cases") or [None] * phi.m
            matching = Matching(
                tuple(payload.get("pi", range(phi.m))),
                tuple(payload.get("I1", ())),
                tuple(payload.get("I2", ())),
                {i: c for i, c in enumerate(cases) if c is not None},
            )
            if mode not in (RESTRICTED, GENERAL):
                raise UsageError(f"unknown certificate mode {mode!r}")
            return cls(
                phi=phi,
                r=float(payload["r"]),
                bound=float(payload["bound"]),
                achieved=float(payload["achieved"]),
                matching=matching,
                restricted=mode == RESTRICTED,
                beta=None if mode == RESTRICTED else float(payload["beta"]),
            )
        except KeyError as exc:
            raise UsageError(f"certificate is missing field {exc.args[0]!r}") from None


def _restricted_bound(r: float) -> float:
    return 4.0 * np.sqrt(r)


def _general_bound(beta: float, r: float) -> float:
    return beta + 2.0 * np.sqrt(r)


def _product_norm(a: np.ndarray, c: np.ndarray) -> float:
    return float(np.abs(a).max() * np.abs(c).max())


def _reparametrize_restricted(gamma: ShallowNet, theta: ShallowNet) -> Certificate:
    for name, net in (("gamma", gamma), ("theta", theta)):
        membership = in_restricted_space(net)
        if not membership:
            raise ConditionError(
                f"{name} is not in the restricted space: " + "; ".join(membership.reasons),
                report=membership,
            )
    r = sobolev_distance(theta, gamma).value
    matching = match_directions(gamma, theta)
    phi = permute(theta, matching.pi)
    cases = {i: "unmatched" for i in matching.I1}
    for i in matching.I2:
        if _product_norm(gamma.A[i], gamma.C[:, i]) <= 2 * r:
            cases[i] = "A1"
        elif _product_norm(phi.A[i], phi.C[:, i]) <= 2 * r:
            cases[i] = "A2"
        else:
            cases[i] = "B"
    matching = replace(matching, cases=cases)
    return Certificate(
        phi=phi,
        r=r,
        bound=_restricted_bound(r),
        achieved=param_distance(phi, gamma),
        matching=matching,
        restricted=True,
    )


def _balanced_neuron(a: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a_norm, c_norm = np.abs(a).max(), np.abs(c).max()
    if a_norm == 0 or c_norm == 0:
        return a, c
    f = np.sqrt(c_norm / a_norm)
    return a * f, c / f


def _reparametrize_general(gamma: ShallowNet, theta: ShallowNet, beta: Optional[float]) -> Certificate:
    if gamma.D != 1:
        raise PreconditionError("general mode supports single-output networks only (D = 1)")
    theta = merge_parallel(normalize_zero_pairs(theta))
    r = sobolev_distance(theta, gamma).value
    if beta is None:
        beta = minimal_beta(gamma, r)
    report = check_conditions(gamma, theta, beta, r=r)
    if not report.ok:
        failed = sorted({v.condition for v in report.violations})
        raise ConditionError("conditions violated: " + ", ".join(failed), report=report)

    matching = match_directions(gamma, theta)
    ordered = permute(theta, matching.pi)
    A, C = ordered.A.copy(), ordered.C.copy()
    cases = {}
    for i in matching.I1:
        A[i], C[:, i] = _balanced_neuron(A[i], C[:, i])
        cases[i] = "unmatched"
    for i in matching.I2:
        a_g, c_g = gamma.A[i], float(gamma.C[0, i])
        a_norm_g = float(np.abs(a_g).max())
        if abs(c_g) * a_norm_g <= 2 * r:
            A[i], C[:, i] = _balanced_neuron(A[i], C[:, i])
            cases[i] = "A"
        elif abs(c_g) > a_norm_g:
            ratio = C[0, i] / c_g
            if ratio <= 0:
                raise InconsistencyError(f"output weights of matched neuron {i} have opposite signs")
            A[i] = ratio * A[i]
            C[0, i] = c_g
            cases[i] = "B1"
        elif abs(c_g) < a_norm_g:
            a_norm_t = float(np.abs(A[i]).max())
            C[0, i] = C[0, i] * a_norm_t / a_norm_g
            A[i] = a_g
            cases[i] = "B2"
        else:
            A[i], C[:, i] = _balanced_neuron(A[i], C[:, i])
            cases[i] = "B3"
    phi = ShallowNet(A, C)
    return Certificate(
        phi=phi,
        r=r,
        bound=_general_bound(beta, r),
        achieved=param_distance(phi, gamma),
        matching=replace(matching, cases=cases),
        restricted=False,
        beta=float(beta),
    )


def reparametrize(
    gamma: ShallowNet, theta: ShallowNet, mode: str = RESTRICTED, beta: Optional[float] = None
) -> Certificate:
    """Build a parametrization of ``R(theta)`` close to ``gamma``.

    In general mode ``beta`` defaults to the smallest value satisfying C.1.
    Raises :class:`ConditionError` when the hypotheses of the chosen mode
    fail; the error's ``report`` explains which.
    """
    if gamma.arch != theta.arch:
        raise UsageError(f"architecture mismatch: {gamma.arch} vs {theta.arch}")
    if mode == RESTRICTED:
        return _reparametrize_restricted(gamma, theta)
    if mode == GENERAL:
        return _reparametrize_general(gamma, theta, beta)
    raise UsageError(f"unknown mode {mode!r}; expected 'restricted' or 'general'")


@dataclass(frozen=True)
class VerificationReport:
    realization_ok: bool
    distance_ok: bool
    bound_ok: bool
    r: float
    achieved: float
    bound: float
    details: tuple = ()

    @property
    def ok(self) -> bool:
        return self.realization_ok and self.distance_ok and self.bound_ok

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "realization_ok": self.realization_ok,
            "distance_ok": self.distance_ok,
            "bound_ok": self.bound_ok,
            "r": self.r,
            "achieved": self.achieved,
            "bound": self.bound,
            "details": list(self.details),
        }


def verify_certificate(gamma: ShallowNet, theta: ShallowNet, cert: Certificate) -> VerificationReport:
    """Recheck a certificate from scratch.

    Three checks: ``R(phi) == R(theta)``; the recomputed parameter distance
    matches the claim and respects the bound; the bound matches the formula
    of its mode evaluated at the recomputed ``r`` (and, in general mode,
    ``beta`` really satisfies C.1).
    """
    details = []
    if cert.phi.arch != gamma.arch or theta.arch != gamma.arch:
        return VerificationReport(False, False, False, float("nan"), float("nan"), cert.bound,
                                  ("architecture mismatch",))
    eq = realizations_equal(cert.phi, theta)
    if not eq:
        details.append(f"R(phi) != R(theta): max Jacobian gap {eq.max_gap:.3e}")

    r = sobolev_distance(theta, gamma).value
    achieved = param_distance(cert.phi, gamma)
    expected = _restricted_bound(r) if cert.restricted else _general_bound(cert.beta, r)
    bound_ok = abs(r - cert.r) <= BOUND_RTOL * max(1.0, r) and abs(
        expected - cert.bound
    ) <= BOUND_RTOL * max(1.0, expected)
    if not bound_ok:
        details.append(f"bound mismatch: recomputed r={r!r}, bound={expected!r}")
    if not cert.restricted:
        conditions = check_conditions(gamma, theta, cert.beta, r=r)
        if not conditions.c1_ok:
            bound_ok = False
            details.append("beta does not satisfy C.1")

    distance_ok = abs(achieved - cert.achieved) <= BOUND_RTOL * max(1.0, achieved) and (
        achieved <= expected + BOUND_RTOL * max(1.0, expected)
    )
    if not distance_ok:
        details.append(f"parameter distance {achieved!r} vs claimed {cert.achieved!r}, bound {expected!r}")
    return VerificationReport(bool(eq), bool(distance_ok), bool(bound_ok), r, achieved, expected, tuple(details))


def pivoted_rank(M, rtol: float = 1e-9) -> int:
    """Rank by Gaussian elimination with complete pivoting."""
    M = np.array(M, dtype=np.float64)
    if M.size == 0:
        return 0
    tol = rtol * max(np.abs(M).max(), 1e-300)
    rank = 0
    rows, cols = M.shape
    for k in range(min(rows, cols)):
        sub = np.abs(M[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= tol:
            break
        M[[k, k + i]] = M[[k + i, k]]
        M[:, [k, k + j]] = M[:, [k + j, k]]
        M[k + 1:] -= np.outer(M[k + 1:, k] / M[k, k], M[k])
        rank += 1
    return rank


@dataclass(frozen=True)
class Correspondence:
    pi: tuple
    lam: np.ndarray


def recover_correspondence(theta: ShallowNet, phi: ShallowNet, rtol: float = 1e-9) -> Correspondence:
    """Recover ``phi`` as a reordering plus positive rescaling of ``theta``.

    Requires linearly independent rows of ``theta.A`` and nonzero output
    weights, under which ``theta`` is the unique parametrization of its
    realization up to exactly these symmetries.  Returns ``pi`` and
    ``lam`` with ``a_i^phi = lam_i a_{pi(i)}^theta`` and
    ``c_i^phi = c_{pi(i)}^theta / lam_i``.
    """
    if theta.arch != phi.arch:
        raise UsageError(f"architecture mismatch: {theta.arch} vs {phi.arch}")
    if pivoted_rank(theta.A) < theta.m:
        raise PreconditionError("rows of theta.A are linearly dependent")
    if np.abs(theta.C).max(axis=0).min() <= 0:
        raise PreconditionError("theta has a neuron with zero output weight")

    Ut, Up = unit_directions(theta.A), unit_directions(phi.A)
    t_norm = np.abs(theta.A).max(axis=1)
    pi, lam = [], []
    for i in range(phi.m):
        gaps = np.abs(Ut - Up[i]).max(axis=1)
        j = int(np.argmin(gaps))
        if gaps[j] > rtol or j in pi:
            raise InconsistencyError(f"phi neuron {i} matches no unused theta direction")
        scale = float(np.abs(phi.A[i]).max() / t_norm[j])
        a_ok = np.allclose(phi.A[i], scale * theta.A[j], rtol=rtol, atol=rtol * np.abs(phi.A[i]).max())
        c_ref = theta.C[:, j] / scale
        c_ok = np.allclose(phi.C[:, i], c_ref, rtol=rtol, atol=rtol * np.abs(c_ref).max())
        if not (a_ok and c_ok):
            raise InconsistencyError(f"phi neuron {i} is not a positive rescaling of theta neuron {j}")
        pi.append(j)
        lam.append(scale)
    return Correspondence(tuple(pi), np.array(lam))
