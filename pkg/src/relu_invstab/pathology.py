"""Counterexample families for inverse stability and their measured quantities.

Every family produces a reference parametrization ``gamma`` and a
parametrization ``g_param`` of a nearby target realization ``g_k``.  The
measurement compares the Sobolev distance of the two realizations with its
closed form and certifies the parameter-space lower bound by minimizing
``|Phi - gamma|_inf`` over all parametrizations ``Phi`` of ``g_k`` that arise
from ``g_param`` by permuting neurons and positively rescaling them.

Families and their stated quantities (distance, parameter lower bound):

=====================  ==================  =============
exploding              seminorm ``k^2``    none
unbalanced_complete    ``1/k``             ``r``
unbalanced_seq         ``1/k``             ``k``
redundant              ``1/k``             ``1``
opposite_zero          ``|v|_inf / k``     ``C``
opposite_pair          ``3``               ``k``
local_min              at most ``1/k``     none
=====================  ==================  =============
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityError, UsageError
from .io import Dataset, net_to_json
from .landscape import mse_loss
from .metrics import seminorm, sobolev_distance, uniform_norm_box
from .network import ShallowNet, concat, negate, relu

FAMILIES = (
    "exploding",
    "unbalanced_complete",
    "unbalanced_seq",
    "redundant",
    "opposite_zero",
    "opposite_pair",
    "local_min",
)

CLOSED_FORM_RTOL = 1e-9
LAMBDA_RANGE = (1e-6, 1e6)
GOLDEN_ITERATIONS = 200
MAX_PERMUTATION_NEURONS = 8

DEFAULT_OPPOSITE_DIRECTIONS = ((1.0, -0.5), (-1.0, -0.5), (0.0, 1.0))
DEFAULT_OPPOSITE_V = (1.0, 0.0)
DEFAULT_LOCAL_MIN_X = ((-0.4, 0.6), (0.8, 0.5))
DEFAULT_LOCAL_MIN_Y = ((0.0,), (1.0,))


@dataclass(frozen=True)
class PathologyCase:
    name: str
    params: dict
    gamma: ShallowNet
    g_param: ShallowNet
    closed_form: float
    lower_bound: Optional[float]
    data: Optional[Dataset] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.params["k"]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "gamma": net_to_json(self.gamma),
            "g_param": net_to_json(self.g_param),
            "closed_form": self.closed_form,
            "lower_bound": self.lower_bound,
        }


def _positive_int(params: dict, key: str) -> int:
    value = params.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise UsageError(f"{key} must be a positive integer, got {value!r}")
    return int(value)


def _positive_real(params: dict, key: str, default: float) -> float:
    value = params.get(key, default)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be a real number") from None
    if not (math.isfinite(value) and value > 0):
        raise UsageError(f"{key} must be positive, got {value}")
    return value


def _pair_independent(u: np.ndarray, w: np.ndarray) -> bool:
    from .invstab import pivoted_rank

    return pivoted_rank(np.vstack([u, w])) == 2


def validate_zero_sum(directions, v) -> tuple[np.ndarray, np.ndarray]:
    """Check the opposite_zero hypotheses and return the arrays."""
    A = np.asarray(directions, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 2:
        raise UsageError("directions must be a list of at least two vectors")
    if v.shape != (A.shape[1],):
        raise UsageError(f"v must have length {A.shape[1]}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(v))):
        raise UsageError("directions and v must be finite")
    scale = max(float(np.abs(A).max()), 1.0)
    if np.abs(A.sum(axis=0)).max() > 1e-12 * scale * A.shape[0]:
        raise UsageError("directions must sum to zero")
    for i, j in itertools.combinations(range(A.shape[0]), 2):
        if not _pair_independent(A[i], A[j]):
            raise UsageError(f"directions {i} and {j} are linearly dependent")
    for i in range(A.shape[0]):
        if not _pair_independent(A[i], v):
            raise UsageError(f"v is linearly dependent on direction {i}")
    return A, v


def opposite_zero_constant(directions, v) -> float:
    """``(1/d^2) min_i (|a_i|^2 |v|^2 - <a_i, v>^2)``."""
    A = np.asarray(directions, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    d = A.shape[1]
    gram = np.sum(A * A, axis=1) * float(v @ v) - (A @ v) ** 2
    return float(gram.min()) / d**2


def zero_sum_gap(directions, X) -> float:
    """``max_x |sum_i relu(<a_i,x>) - sum_i relu(<-a_i,x>)|`` over the rows of ``X``."""
    A = np.asarray(directions, dtype=np.float64)
    Z = np.atleast_2d(np.asarray(X, dtype=np.float64)) @ A.T
    return float(np.abs(relu(Z).sum(axis=1) - relu(-Z).sum(axis=1)).max())


def build_case(name: str, params: Optional[dict] = None) -> PathologyCase:
    params = dict(params or {})
    if name not in FAMILIES:
        raise UsageError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    k = _positive_int(params, "k")
    unknown = set(params) - {"k", "r", "directions", "v"}
    if unknown:
        raise UsageError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    if "r" in params and name != "unbalanced_complete":
        raise UsageError("parameter r only applies to unbalanced_complete")
    if ("directions" in params or "v" in params) and name != "opposite_zero":
        raise UsageError("directions and v only apply to opposite_zero")
    clean = {"k": k}
    data = None

    if name == "exploding":
        gamma = ShallowNet.zeros(2, 2)
        g = ShallowNet([[k, 0.0], [k, -1.0 / k**2]], [[k, -k]])
        closed, bound = float(k * k), None
    elif name == "unbalanced_complete":
        r = _positive_real(params, "r", 1.0)
        clean["r"] = r
        gamma = ShallowNet([[r, 0.0]], [[0.0]])
        g = ShallowNet([[0.0, 1.0]], [[1.0 / k]])
        closed, bound = 1.0 / k, r
    elif name == "unbalanced_seq":
        gamma = ShallowNet([[k, 0.0]], [[1.0 / k**2]])
        g = ShallowNet([[0.0, 1.0]], [[1.0 / k]])
        closed, bound = 1.0 / k, float(k)
    elif name == "redundant":
        gamma = ShallowNet([[1.0, 0.0], [1.0, 0.0]], [[1.0, 1.0]])
        g = ShallowNet([[1.0, 0.0], [0.0, 1.0]], [[2.0, 1.0 / k]])
        closed, bound = 1.0 / k, 1.0
    elif name == "opposite_zero":
        A, v = validate_zero_sum(
            params.get("directions", DEFAULT_OPPOSITE_DIRECTIONS), params.get("v", DEFAULT_OPPOSITE_V)
        )
        clean["directions"] = A.tolist()
        clean["v"] = v.tolist()
        m = A.shape[0]
        gamma = ShallowNet(np.vstack([A, -A]), [[1.0] * m + [-1.0] * m])
        gA = np.zeros((2 * m, A.shape[1]))
        gA[0] = v
        gC = np.zeros((1, 2 * m))
        gC[0, 0] = 1.0 / k
        g = ShallowNet(gA, gC)
        closed, bound = float(np.abs(v).max()) / k, opposite_zero_constant(A, v)
    elif name == "opposite_pair":
        s2 = math.sqrt(2.0)
        rows = np.array([[k, k, 1.0 / k], [-k, k, 1.0 / k], [0.0, -s2 * k, 1.0 / (s2 * k)]])
        C = [[k, k, s2 * k]]
        g = ShallowNet(rows, C)
        gamma = ShallowNet(-rows, C)
        closed, bound = 3.0, float(k)
    else:  # local_min
        gamma = ShallowNet([[-1.0, 0.0]], [[0.0]])
        g = ShallowNet([[1.0, -1.0]], [[1.0 / k]])
        data = Dataset(DEFAULT_LOCAL_MIN_X, DEFAULT_LOCAL_MIN_Y)
        closed, bound = 1.0 / k, None
    return PathologyCase(name, clean, gamma, g, closed, bound, data)


def _neuron_cost(ga, gc, pa, pc, t):
    """``max(|e^t pa - ga|_inf, |e^-t pc - gc|_inf)`` broadcast over ``t``."""
    lam = np.exp(t)[..., None]
    ca = np.abs(lam * pa - ga).max(axis=-1)
    cc = np.abs(pc / lam - gc).max(axis=-1)
    return np.maximum(ca, cc)


def _min_over_scaling(ga, gc, pa, pc) -> tuple[float, float]:
    """Golden-section search in ``log(lambda)``; the objective is quasiconvex there."""
    lo, hi = math.log(LAMBDA_RANGE[0]), math.log(LAMBDA_RANGE[1])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1, x2 = b - invphi * (b - a), a + invphi * (b - a)
    f1 = float(_neuron_cost(ga, gc, pa, pc, np.array(x1)))
    f2 = float(_neuron_cost(ga, gc, pa, pc, np.array(x2)))
    for _ in range(GOLDEN_ITERATIONS):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = float(_neuron_cost(ga, gc, pa, pc, np.array(x1)))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = float(_neuron_cost(ga, gc, pa, pc, np.array(x2)))
    candidates = np.array([lo, hi, x1, x2, 0.0])
    costs = _neuron_cost(ga, gc, pa, pc, candidates)
    best = int(np.argmin(costs))
    return float(costs[best]), float(math.exp(candidates[best]))


@dataclass(frozen=True)
class ParamSearch:
    """Best ``Phi = permute+rescale(g_param)``; neuron ``i`` of Phi is ``lam[i]`` times neuron ``pi[i]``."""

    value: float
    pi: tuple
    lam: tuple

    def to_json(self) -> dict:
        return {"value": self.value, "pi": list(self.pi), "lambda": list(self.lam)}


def min_param_distance(gamma: ShallowNet, g_param: ShallowNet) -> ParamSearch:
    """Minimize ``|Phi - gamma|_inf`` over neuron permutations and positive scalings of ``g_param``."""
    if gamma.arch != g_param.arch:
        raise UsageError(f"architecture mismatch: {gamma.arch} vs {g_param.arch}")
    m = gamma.m
    if m > MAX_PERMUTATION_NEURONS:
        raise CapacityError(f"exhaustive permutation search is limited to {MAX_PERMUTATION_NEURONS} neurons")
    cost = np.empty((m, m))
    scale = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            cost[i, j], scale[i, j] = _min_over_scaling(
                gamma.A[i], gamma.C[:, i], g_param.A[j], g_param.C[:, j]
            )
    # The objective separates per position, so the search reduces to a bottleneck assignment.
    best_value, best_pi = np.inf, None
    rows = np.arange(m)
    for pi in itertools.permutations(range(m)):
        value = cost[rows, pi].max() if m else 0.0
        if value < best_value:
            best_value, best_pi = float(value), pi
    lam = tuple(float(scale[i, best_pi[i]]) for i in range(m))
    return ParamSearch(best_value, tuple(int(p) for p in best_pi), lam)


def default_grid(d: int) -> int:
    return 201 if d <= 2 else 65


@dataclass(frozen=True)
class Measurement:
    case: PathologyCase
    distance: float
    uniform_gap: float
    grid: int
    search: ParamSearch
    checks: dict
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def curve_row(self) -> tuple:
        bound = math.nan if self.case.lower_bound is None else self.case.lower_bound
        return (self.case.k, self.distance, bound)

    def to_json(self) -> dict:
        return {
            "family": self.case.name,
            "params": self.case.params,
            "distance": self.distance,
            "closed_form": self.case.closed_form,
            "uniform_gap": self.uniform_gap,
            "grid": self.grid,
            "min_param_distance": self.search.to_json(),
            "param_lower_bound": self.case.lower_bound,
            "checks": self.checks,
            **self.extras,
        }


def _rel_close(x: float, y: float, rtol: float = CLOSED_FORM_RTOL) -> bool:
    return abs(x - y) <= rtol * max(abs(y), 1e-300)


def measure_case(case: PathologyCase, grid: Optional[int] = None) -> Measurement:
    """Measure distances and the parameter lower bound of a built case."""
    g, gamma = case.g_param, case.gamma
    grid = default_grid(g.d) if grid is None else grid
    search = min_param_distance(gamma, g)
    uniform_gap = uniform_norm_box(concat(g, negate(gamma)), 1.0, grid)
    checks = {}
    extras = {}
    if case.name == "exploding":
        distance = seminorm(g).value
        checks["seminorm_matches"] = _rel_close(distance, case.closed_form)
        checks["uniform_small"] = uniform_gap <= (1.0 / case.k) * (1 + CLOSED_FORM_RTOL)
    else:
        distance = sobolev_distance(g, gamma).value
        if case.name == "local_min":
            checks["distance_within"] = distance <= case.closed_form * (1 + CLOSED_FORM_RTOL)
            loss_gamma = mse_loss(gamma, case.data)
            loss_g = mse_loss(g, case.data)
            extras["loss_gamma"] = loss_gamma
            extras["loss_g"] = loss_g
            checks["loss_gamma_half"] = loss_gamma == 0.5
            checks["loss_g_below"] = loss_g < 0.5
        else:
            checks["distance_matches"] = _rel_close(distance, case.closed_form)
    if case.lower_bound is not None:
        checks["param_bound_met"] = search.value >= case.lower_bound
    return Measurement(case, distance, uniform_gap, grid, search, checks, extras)


def curve(name: str, ks, params: Optional[dict] = None, grid: Optional[int] = None) -> list[Measurement]:
    """Measurements for a sequence of ``k`` values of one family."""
    out = []
    for k in ks:
        p = dict(params or {})
        p["k"] = k
        out.append(measure_case(build_case(name, p), grid=grid))
    return out
