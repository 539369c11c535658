"""Shallow ReLU networks without biases and their exact pointwise calculus.

A bias-free shallow network with architecture ``(d, m, D)`` is a pair
``(A, C)`` with ``A`` of shape ``(m, d)`` (rows are hidden weight vectors
``a_i``) and ``C`` of shape ``(D, m)`` (columns are output weights ``c_i``).
Its realization is ``x -> C relu(A x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import BoundaryError, UsageError

SignPattern = Tuple[int, ...]

# |<a_i, x>| <= BOUNDARY_RTOL * max(1, |a_i|_inf |x|_inf) counts as "on the hyperplane".
BOUNDARY_RTOL = 1e-10


def relu(z):
    return np.maximum(z, 0.0)


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=np.float64)
    if arr.ndim != 2:
        raise UsageError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _as_vector(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=np.float64)
    if arr.ndim != 1:
        raise UsageError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Architecture:
    d: int
    m: int
    D: int

    def __post_init__(self):
        for name in ("d", "m", "D"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise UsageError(f"architecture field {name} must be a positive integer, got {value!r}")


@dataclass(frozen=True, eq=False)
class ShallowNet:
    """Bias-free shallow network ``x -> C relu(A x)``.

    Arrays are copied on construction and made read-only, so instances can
    be shared freely.
    """

    A: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        C = _as_matrix(self.C, "C")
        if A.shape[0] != C.shape[1]:
            raise UsageError(
                f"A has {A.shape[0]} rows but C has {C.shape[1]} columns; both must equal m"
            )
        if A.shape[0] < 1 or A.shape[1] < 1 or C.shape[0] < 1:
            raise UsageError("empty network: d, m and D must all be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def D(self) -> int:
        return self.C.shape[0]

    @property
    def arch(self) -> Architecture:
        return Architecture(self.d, self.m, self.D)

    def neuron(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(a_i, c_i)``."""
        return self.A[i], self.C[:, i]

    def products(self) -> np.ndarray:
        """Per-neuron Jacobian contributions ``c_i a_i^T``, shape ``(m, D, d)``."""
        return self.C.T[:, :, None] * self.A[:, None, :]

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShallowNet):
            return NotImplemented
        return np.array_equal(self.A, other.A) and np.array_equal(self.C, other.C)

    def __hash__(self):
        return hash((self.A.tobytes(), self.C.tobytes(), self.A.shape, self.C.shape))

    def __repr__(self) -> str:
        return f"ShallowNet(A={self.A.tolist()}, C={self.C.tolist()})"

    @classmethod
    def zeros(cls, d: int, m: int, D: int = 1) -> "ShallowNet":
        Architecture(d, m, D)
        return cls(np.zeros((m, d)), np.zeros((D, m)))


@dataclass(frozen=True, eq=False)
class BiasedShallowNet:
    """Shallow network with biases ``x -> C relu(A x + b) + e``."""

    A: np.ndarray
    b: np.ndarray
    C: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        C = _as_matrix(self.C, "C")
        b = _as_vector(self.b, "b")
        e = _as_vector(self.e, "e")
        m = A.shape[0]
        if C.shape[1] != m or b.shape[0] != m:
            raise UsageError("A rows, b length and C columns must all equal m")
        if e.shape[0] != C.shape[0]:
            raise UsageError("e length must equal D (rows of C)")
        if A.shape[0] < 1 or A.shape[1] < 1 or C.shape[0] < 1:
            raise UsageError("empty network: d, m and D must all be positive")
        for name, arr in (("A", A), ("b", b), ("C", C), ("e", e)):
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def D(self) -> int:
        return self.C.shape[0]

    @property
    def arch(self) -> Architecture:
        return Architecture(self.d, self.m, self.D)

    def __call__(self, x) -> np.ndarray:
        return biased_eval(self, x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiasedShallowNet):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("A", "b", "C", "e")
        )

    __hash__ = None


def _check_points(net, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.d:
        raise UsageError(f"expected point(s) of dimension {net.d}, got shape {np.shape(x)}")
    return x, single


def evaluate(net: ShallowNet, x) -> np.ndarray:
    """Realization ``sum_i c_i relu(<a_i, x>)``.

    Accepts a single point of shape ``(d,)`` or a batch of shape ``(n, d)``.
    """
    pts, single = _check_points(net, x)
    out = relu(pts @ net.A.T) @ net.C.T
    return out[0] if single else out


def biased_eval(net: BiasedShallowNet, x) -> np.ndarray:
    """Realization ``sum_i c_i relu(<a_i, x> + b_i) + e``."""
    pts, single = _check_points(net, x)
    out = relu(pts @ net.A.T + net.b) @ net.C.T + net.e
    return out[0] if single else out


def _preactivations_checked(net: ShallowNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.d,):
        raise UsageError(f"expected a point of dimension {net.d}, got shape {x.shape}")
    z = net.A @ x
    a_norm = np.abs(net.A).max(axis=1)
    x_norm = np.abs(x).max()
    tol = BOUNDARY_RTOL * np.maximum(1.0, a_norm * x_norm)
    for i in range(net.m):
        if a_norm[i] > 0 and abs(z[i]) <= tol[i]:
            raise BoundaryError(i, float(z[i]))
    return z


def sign_pattern_at(net: ShallowNet, x) -> SignPattern:
    """Active-neuron indicator at an interior point; zero rows get bit 0."""
    z = _preactivations_checked(net, x)
    return tuple(int(v > 0) for v in z)


def jacobian_from_pattern(net: ShallowNet, pattern) -> np.ndarray:
    """``sum_{s_i = 1} c_i a_i^T`` as a ``(D, d)`` matrix."""
    s = np.asarray(pattern, dtype=np.float64)
    if s.shape != (net.m,):
        raise UsageError(f"pattern length {s.shape} does not match m={net.m}")
    return (net.C * s) @ net.A


def jacobian_at(net: ShallowNet, x) -> np.ndarray:
    """Jacobian of the realization at a point off every separating hyperplane."""
    return jacobian_from_pattern(net, sign_pattern_at(net, x))


def param_distance(p: ShallowNet, q: ShallowNet) -> float:
    """Maximum absolute entrywise difference over ``A`` and ``C`` jointly."""
    if p.arch != q.arch:
        raise UsageError(f"architecture mismatch: {p.arch} vs {q.arch}")
    return float(max(np.abs(p.A - q.A).max(), np.abs(p.C - q.C).max()))


def concat(p: ShallowNet, q: ShallowNet) -> ShallowNet:
    """Stack the hidden neurons of ``p`` and ``q``; realizes ``R(p) + R(q)``."""
    if p.d != q.d or p.D != q.D:
        raise UsageError("concat needs equal input and output dimensions")
    return ShallowNet(np.vstack([p.A, q.A]), np.hstack([p.C, q.C]))


def negate(net: ShallowNet) -> ShallowNet:
    return ShallowNet(net.A, -net.C)


def permute(net: ShallowNet, order) -> ShallowNet:
    """Neuron ``i`` of the result is neuron ``order[i]`` of ``net``."""
    order = np.asarray(order, dtype=int)
    return ShallowNet(net.A[order], net.C[:, order])


def rescale(net: ShallowNet, lam) -> ShallowNet:
    """Positive rescaling ``a_i -> lam_i a_i``, ``c_i -> c_i / lam_i``."""
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (net.m,) or np.any(lam <= 0):
        raise UsageError("rescaling factors must be m positive numbers")
    return ShallowNet(net.A * lam[:, None], net.C / lam[None, :])
