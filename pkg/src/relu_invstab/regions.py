"""Full-dimensional cells of central hyperplane arrangements.

Each nonzero direction ``a_i`` cuts space along ``{<a_i, x> = 0}``; a sign
pattern ``s`` is attainable when the open cone
``{x : (2 s_i - 1) <a_i, x> > 0 for all nonzero a_i}`` is nonempty.  The
attainable patterns index the linear regions of ``x -> C relu(A x)``.

Enumeration is incremental: the arrangement is grown one hyperplane at a
time and every existing cell is tested for a split with a small
max-margin linear program.  Parallel and antiparallel directions share a
hyperplane and are collapsed before enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, UsageError
from .network import SignPattern
from .simplex import run_tableau

MAX_DIRECTIONS = 24

# Feasibility threshold on the max-margin value for infinity-normalized directions.
FEAS_TOL = 1e-8
# Two normalized directions closer than this (up to sign) define the same hyperplane.
DIR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CellWitness:
    """An attainable pattern together with an interior point of its cell.

    ``margin`` is ``min_i (2 s_i - 1) <a_i, point>`` over nonzero ``a_i``.
    ``degenerate`` marks the convention used when every direction is zero.
    """

    pattern: SignPattern
    point: np.ndarray
    margin: float
    degenerate: bool = field(default=False)

    def __repr__(self) -> str:
        return f"CellWitness(pattern={self.pattern}, margin={self.margin:.3g})"


def _as_directions(directions) -> np.ndarray:
    arr = np.array(directions, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise UsageError(f"directions must be a nonempty (m, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError("directions contain non-finite entries")
    return arr


@dataclass
class _Hyperplanes:
    normals: np.ndarray       # (K, d) infinity-normalized representatives
    group: np.ndarray         # (m,) hyperplane index per direction, -1 for zero rows
    orient: np.ndarray        # (m,) +1 / -1 relative to the representative, 0 for zero rows


def _collapse(A: np.ndarray) -> _Hyperplanes:
    m = A.shape[0]
    norms = np.abs(A).max(axis=1)
    group = np.full(m, -1, dtype=int)
    orient = np.zeros(m, dtype=int)
    reps: list[np.ndarray] = []
    for i in range(m):
        if norms[i] == 0:
            continue
        u = A[i] / norms[i]
        for k, rep in enumerate(reps):
            if np.abs(u - rep).max() <= DIR_TOL:
                group[i], orient[i] = k, 1
                break
            if np.abs(u + rep).max() <= DIR_TOL:
                group[i], orient[i] = k, -1
                break
        else:
            group[i], orient[i] = len(reps), 1
            reps.append(u)
    d = A.shape[1]
    normals = np.array(reps) if reps else np.zeros((0, d))
    return _Hyperplanes(normals, group, orient)


def _max_margin(normals: np.ndarray, signs: np.ndarray) -> tuple[float, np.ndarray]:
    """Solve ``max t`` s.t. ``signs_k <u_k, x> >= t``, ``-1 <= x <= 1``.

    Variables are ``x+ , x- >= 0`` with ``x = x+ - x-`` and ``t >= 0``
    (``x = 0, t = 0`` is always feasible, so the origin is a valid start).
    """
    k, d = normals.shape
    rows = k + 2 * d
    n = 2 * d + 1
    width = n + rows
    T = np.zeros((rows + 1, width + 1))
    su = signs[:, None] * normals
    T[:k, :d] = -su
    T[:k, d:2 * d] = su
    T[:k, 2 * d] = 1.0
    T[k:rows, :2 * d] = np.eye(2 * d)
    T[:rows, n:width] = np.eye(rows)
    T[k:rows, -1] = 1.0
    T[rows, 2 * d] = -1.0
    basis = np.arange(n, width, dtype=np.int64)
    run_tableau(T, basis, 50 * (rows + n) + 100)
    sol = np.zeros(width)
    sol[basis] = T[:rows, -1]
    x = sol[:d] - sol[d:2 * d]
    return float(T[rows, -1]), x


def _neuron_pattern(hp: _Hyperplanes, hbits) -> SignPattern:
    bits = []
    for g, o in zip(hp.group, hp.orient):
        if g < 0:
            bits.append(0)
        else:
            bits.append(int(hbits[g] == (1 if o > 0 else 0)))
    return tuple(bits)


def _margin(A: np.ndarray, pattern, point) -> float:
    nz = np.abs(A).max(axis=1) > 0
    eps = 2 * np.asarray(pattern) - 1
    vals = eps[nz] * (A[nz] @ point)
    return float(vals.min()) if vals.size else 0.0


def _check_capacity(A: np.ndarray) -> None:
    nonzero = int(np.count_nonzero(np.abs(A).max(axis=1) > 0))
    if nonzero > MAX_DIRECTIONS:
        raise CapacityError(
            f"{nonzero} nonzero directions exceed the enumeration cap of {MAX_DIRECTIONS}"
        )


def cell_witness(directions, pattern) -> CellWitness | None:
    """Interior point of the cell selected by ``pattern``, or ``None`` if empty.

    Zero directions must carry bit 0 (their open half-space is empty).
    """
    A = _as_directions(directions)
    _check_capacity(A)
    pattern = tuple(int(b) for b in pattern)
    if len(pattern) != A.shape[0] or any(b not in (0, 1) for b in pattern):
        raise UsageError("pattern must be a 0/1 vector with one bit per direction")
    hp = _collapse(A)
    K = hp.normals.shape[0]
    hbits = np.full(K, -1)
    for i, (g, o) in enumerate(zip(hp.group, hp.orient)):
        if g < 0:
            if pattern[i]:
                return None
            continue
        want = pattern[i] if o > 0 else 1 - pattern[i]
        if hbits[g] >= 0 and hbits[g] != want:
            return None
        hbits[g] = want
    if K == 0:
        return CellWitness(pattern, np.zeros(A.shape[1]), 0.0, degenerate=True)
    t, x = _max_margin(hp.normals, 2.0 * hbits - 1.0)
    if t <= FEAS_TOL:
        return None
    return CellWitness(pattern, x, _margin(A, pattern, x))


def attainable_patterns(directions) -> list[CellWitness]:
    """Every attainable sign pattern with a witness point, sorted by pattern."""
    A = _as_directions(directions)
    _check_capacity(A)
    d = A.shape[1]
    hp = _collapse(A)
    normals = hp.normals
    K = normals.shape[0]
    if K == 0:
        return [CellWitness(tuple([0] * A.shape[0]), np.zeros(d), 0.0, degenerate=True)]

    first = normals[0]
    cells: list[tuple[list[int], np.ndarray]] = [([1], first.copy()), ([0], -first)]
    for k in range(1, K):
        h = normals[k]
        active = normals[: k + 1]
        grown = []
        for bits, point in cells:
            side = float(h @ point)
            for b in (1, 0):
                if (side > FEAS_TOL and b == 1) or (side < -FEAS_TOL and b == 0):
                    grown.append((bits + [b], point))
                    continue
                signs = 2.0 * np.array(bits + [b]) - 1.0
                t, x = _max_margin(active, signs)
                if t > FEAS_TOL:
                    grown.append((bits + [b], x))
        cells = grown

    out = []
    for bits, point in cells:
        pattern = _neuron_pattern(hp, bits)
        out.append(CellWitness(pattern, point, _margin(A, pattern, point)))
    out.sort(key=lambda w: w.pattern)
    return out


def count_regions_oracle(directions, samples: int, seed: int = 0, chunk: int = 200_000) -> set:
    """Patterns observed at ``samples`` uniform points on the unit sphere.

    A brute-force cross-check for :func:`attainable_patterns`: every
    returned pattern is attainable, and with enough samples all are seen.
    Points within the boundary tolerance of some hyperplane are discarded.
    """
    A = _as_directions(directions)
    if samples < 1:
        raise UsageError("samples must be positive")
    m, d = A.shape
    if m > 62:
        raise CapacityError("oracle encodes patterns in 64-bit integers")
    rng = np.random.default_rng(seed)
    norms = np.abs(A).max(axis=1)
    weights = (1 << np.arange(m, dtype=np.int64))
    codes = set()
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        remaining -= n
        X = rng.standard_normal((n, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        Z = X @ A.T
        tol = 1e-10 * np.maximum(1.0, norms[None, :] * np.abs(X).max(axis=1, keepdims=True))
        on_boundary = ((np.abs(Z) <= tol) & (norms[None, :] > 0)).any(axis=1)
        bits = (Z[~on_boundary] > 0).astype(np.int64)
        codes.update(np.unique(bits @ weights).tolist())
    return {tuple(int((c >> i) & 1) for i in range(m)) for c in codes}


def generic_cell_count(m: int, d: int) -> int:
    """Number of cells of ``m`` central hyperplanes in general position in ``R^d``."""
    from math import comb

    return 2 * sum(comb(m - 1, i) for i in range(d))
