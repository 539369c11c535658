"""Bias elimination by lifting into two extra input coordinates.

A biased network ``x -> sum_i c_i relu(<a_i, x> + b_i) + e`` on ``R^d`` is
rewritten as a bias-free network on ``R^(d+2)`` evaluated at
``(x, 1, -1)``.  Each bias is split as ``b_i = b_i^+ - b_i^-`` with both
parts positive, the output bias becomes one extra neuron that is constant on
the augmented inputs, and every neuron is balanced at the end, so the
lifted network lies in the restricted parametrization space whenever its
directions are pairwise non-parallel.
"""

from __future__ import annotations

import numpy as np

from .canonical import DIR_TOL, balance, merge_parallel, unit_directions
from .errors import UsageError
from .network import BiasedShallowNet, ShallowNet


def augment_point(x) -> np.ndarray:
    """Append the coordinates ``1`` and ``-1``; accepts a point or a batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise UsageError("points must have at least one coordinate")
    tail = np.broadcast_to(np.array([1.0, -1.0]), x.shape[:-1] + (2,))
    return np.concatenate([x, tail], axis=-1)


def split_bias(b: float) -> tuple[float, float]:
    """Positive ``(b_plus, b_minus)`` with ``b_plus - b_minus = b``."""
    if b >= 0:
        return b + 1.0, 1.0
    return 1.0, 1.0 - b


def lift_unbalanced(theta: BiasedShallowNet) -> ShallowNet:
    """The lifted network before the final balancing step."""
    d, m, D = theta.d, theta.m, theta.D
    A = np.zeros((m + 1, d + 2))
    C = np.zeros((D, m + 1))
    for i in range(m):
        if np.abs(theta.C[:, i]).max() != 0:
            b_plus, b_minus = split_bias(float(theta.b[i]))
            A[i, :d] = theta.A[i]
            A[i, d], A[i, d + 1] = b_plus, b_minus
            C[:, i] = theta.C[:, i]
        else:
            A[i, d], A[i, d + 1] = 1.0, 1.0
            C[:, i] = 1.0
    if np.any(theta.e != 0):
        A[m, d], A[m, d + 1] = 2.0, 1.0
        C[:, m] = theta.e
    else:
        A[m, d], A[m, d + 1] = 1.0, 1.0
        C[:, m] = 1.0
    return ShallowNet(A, C)


def lift_biased(theta: BiasedShallowNet) -> ShallowNet:
    """Balanced bias-free network on ``R^(d+2)`` with ``R(lift)(x, 1, -1) = R(theta)(x)``."""
    return balance(lift_unbalanced(theta))


def _filler(d: int, j: int) -> np.ndarray:
    # <(0, ..., 0, 1, 1 + j), (x, 1, -1)> = -j < 0, so the neuron is inactive on augmented inputs.
    a = np.zeros(d + 2)
    a[d], a[d + 1] = 1.0, 1.0 + j
    return a


def lift_restricted(theta: BiasedShallowNet) -> ShallowNet:
    """Lift, merge parallel directions, and refill the merged-away slots.

    Degenerate inputs (several dead neurons, duplicated neurons) lift to
    parallel directions.  Merging them keeps the realization but leaves zero
    neurons, which violate the positivity requirement of the restricted
    space; each such slot receives a filler direction ``(0, ..., 0, 1, 1+j)``
    that is inactive on every augmented input and parallel to no other
    neuron.  The result agrees with the lift on augmented inputs and lies in
    the restricted space.
    """
    merged = merge_parallel(lift_biased(theta))
    dead = np.flatnonzero(np.abs(merged.A).max(axis=1) == 0)
    if dead.size == 0:
        return balance(merged)
    A, C = merged.A.copy(), merged.C.copy()
    live = unit_directions(A[np.abs(A).max(axis=1) > 0])
    j = 0
    for i in dead:
        while True:
            j += 1
            a = _filler(theta.d, j)
            u = a / np.abs(a).max()
            if live.size == 0 or np.abs(live - u).max(axis=1).min() > DIR_TOL:
                break
        A[i] = a
        C[:, i] = 1.0
        live = np.vstack([live, u]) if live.size else u[None]
    return balance(ShallowNet(A, C))
