"""Squared loss and the calculus that moves local minima from parameters to realizations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PreconditionError, UsageError
from .io import Dataset
from .network import ShallowNet, evaluate

IMPROVEMENT_TOL = 1e-12
TRIAL_CHUNK = 4096

__all__ = [
    "Dataset",
    "LocalMinVerdict",
    "QualityBoundInputs",
    "empirical_local_min_check",
    "mse_loss",
    "quality_bound",
    "radius_transfer",
]


def mse_loss(net: ShallowNet, data: Dataset) -> float:
    """``(1/n) sum_i |net(x^i) - y^i|_2^2``."""
    if net.d != data.d or net.D != data.D:
        raise UsageError(
            f"dataset dimensions (d={data.d}, D={data.D}) do not match the network (d={net.d}, D={net.D})"
        )
    residual = evaluate(net, data.X) - data.Y
    return float(np.mean(np.sum(residual * residual, axis=1)))


def radius_transfer(r: float, s: float, alpha: float) -> float:
    """Realization-space radius ``(r/s)^(1/alpha)`` under ``(s, alpha)`` inverse stability."""
    if not (r > 0 and s > 0):
        raise UsageError("r and s must be positive")
    if not 0 < alpha <= 1:
        raise UsageError("alpha must lie in (0, 1]")
    if alpha == 0.5:
        # Exact for the common case, e.g. r^2/16 at s = 4.
        q = r / s
        return q * q
    return (r / s) ** (1.0 / alpha)


@dataclass(frozen=True)
class QualityBoundInputs:
    loss_at_g: float
    c: float
    r_prime: float
    dist: float
    eta: float

    def __post_init__(self):
        for name in ("loss_at_g", "c", "r_prime", "dist", "eta"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise UsageError(f"{name} must be finite and nonnegative, got {value}")


def quality_bound(q: QualityBoundInputs) -> float:
    """Upper bound ``L(g) + (2c/r') |g_* - g| eta`` on the loss at a realization-space local minimum."""
    if q.r_prime < 2.0 * q.eta:
        raise PreconditionError(f"radius r'={q.r_prime} is smaller than 2*eta={2.0 * q.eta}")
    if q.eta == 0:
        return float(q.loss_at_g)
    return float(q.loss_at_g + (2.0 * q.c / q.r_prime) * q.dist * q.eta)


@dataclass(frozen=True)
class LocalMinVerdict:
    """Result of a falsification search; absence of a counterexample proves nothing."""

    counterexample_found: bool
    base_loss: float
    best_loss: float
    trials: int
    radius: float
    perturbed: Optional[ShallowNet] = None

    @property
    def verdict(self) -> str:
        if self.counterexample_found:
            return "improving perturbation found"
        return "no counterexample found"

    def to_json(self) -> dict:
        from .io import net_to_json

        return {
            "verdict": self.verdict,
            "counterexample_found": self.counterexample_found,
            "base_loss": self.base_loss,
            "best_loss": self.best_loss,
            "trials": self.trials,
            "radius": self.radius,
            "perturbed": None if self.perturbed is None else net_to_json(self.perturbed),
        }


def empirical_local_min_check(
    net: ShallowNet, data: Dataset, radius: float, trials: int, seed: int = 0
) -> LocalMinVerdict:
    """Try ``trials`` uniform perturbations from the parameter ball ``|Phi - net|_inf <= radius``."""
    if trials < 1:
        raise UsageError("trials must be at least 1")
    if radius < 0:
        raise UsageError("radius must be nonnegative")
    base = mse_loss(net, data)
    rng = np.random.default_rng(seed)
    best_loss, best_net = np.inf, None
    for start in range(0, trials, TRIAL_CHUNK):
        n = min(TRIAL_CHUNK, trials - start)
        A = net.A[None] + rng.uniform(-radius, radius, size=(n,) + net.A.shape)
        C = net.C[None] + rng.uniform(-radius, radius, size=(n,) + net.C.shape)
        # Batched loss over the chunk: Z has shape (trials, samples, neurons).
        Z = np.maximum(np.einsum("tmd,nd->tnm", A, data.X), 0.0)
        out = np.einsum("tnm,tkm->tnk", Z, C)
        losses = np.mean(np.sum((out - data.Y[None]) ** 2, axis=2), axis=1)
        i = int(np.argmin(losses))
        if losses[i] < best_loss:
            best_loss, best_net = float(losses[i]), (A[i], C[i])
    found = bool(best_loss < base - IMPROVEMENT_TOL)
    return LocalMinVerdict(
        counterexample_found=found,
        base_loss=base,
        best_loss=best_loss,
        trials=trials,
        radius=float(radius),
        perturbed=ShallowNet(*best_net) if found else None,
    )
