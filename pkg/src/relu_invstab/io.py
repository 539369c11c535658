"""JSON and CSV formats.

Network JSON: ``{"d", "m", "D", "A", "C"}`` plus ``"b"`` and ``"e"`` for
biased networks, emitted in that order.  Unknown keys are rejected.

Dataset JSON: ``{"samples": [{"x": [...], "y": [...]}, ...], "augmented": bool}``.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Union

import numpy as np

from .errors import UsageError
from .network import BiasedShallowNet, ShallowNet

NET_KEYS = ("d", "m", "D", "A", "C", "b", "e")
NetLike = Union[ShallowNet, BiasedShallowNet]


def net_to_json(net: NetLike) -> dict:
    out = {
        "d": net.d,
        "m": net.m,
        "D": net.D,
        "A": net.A.tolist(),
        "C": net.C.tolist(),
    }
    if isinstance(net, BiasedShallowNet):
        out["b"] = net.b.tolist()
        out["e"] = net.e.tolist()
    return out


def _int_field(payload: dict, key: str) -> int:
    value = payload.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise UsageError(f"network field {key!r} must be an integer")
    return value


def net_from_json(payload: dict, allow_bias: bool = True) -> NetLike:
    """Parse a network object; returns a biased network when ``b``/``e`` are present."""
    if not isinstance(payload, dict):
        raise UsageError("network JSON must be an object")
    unknown = sorted(set(payload) - set(NET_KEYS))
    if unknown:
        raise UsageError(f"unknown network field(s): {', '.join(unknown)}")
    missing = [k for k in NET_KEYS[:5] if k not in payload]
    if missing:
        raise UsageError(f"missing network field(s): {', '.join(missing)}")
    d, m, D = (_int_field(payload, k) for k in ("d", "m", "D"))
    try:
        A = np.array(payload["A"], dtype=np.float64)
        C = np.array(payload["C"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed weight matrix: {exc}") from None
    if A.shape != (m, d):
        raise UsageError(f"A has shape {A.shape}, expected ({m}, {d})")
    if C.shape != (D, m):
        raise UsageError(f"C has shape {C.shape}, expected ({D}, {m})")
    has_b, has_e = "b" in payload, "e" in payload
    if has_b != has_e:
        raise UsageError("biased networks need both 'b' and 'e'")
    if has_b:
        if not allow_bias:
            raise UsageError("expected a bias-free network (no 'b'/'e' fields)")
        b = np.array(payload["b"], dtype=np.float64)
        e = np.array(payload["e"], dtype=np.float64)
        if b.shape != (m,) or e.shape != (D,):
            raise UsageError(f"b must have length {m} and e length {D}")
        return BiasedShallowNet(A, b, C, e)
    return ShallowNet(A, C)


def read_json(path: Union[str, Path]):
    """Load JSON, turning syntax errors into :class:`UsageError` with position info."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} column {exc.colno} (char {exc.pos})"
        ) from None


def load_net(path, allow_bias: bool = False) -> NetLike:
    return net_from_json(read_json(path), allow_bias=allow_bias)


def load_biased_net(path) -> BiasedShallowNet:
    net = net_from_json(read_json(path), allow_bias=True)
    if isinstance(net, ShallowNet):
        net = BiasedShallowNet(net.A, np.zeros(net.m), net.C, np.zeros(net.D))
    return net


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def write_json(path, payload) -> None:
    Path(path).write_text(dumps(payload), encoding="utf-8")


class Dataset:
    """Samples ``(x^i, y^i)`` for the mean squared error."""

    def __init__(self, X, Y, augmented: bool = False):
        X = np.array(X, dtype=np.float64)
        Y = np.array(Y, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise UsageError("dataset needs matching numbers of inputs and labels")
        if X.shape[0] == 0:
            raise UsageError("dataset must be nonempty")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise UsageError("dataset contains non-finite values")
        X.setflags(write=False)
        Y.setflags(write=False)
        self.X, self.Y, self.augmented = X, Y, bool(augmented)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def D(self) -> int:
        return self.Y.shape[1]

    def to_json(self) -> dict:
        return {
            "samples": [{"x": x.tolist(), "y": y.tolist()} for x, y in zip(self.X, self.Y)],
            "augmented": self.augmented,
        }

    @classmethod
    def from_json(cls, payload) -> "Dataset":
        if not isinstance(payload, dict) or "samples" not in payload:
            raise UsageError("dataset JSON must be an object with a 'samples' list")
        unknown = sorted(set(payload) - {"samples", "augmented"})
        if unknown:
            raise UsageError(f"unknown dataset field(s): {', '.join(unknown)}")
        samples = payload["samples"]
        if not isinstance(samples, list) or not samples:
            raise UsageError("'samples' must be a nonempty list")
        try:
            X = [s["x"] for s in samples]
            Y = [s["y"] for s in samples]
        except (KeyError, TypeError):
            raise UsageError("each sample needs 'x' and 'y'") from None
        try:
            return cls(X, Y, bool(payload.get("augmented", False)))
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"malformed dataset: {exc}") from None


def csv_text(header, rows) -> str:
    """Header row, then comma-separated values with 17 significant digits."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{float(v):.17g}" for v in row])
    return buf.getvalue()
