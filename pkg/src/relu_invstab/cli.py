"""Command-line interface.

Every subcommand prints one JSON object with a top-level ``"ok"`` flag and
a ``"meta"`` block carrying only the package version.  With ``-o`` the
primary artifact (network, certificate or dataset) is written to the given
file in its own schema.  Exit codes: 0 ok, 1 usage error, 2 violated
condition or failed check.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .augment import augment_point, lift_biased, lift_restricted
from .canonical import canonicalize, check_conditions, in_restricted_space
from .errors import ConditionError, InvStabError, UsageError
from .invstab import GENERAL, RESTRICTED, Certificate, reparametrize, verify_certificate
from .io import Dataset, csv_text, dumps, load_biased_net, load_net, net_to_json, read_json, write_json
from .landscape import (
    QualityBoundInputs,
    empirical_local_min_check,
    mse_loss,
    quality_bound,
    radius_transfer,
)
from .metrics import seminorm, sobolev_distance
from .pathology import FAMILIES, build_case, measure_case

EXIT_OK, EXIT_USAGE, EXIT_CONDITION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument errors become :class:`UsageError` so they share the JSON error path."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON argument: {exc.msg} at char {exc.pos}") from None


def _write_artifact(args, payload) -> dict:
    out = getattr(args, "output", None)
    if out is None:
        return {}
    write_json(out, payload)
    return {"output": str(out)}


def cmd_seminorm(args) -> dict:
    res = seminorm(load_net(args.net))
    return {"ok": True, **res.to_json()}


def cmd_distance(args) -> dict:
    res = sobolev_distance(load_net(args.a), load_net(args.b))
    return {"ok": True, **res.to_json()}


def cmd_check(args) -> dict:
    report = check_conditions(load_net(args.gamma), load_net(args.theta), args.beta)
    return {"ok": report.ok, **report.to_json()}


def cmd_canonicalize(args) -> dict:
    net = canonicalize(load_net(args.net), merge=args.merge, do_balance=args.balance)
    payload = net_to_json(net)
    return {"ok": True, "net": payload, **_write_artifact(args, payload)}


def cmd_reparam(args) -> dict:
    cert = reparametrize(load_net(args.gamma), load_net(args.theta), mode=args.mode, beta=args.beta)
    payload = cert.to_json()
    return {"ok": cert.holds, **payload, **_write_artifact(args, payload)}


def cmd_verify(args) -> dict:
    cert = Certificate.from_json(read_json(args.cert))
    report = verify_certificate(load_net(args.gamma), load_net(args.theta), cert)
    return report.to_json()


def cmd_lift(args) -> dict:
    theta = load_biased_net(args.net)
    lifted = lift_restricted(theta) if args.merge else lift_biased(theta)
    membership = in_restricted_space(lifted)
    payload = net_to_json(lifted)
    return {
        "ok": True,
        "net": payload,
        "restricted": membership.to_json(),
        **_write_artifact(args, payload),
    }


def cmd_augment_data(args) -> dict:
    data = Dataset.from_json(read_json(args.data))
    if data.augmented:
        raise UsageError("dataset is already augmented")
    out = Dataset(augment_point(data.X), data.Y, augmented=True)
    payload = out.to_json()
    return {"ok": True, "n": len(out), "d": out.d, **_write_artifact(args, payload)}


def cmd_pathology(args) -> dict:
    params = {}
    if args.r is not None:
        params["r"] = args.r
    if args.directions is not None:
        params["directions"] = _json_arg(args.directions)
    if args.v is not None:
        params["v"] = _json_arg(args.v)
    results = []
    for k in args.k:
        results.append(measure_case(build_case(args.family, {**params, "k": k}), grid=args.grid))
    payload = {"ok": all(m.ok for m in results), "measurements": [m.to_json() for m in results]}
    if args.json is not None:
        write_json(args.json, payload)
        payload["json"] = str(args.json)
    if args.csv is not None:
        rows = [m.curve_row() for m in results]
        Path(args.csv).write_text(
            csv_text(("k", "measured_distance", "parameter_lower_bound"), rows), encoding="utf-8"
        )
        payload["csv"] = str(args.csv)
    return payload


def cmd_landscape_quality(args) -> dict:
    q = QualityBoundInputs(args.loss_at_g, args.c, args.r_prime, args.dist, args.eta)
    return {"ok": True, "bound": quality_bound(q)}


def cmd_landscape_radius(args) -> dict:
    return {"ok": True, "radius": radius_transfer(args.r, args.s, args.alpha)}


def cmd_landscape_loss(args) -> dict:
    data = Dataset.from_json(read_json(args.data))
    return {"ok": True, "loss": mse_loss(load_net(args.net), data)}


def cmd_landscape_localmin(args) -> dict:
    data = Dataset.from_json(read_json(args.data))
    verdict = empirical_local_min_check(load_net(args.net), data, args.radius, args.trials, args.seed)
    return {"ok": True, **verdict.to_json()}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relu-invstab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("seminorm", help="exact W^{1,inf} seminorm of a network's realization")
    p.add_argument("net")
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("distance", help="exact Sobolev distance between two realizations")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("check", help="check conditions C.1 to C.3 for a pair")
    p.add_argument("gamma")
    p.add_argument("theta")
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("canonicalize", help="zero-pair normalization, optional merging and balancing")
    p.add_argument("net")
    p.add_argument("--merge", action="store_true")
    p.add_argument("--balance", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_canonicalize)

    p = sub.add_parser("reparam", help="build a nearby parametrization with a certificate")
    p.add_argument("gamma")
    p.add_argument("theta")
    p.add_argument("--mode", choices=(RESTRICTED, GENERAL), default=RESTRICTED)
    p.add_argument("--beta", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reparam)

    p = sub.add_parser("verify", help="recheck a certificate from scratch")
    p.add_argument("gamma")
    p.add_argument("theta")
    p.add_argument("cert")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lift", help="lift a biased network to a bias-free one on (x, 1, -1)")
    p.add_argument("net")
    p.add_argument("--no-merge", dest="merge", action="store_false",
                   help="skip merging parallel directions after the lift")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("augment-data", help="append the coordinates 1, -1 to every sample")
    p.add_argument("data")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_augment_data)

    p = sub.add_parser("pathology", help="build and measure a counterexample family")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--k", type=int, nargs="+", required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--directions", help="JSON list of zero-sum directions (opposite_zero)")
    p.add_argument("--v", help="JSON vector v (opposite_zero)")
    p.add_argument("--grid", type=int, help="points per axis for the uniform-norm lattice")
    p.add_argument("--json", help="also write the report to this file")
    p.add_argument("--csv", help="write (k, measured_distance, parameter_lower_bound) rows")
    p.set_defaults(func=cmd_pathology)

    p = sub.add_parser("landscape", help="loss-landscape transfer formulas")
    lsub = p.add_subparsers(dest="landscape_command", required=True, parser_class=_Parser)
    q = lsub.add_parser("quality", help="loss bound at a realization-space local minimum")
    q.add_argument("--loss-at-g", type=float, required=True)
    q.add_argument("--c", type=float, required=True, help="Lipschitz constant of the loss")
    q.add_argument("--r-prime", type=float, required=True)
    q.add_argument("--dist", type=float, required=True)
    q.add_argument("--eta", type=float, required=True)
    q.set_defaults(func=cmd_landscape_quality)
    q = lsub.add_parser("radius", help="realization radius (r/s)^(1/alpha)")
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--s", type=float, default=4.0)
    q.add_argument("--alpha", type=float, default=0.5)
    q.set_defaults(func=cmd_landscape_radius)
    q = lsub.add_parser("loss", help="mean squared error of a network on a dataset")
    q.add_argument("net")
    q.add_argument("data")
    q.set_defaults(func=cmd_landscape_loss)
    q = lsub.add_parser("localmin", help="random search for a loss-decreasing perturbation")
    q.add_argument("net")
    q.add_argument("data")
    q.add_argument("--radius", type=float, required=True)
    q.add_argument("--trials", type=int, default=10_000)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_landscape_localmin)
    return parser


def _error_payload(exc: Exception) -> dict:
    out = {"ok": False, "error": {"type": type(exc).__name__, "message": str(exc)}}
    report = getattr(exc, "report", None)
    if report is not None and hasattr(report, "to_json"):
        out["report"] = report.to_json()
    return out


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        payload = args.func(args)
        code = EXIT_OK if payload.get("ok") else EXIT_CONDITION
    except ConditionError as exc:
        payload, code = _error_payload(exc), EXIT_CONDITION
    except (InvStabError, ValueError) as exc:
        payload, code = _error_payload(exc), EXIT_USAGE
    payload["meta"] = {"version": __version__}
    stdout.write(dumps(_jsonable(payload)))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
