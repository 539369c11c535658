import io
import json
import subprocess
import sys

import pytest

from relu_invstab import __version__
from relu_invstab.cli import run
from relu_invstab.io import load_net, net_to_json, read_json
from relu_invstab.pathology import build_case


def call(*argv):
    buf = io.StringIO()
    code = run(list(map(str, argv)), stdout=buf)
    return code, json.loads(buf.getvalue()), buf.getvalue()


def write(path, payload):
    path.write_text(json.dumps(payload))
    return path


@pytest.fixture
def ex23(tmp_path):
    case = build_case("redundant", {"k": 2})
    return write(tmp_path / "gamma.json", net_to_json(case.gamma)), write(
        tmp_path / "g2.json", net_to_json(case.g_param)
    )


@pytest.fixture
def restricted_pair(tmp_path):
    g = write(tmp_path / "G.json", {"d": 3, "m": 1, "D": 1, "A": [[1, 1, 1]], "C": [[1]]})
    t = write(tmp_path / "T.json", {"d": 3, "m": 1, "D": 1, "A": [[2, 2, 2]], "C": [[2]]})
    return g, t


class TestCommands:
    def test_distance(self, ex23):
        code, out, _ = call("distance", *ex23)
        assert code == 0 and out["ok"] and out["value"] == 0.5

    def test_seminorm_zero(self, tmp_path):
        z = write(tmp_path / "z.json", {"d": 2, "m": 1, "D": 1, "A": [[0, 0]], "C": [[0]]})
        code, out, _ = call("seminorm", z)
        assert code == 0 and out["value"] == 0.0

    def test_reparam_general_redundant(self, ex23):
        code, out, _ = call("reparam", *ex23, "--mode", "general")
        assert code == 2 and not out["ok"]
        assert out["report"]["c2"] is False

    def test_reparam_then_verify(self, restricted_pair, tmp_path):
        cert = tmp_path / "cert.json"
        code, out, _ = call("reparam", *restricted_pair, "-o", cert)
        assert code == 0 and out["achieved"] == 1.0
        code, out, _ = call("verify", *restricted_pair, cert)
        assert code == 0 and out["ok"]

    def test_verify_tampered(self, restricted_pair, tmp_path):
        cert = tmp_path / "cert.json"
        call("reparam", *restricted_pair, "-o", cert)
        payload = read_json(cert)
        payload["r"] = 0.01
        write(cert, payload)
        code, out, _ = call("verify", *restricted_pair, cert)
        assert code == 2 and not out["bound_ok"]

    def test_check(self, ex23):
        code, out, _ = call("check", *ex23, "--beta", "5")
        assert code == 2 and out["c2"] is False

    def test_canonicalize_round_trip(self, ex23, tmp_path):
        dest = tmp_path / "canon.json"
        code, out, _ = call("canonicalize", ex23[0], "--merge", "--balance", "-o", dest)
        assert code == 0
        net = load_net(dest)
        assert net_to_json(net) == out["net"]

    def test_lift(self, tmp_path):
        src = write(tmp_path / "b.json", {"d": 1, "m": 1, "D": 1, "A": [[2]], "C": [[1]], "b": [-1], "e": [0.5]})
        dest = tmp_path / "l.json"
        code, out, _ = call("lift", src, "-o", dest)
        assert code == 0 and out["restricted"]["ok"]
        assert load_net(dest).d == 3

    def test_augment_data(self, tmp_path):
        src = write(tmp_path / "d.json", {"samples": [{"x": [0.3, -0.7], "y": [1]}]})
        dest = tmp_path / "a.json"
        code, out, _ = call("augment-data", src, "-o", dest)
        assert code == 0
        assert read_json(dest) == {"samples": [{"x": [0.3, -0.7, 1.0, -1.0], "y": [1.0]}], "augmented": True}
        code, _, _ = call("augment-data", dest)
        assert code == 1

    def test_pathology_csv(self, tmp_path):
        csv = tmp_path / "c.csv"
        report = tmp_path / "r.json"
        code, out, _ = call("pathology", "opposite_pair", "--k", "1", "2", "--csv", csv, "--json", report)
        assert code == 0 and len(out["measurements"]) == 2
        assert csv.read_text().splitlines()[0] == "k,measured_distance,parameter_lower_bound"
        assert read_json(report)["ok"]

    def test_pathology_exploding_null_bound(self, tmp_path):
        code, out, _ = call("pathology", "exploding", "--k", "2")
        assert code == 0 and out["measurements"][0]["param_lower_bound"] is None

    def test_landscape(self, tmp_path):
        code, out, _ = call("landscape", "radius", "--r", "2")
        assert out["radius"] == 0.25
        code, out, _ = call(
            "landscape", "quality", "--loss-at-g", "1", "--c", "2", "--r-prime", "4", "--dist", "3", "--eta", "1"
        )
        assert out["bound"] == 4.0
        code, out, _ = call(
            "landscape", "quality", "--loss-at-g", "1", "--c", "2", "--r-prime", "1", "--dist", "3", "--eta", "1"
        )
        assert code == 2

    def test_landscape_localmin(self, tmp_path):
        case = build_case("local_min", {"k": 1})
        net = write(tmp_path / "n.json", net_to_json(case.gamma))
        data = write(tmp_path / "d.json", case.data.to_json())
        code, out, _ = call("landscape", "loss", net, data)
        assert out["loss"] == 0.5
        code, out, _ = call("landscape", "localmin", net, data, "--radius", "0.49", "--trials", "2000")
        assert code == 0 and out["verdict"] == "no counterexample found"


class TestContract:
    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"d": 2,')
        code, out, _ = call("seminorm", bad)
        assert code == 1 and "line 1" in out["error"]["message"]

    def test_unknown_command(self):
        code, out, _ = call("frobnicate")
        assert code == 1 and not out["ok"]

    def test_meta_version_only(self, ex23):
        _, out, _ = call("distance", *ex23)
        assert out["meta"] == {"version": __version__}

    def test_byte_identical(self, ex23):
        assert call("distance", *ex23)[2] == call("distance", *ex23)[2]
        assert call("pathology", "redundant", "--k", "3")[2] == call("pathology", "redundant", "--k", "3")[2]

    def test_module_entry_point(self, ex23):
        proc = subprocess.run(
            [sys.executable, "-m", "relu_invstab", "distance", *map(str, ex23)], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["value"] == 0.5
