import json
import subprocess
import sys

import pytest

from orthoforms import cli
from orthoforms import ortho as O
from orthoforms.cache import Cache


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("ORTHOFORMS_CACHE_DIR", str(d))
    return d


def test_expand_examples(capsys, cache_dir):
    code, out, _ = run(capsys, "expand", "phi_0_1", "--prec", "q2")
    assert code == 0
    assert "1 * (z^(-1) + 10 + z)" in out.splitlines()
    code, out, _ = run(capsys, "expand", "theta", "--prec", "q1")
    assert code == 0
    assert "q^(1/8) * (-z^(-1/2) + z^(1/2))" in out.splitlines()


def test_unknown_ids_exit_2(capsys, cache_dir):
    assert run(capsys, "expand", "nosuch")[0] == 2
    assert run(capsys, "grit", "nosuch")[0] == 2
    assert run(capsys, "verify", "nosuch")[0] == 2
    assert run(capsys, "dims", "E8-2")[0] == 2
    assert run(capsys, "phi12", "E8-2")[0] == 2


def test_infeasible_exit_3(capsys, cache_dir):
    # xi order below the xi-valuation of the product
    code, _, err = run(capsys, "borch", "phi1_0_A3(2)", "--prec", "q2,x1")
    assert code == 3 and "infeasible" in err
    # T(2) needs gcd(m, Q) = 1
    assert run(capsys, "hecke", "theta_2A1", "2")[0] == 3


def test_verification_failure_exit_1(capsys, cache_dir, monkeypatch):
    monkeypatch.setattr(O, "dim_from_fj_sum", lambda lat, k: -1)
    code, out, _ = run(capsys, "dims", "A1-2", "--kmax", "8")
    assert code == 1 and "MISMATCH" in out


def test_verify_reports(capsys, cache_dir):
    code, out, _ = run(capsys, "verify", "grit-eq-borch-A1-4", "--json")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "verify", "dims-A1-3", "--kmax", "40", "--json")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "verify", "Gamma_{2,4}(A1(2))", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert {"weights", "jacobian", "dimensions"} <= set(rep["checks"])


def test_dims_table(capsys, cache_dir):
    code, out, _ = run(capsys, "dims", "A1-2", "--kmax", "8", "--json")
    obj = json.loads(out)
    assert code == 0 and obj["pass"]
    assert [(r["k"], r["hilbert"]) for r in obj["rows"]] == [(0, 1), (2, 0), (4, 2), (6, 2), (8, 3)]


def test_cache_hit_is_byte_identical(capsys, cache_dir):
    args = ("borch", "phi12-A1-2", "--prec", "q1,x1", "--json")
    code1, first, _ = run(capsys, *args)
    files = sorted(cache_dir.glob("*.json"))
    assert code1 == 0 and len(files) == 1
    stamp = files[0].stat().st_mtime_ns
    code2, second, _ = run(capsys, *args)
    assert code2 == 0 and second == first
    assert files[0].stat().st_mtime_ns == stamp
    code3, third, _ = run(capsys, "--no-cache", *args)
    assert code3 == 0 and third == first


def test_tampered_cache_recomputes(capsys, cache_dir, caplog):
    args = ("expand", "phi_0_2A1", "--prec", "q2", "--json")
    _, first, _ = run(capsys, *args)
    (entry,) = cache_dir.glob("*.json")
    obj = json.loads(entry.read_text())
    obj["checksum"] = "0" * 64
    entry.write_text(json.dumps(obj))
    _, second, _ = run(capsys, *args)
    assert second == first
    assert "failed validation" in caplog.text
    assert json.loads(entry.read_text())["checksum"] != "0" * 64
    entry.write_text("{not json")
    _, third, _ = run(capsys, *args)
    assert third == first


def test_cache_payload_roundtrip(tmp_path):
    c = Cache(tmp_path)
    key = ("expand", "x", "2")
    c.put(key, '{"a":1}')
    assert c.get(key) == '{"a":1}'
    assert Cache(tmp_path, enabled=False).get(key) is None
    assert Cache(None).get_or_compute(key, lambda: {"b": 2}) == '{"b":2}'


def test_determinism_across_processes(tmp_path):
    cmd = [sys.executable, "-m", "orthoforms", "--no-cache", "grit", "eta6_phi_-1_1/2",
           "--prec", "q2,x2", "--json"]
    outs = {subprocess.run(cmd, capture_output=True, text=True, check=True).stdout for _ in range(2)}
    assert len(outs) == 1


def test_verify_all_runs_concurrently(capsys, cache_dir, monkeypatch):
    monkeypatch.setattr(cli, "all_ids", lambda: ["dims-A1-2", "dims-A1-3", "hecke-quotient-2A1-2"])
    code, out, _ = run(capsys, "verify", "--all", "--jobs", "2", "--kmax", "12", "--json")
    obj = json.loads(out)
    assert code == 0 and obj["pass"] and len(obj["reports"]) == 3


def test_parse_prec():
    assert cli.parse_prec("q3,x2", 1, 1) == (3, 2)
    assert cli.parse_prec("2", 1, 5) == (2, 5)
    assert cli.parse_prec(None, 1) == (1, None)
    assert cli.lattice_name("A1-2") == "A1(2)"
