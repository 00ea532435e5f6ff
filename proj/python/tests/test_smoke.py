import json
import math
import os
import subprocess
from fractions import Fraction

import pytest

import glomix

DATA = os.environ.get("GLOMIX_DATA", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def test_lsv_map_values_and_inverse():
    T = glomix.standard_lsv(1.0)
    assert T(0.25) == pytest.approx(0.25 * 1.5, rel=1e-15)
    assert T(0.75) == pytest.approx(0.5, rel=1e-15)
    for j in range(2):
        for xi in (0.1, 0.5, 0.9):
            assert T(T.inverse(j, xi)) == pytest.approx(xi, abs=1e-13)


def test_assumption_checks_pass_for_lsv():
    T = glomix.standard_lsv(1.0)
    for check in (glomix.check_A2, glomix.check_A3, glomix.check_A4, glomix.check_A5prime, glomix.check_A5):
        report = check(T, 2000)
        assert report["passed"], report


def test_endpoint_mismatch_raises():
    with pytest.raises(glomix.EndpointMismatch):
        glomix.generalized_lsv(2.0, 1.0, [0.6, 1.0])


def test_conjugate_closed_form():
    To = glomix.conjugate(glomix.standard_lsv(1.0))
    for y in (0.1, 0.5, 0.9):
        assert To(y) == pytest.approx(2 * y / (1 - y), rel=1e-12)
    for y in (1.5, 4.0):
        assert To(y) == pytest.approx((y + 2) * (y - 1) / (y + 3), rel=1e-12)


def test_psi_roundtrip():
    for x in (1e-6, 0.3, 1.0):
        assert glomix.psi_inv(glomix.psi(x, 2.0), 2.0) == pytest.approx(x, rel=1e-14)


def test_counterexample_exact_fractions():
    a, b = glomix.counterexample_leb_exact(3)
    assert Fraction(a) == Fraction(5, 26)
    assert Fraction(b) == Fraction(32, 53)
    avg = glomix.counterexample_averages(10)
    assert avg["lambda1_at_alpha"] == pytest.approx(9 * math.log(2) / (10 * math.log(10)), abs=1e-12)


def test_transfer_matches_direct_composition():
    T = glomix.standard_lsv(1.0)
    c = glomix.correlations(T, "nu_p", "identity", "box:0.5,1", 3)
    assert c[0] == pytest.approx(math.log(2), rel=1e-9)
    for n in range(4):
        assert c[n] == pytest.approx(glomix.correlation_direct(T, "nu_p", "identity", "box:0.5,1", n), rel=1e-6)


def test_in_process_run_writes_manifest(tmp_path):
    status, log, err = glomix.run("orbit", tmp_path, map_path=os.path.join(DATA, "maps", "lsv_p1.json"), x0=0.3, n=4)
    assert status == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["outputs"] == ["orbit.csv"]
    assert (tmp_path / "orbit.csv").read_text().splitlines()[2].startswith("1,0.47999")


@pytest.mark.skipif("GLOMIX_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_code_for_bad_endpoint(tmp_path):
    cli = os.environ["GLOMIX_CLI"]
    res = subprocess.run([cli, "check", "--map", os.path.join(DATA, "maps", "lsv_bad_endpoint.json"),
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 2
    reports = json.loads((tmp_path / "reports.json").read_text())
    assert reports[0]["assumption_id"] == "A1" and not reports[0]["passed"]
