import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cheblcu.cli import SCHEMA, main, render
from cheblcu.hermitian import matrix_to_document
from cheblcu.instances import random_sparse_hermitian


def write_matrix(path, A):
    path.write_text(json.dumps(matrix_to_document(A)))
    return str(path)


@pytest.fixture
def diag_half(tmp_path):
    doc = {"dim": 2, "entries": [[1, 1, 0.5, 0.0], [2, 2, 0.5, 0.0]]}
    path = tmp_path / "half.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def identity2(tmp_path):
    doc = {"dim": 2, "entries": [[1, 1, 1.0, 0.0], [2, 2, 1.0, 0.0]]}
    path = tmp_path / "eye.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def random4(tmp_path, rng):
    return write_matrix(tmp_path / "r4.json", random_sparse_hermitian(rng, 4, 2))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out else None), out.err


class TestAnalyze:
    def test_exp_on_identity(self, capsys, identity2):
        code, rep, _ = run(capsys, "analyze", "--matrix", identity2)
        assert code == 0
        assert rep["schema"] == SCHEMA
        assert rep["plan"]["L"] == 22
        assert rep["plan"]["gamma_weight"] == pytest.approx(math.e, rel=1e-6)
        assert rep["input"]["d"] == 1

    def test_monomial_is_exact(self, capsys, random4):
        code, rep, _ = run(capsys, "analyze", "--matrix", random4, "--function", "monomial:3")
        assert code == 0
        assert rep["plan"]["L"] == 4
        assert rep["plan"]["exact"] is True
        np.testing.assert_allclose(rep["plan"]["gamma"], [0.0, 6.0, 0.0, 2.0], atol=1e-14)

    def test_probability_bound_and_rounds(self, capsys, diag_half):
        _, rep, _ = run(capsys, "analyze", "--matrix", diag_half, "--function", "identity")
        assert rep["plan"]["probability_bound"] == pytest.approx(0.25)
        assert rep["plan"]["predicted_rounds"] == 1


class TestApply:
    def test_exp_random(self, capsys, random4):
        code, rep, _ = run(capsys, "apply", "--matrix", random4)
        assert code == 0
        assert rep["passed"]
        assert rep["results"]["fidelity"] >= 1 - 1e-5
        assert rep["checks"]["probability_bound_unsquared"]["asserted"] is False

    def test_monomial_exact(self, capsys, random4):
        code, rep, _ = run(capsys, "apply", "--matrix", random4, "--function", "monomial:2")
        assert code == 0
        assert rep["results"]["distance"] <= 1e-10
        assert rep["checks"]["exactness"]["passed"]

    @pytest.mark.parametrize("full", [False, True])
    def test_amplify(self, capsys, diag_half, full):
        argv = ["apply", "--matrix", diag_half, "--function", "identity", "--amplify"]
        code, rep, _ = run(capsys, *argv, *(["--full"] if full else []))
        assert code == 0
        amp = rep["results"]["amplification"]
        assert amp["mode"] == ("explicit" if full else "analytic")
        assert amp["rounds"] == 1
        assert amp["initial_probability"] == pytest.approx(0.25, abs=1e-12)
        assert amp["amplified_probability"] == pytest.approx(1.0, abs=1e-10)

    def test_full_agreement(self, capsys, random4):
        code, rep, _ = run(capsys, "apply", "--matrix", random4, "--function", "polynomial:0.5,1,0.25", "--full")
        assert code == 0
        assert rep["checks"]["full_agreement"]["passed"]

    def test_state_file(self, capsys, tmp_path, diag_half):
        state = tmp_path / "s.json"
        state.write_text(json.dumps([[3.0, 0.0], [0.0, 4.0]]))
        code, rep, _ = run(capsys, "apply", "--matrix", diag_half, "--function", "identity", "--state", str(state))
        assert code == 0
        np.testing.assert_allclose(rep["results"]["state"], [[0.6, 0.0], [0.0, 0.8]], atol=1e-12)


class TestExitCodes:
    def test_full_too_large_is_capability_error(self, capsys, random4):
        code, rep, err = run(capsys, "apply", "--matrix", random4, "--full")
        assert code == 3
        assert rep is None
        assert "capability" in err

    @pytest.mark.parametrize("eps", ["0", "-1e-3", "0.75", "nan"])
    def test_bad_eps(self, capsys, random4, eps):
        assert run(capsys, "analyze", "--matrix", random4, f"--eps={eps}")[0] == 2

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["analyze"])
        assert exc.value.code == 2

    def test_missing_matrix(self, capsys, tmp_path):
        assert run(capsys, "analyze", "--matrix", str(tmp_path / "nope.json"))[0] == 2

    def test_unknown_function(self, capsys, random4):
        assert run(capsys, "analyze", "--matrix", random4, "--function", "sine")[0] == 2

    def test_bad_state(self, capsys, tmp_path, diag_half):
        state = tmp_path / "s.json"
        state.write_text(json.dumps([[1.0, 0.0]]))
        assert run(capsys, "apply", "--matrix", diag_half, "--state", str(state))[0] == 2

    def test_vanishing_output(self, capsys, tmp_path):
        doc = {"dim": 2, "entries": [[1, 1, 0.5, 0.0]]}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        state = tmp_path / "s.json"
        state.write_text(json.dumps([[0.0, 0.0], [1.0, 0.0]]))
        code, _, _ = run(capsys, "apply", "--matrix", str(path), "--function", "identity", "--state", str(state))
        assert code == 2

    def test_unknown_suite(self, capsys):
        assert run(capsys, "verify", "--suite", "bogus")[0] == 2

    def test_unwritable_out(self, capsys, tmp_path, random4):
        target = tmp_path / "missing-dir" / "r.json"
        assert run(capsys, "analyze", "--matrix", random4, "--out", str(target))[0] == 2


class TestVerify:
    def test_byte_identical(self, capsys):
        assert main(["verify", "--suite", "cheb", "--seed", "3"]) == 0
        first = capsys.readouterr().out
        assert main(["verify", "--suite", "cheb", "--seed", "3"]) == 0
        assert capsys.readouterr().out == first

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        assert main(["verify", "--suite", "walk", "--out", str(target)]) == 0
        assert target.read_text() == capsys.readouterr().out
        rep = json.loads(target.read_text())
        assert rep["passed"] and rep["suite"] == "walk"
        assert all(c["passed"] for c in rep["checks"])

    def test_render_nonfinite_as_null(self):
        text = render({"b": float("inf"), "a": np.float64(0.1), "c": np.int64(2)})
        assert json.loads(text) == {"a": 0.1, "b": None, "c": 2}
        assert text.index('"a"') < text.index('"b"')

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cheblcu", "verify", "--suite", "cheb"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["passed"]
