import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from isingtoda import checks, cli, offdiag
from isingtoda.cli import EXIT_COMPUTE, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main
from isingtoda.series import GradedSeries as G

GOLDEN = Path(__file__).parent / "golden" / "v1"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("args, golden", [
    (["formfactor", "--n", "2", "--M", "0", "--N", "1", "--s-order", "40"], "formfactor_n2_M0_N1_s40.json"),
    (["diag", "--regime", "minus", "--N", "2", "--lambda-order", "6", "--s-order", "40"], "diag_minus_N2_x6_s40.json"),
    (["diag", "--regime", "plus", "--N", "3", "--lambda-order", "3", "--s-order", "24", "--engine", "closed"],
     "diag_plus_N3_closed.json"),
    (["verify", "--suite", "ansatz-tables", "--no-timing"], "verify_ansatz_tables.json"),
    (["offdiag", "--config", str(GOLDEN / "offdiag_plus.cfg")], "offdiag_plus_x5_s20.csv"),
])
def test_golden_outputs(args, golden, capsys):
    code, out, _ = run(args, capsys)
    assert code == EXIT_OK
    assert out == (GOLDEN / golden).read_text()


def test_formfactor_matches_closed_form(capsys):
    code, out, _ = run(["formfactor", "--n", "2", "--M", "0", "--N", "1", "--s-order", "40"], capsys)
    ser = G.from_json_obj(json.loads(out)["series"])
    want = offdiag.form_factor_01(2).to_series(*offdiag._ke_series(44))
    assert ser.agrees_with(want, 40)


def test_diag_minus_n2(capsys):
    code, out, _ = run(["diag", "--regime", "minus", "--N", "2", "--lambda-order", "6", "--s-order", "40"], capsys)
    obj = json.loads(out)
    lam2 = G.from_json_obj(obj["form_factors"][2])
    # lambda^2 of C_2^- after stripping (1-t)^{1/4}: leading 5/256 t^3
    assert lam2.valuation() == 12 and lam2[12] == F(5, 256)
    series = obj["series"]
    x0 = {e: F(c) for k, e, c in series["terms"] if k == 0}
    omt = G({0: 1, 4: -1}, 40).pow_rational(F(1, 4))
    assert G(x0, 40) == omt


def test_diag_engines_agree(capsys):
    base = ["diag", "--regime", "plus", "--N", "3", "--lambda-order", "3", "--s-order", "24"]
    _, a, _ = run(base, capsys)
    _, b, _ = run(base + ["--engine", "closed"], capsys)
    assert json.loads(a)["series"] == json.loads(b)["series"]


def test_usage_errors(capsys):
    assert run(["diag", "--N", "0", "--lambda-order", "0"], capsys)[0] == EXIT_USAGE
    assert run(["diag", "--s-order", "3"], capsys)[0] == EXIT_USAGE
    assert run(["formfactor", "--n", "1", "--engine", "closed"], capsys)[0] == EXIT_USAGE
    assert run(["verify", "--suite", "nope"], capsys)[0] == EXIT_USAGE
    assert run(["frobnicate"], capsys)[0] == EXIT_USAGE
    assert run(["formfactor"], capsys)[0] == EXIT_USAGE


def test_computational_failure(capsys):
    code, _, err = run(["formfactor", "--n", "1", "--M", "0", "--N", "0", "--s-value", "1.5"], capsys)
    assert code == EXIT_COMPUTE and "computation failed" in err


def test_truncation_exhausted_exit(monkeypatch, capsys):
    def boom(cfg):
        from isingtoda.errors import TruncationExhausted
        raise TruncationExhausted("no orders left")
    monkeypatch.setitem(cli.COMMANDS, "diag", boom)
    assert run(["diag"], capsys)[0] == EXIT_COMPUTE


def test_verify_failure_exit(monkeypatch, capsys):
    monkeypatch.setitem(checks.SUITES, "ansatz-tables", lambda opt: [checks.Check("always red", lambda: (False, "red"))])
    code, out, _ = run(["verify", "--suite", "ansatz-tables", "--format", "text"], capsys)
    assert code == EXIT_VERIFY and "FAIL" in out


def test_verify_sigma(capsys):
    code, out, _ = run(["verify", "--suite", "sigma-residual", "--N", "3"], capsys)
    obj = json.loads(out)
    assert code == EXIT_OK and obj["passed"] and len(obj["checks"]) == 8
    assert all("seconds" in c for c in obj["checks"])


def test_thread_count_does_not_change_output(monkeypatch, capsys):
    args = ["verify", "--suite", "sigma-residual", "--suite", "elliptic-identities", "--N", "2", "--no-timing"]
    one = run(args + ["--threads", "1"], capsys)[1]
    monkeypatch.setenv("ISING_THREADS", "4")
    four = run(args, capsys)[1]
    assert one == four


def test_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("regime = plus\nN = 1\nlambda-order = 3\ns_order = 12\n")
    rc, _ = cli.build_config(["diag", "--config", str(cfg), "--N", "2"])
    assert (rc.regime, rc.N, rc.lambda_order, rc.s_order) == ("plus", 2, 3, 12)
    cfg.write_text("colour = blue\n")
    with pytest.raises(cli.UsageError):
        cli.build_config(["diag", "--config", str(cfg)])


def test_formats_and_output_file(tmp_path, capsys):
    path = tmp_path / "out.txt"
    assert main(["offdiag", "--n", "2", "--s-order", "12", "--format", "text", "--output", str(path)]) == EXIT_OK
    assert path.read_text().startswith("C^(2)(0,1) = ")
    code, out, _ = run(["formfactor", "--n", "1", "--M", "0", "--N", "1", "--s-order", "8", "--format", "csv"], capsys)
    assert out.splitlines()[:2] == ["term,s_exponent,coefficient", "s,2,1/2"]


def test_numeric_outputs(capsys):
    _, out, _ = run(["offdiag", "--regime", "minus", "--s-value", "0.5", "--lambda-value", "1"], capsys)
    obj = json.loads(out)
    assert abs(float(obj["value"]) - float(offdiag.c01_lambda_one_expected("minus", "0.5"))) < 1e-12
    _, out, _ = run(["formfactor", "--n", "2", "--M", "0", "--N", "0", "--s-value", "0.5", "--tol", "1e-12"], capsys)
    obj = json.loads(out)
    assert set(obj) == {"s", "n", "M", "N", "value", "est_error"}


def test_console_script():
    done = subprocess.run([sys.executable, "-m", "isingtoda.cli", "diag", "--lambda-order", "0"], capture_output=True)
    assert done.returncode == EXIT_USAGE
