"""End-to-end runs of every subcommand with schema-validated reports."""

import json

from phasebell.cli import main
from phasebell.reports import load_schema, validate_report


def _run(tmp_path, argv):
    code = main(argv + ["--out", str(tmp_path)])
    name = argv[0]
    report = json.loads((tmp_path / f"{name}.json").read_text())
    validate_report(report)
    return code, report


def test_schema_is_wellformed():
    schema = load_schema()
    assert schema["required"] and schema["properties"]["schema_version"]


def test_classical_counterexample(tmp_path):
    code, report = _run(tmp_path, ["classical-counterexample"])
    assert code == 0 and report["passed"]
    assert report["results"]["bell"]["S"] == 4.0
    assert report["results"]["bell"]["S_exact"] == "4"


def test_classical_counterexample_misaligned(tmp_path):
    code, report = _run(tmp_path, ["classical-counterexample", "--misalign", "q1"])
    assert code == 0
    assert abs(report["results"]["bell"]["S"]) <= 4.0


def test_classical_counterexample_rejects_bad_atoms(tmp_path, capsys):
    code = main(["classical-counterexample", "--atoms"] + ["0"] * 8 + ["--out", str(tmp_path)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_psi_plus_needs_containing_box(tmp_path, capsys):
    code = main(["three-marginal", "--state", "psi-plus", "--L", "10",
                 "--out", str(tmp_path)])  # default box 8 < L
    assert code == 2


def test_quantum_violation_small(tmp_path):
    code, report = _run(tmp_path, [
        "quantum-violation", "--L", "1e2", "--L", "1e4", "--L", "1e6",
        "--grid-check-L", "2.0", "--n", "512", "--box", "32",
    ])
    assert code == 0 and report["passed"]
    rows = report["tables"]["cutoff_sweep"]
    svals = [r["S"] for r in rows]
    assert svals == sorted(svals)
    assert report["results"]["grid_route"]["difference"] <= 1e-3


def test_quantum_violation_negative_sign(tmp_path):
    code, report = _run(tmp_path, [
        "quantum-violation", "--L", "1e2", "--L", "1e4", "--sign", "-",
        "--grid-check-L", "2.0", "--n", "512", "--box", "32",
    ])
    assert code == 0
    svals = [r["S"] for r in report["tables"]["cutoff_sweep"]]
    assert all(s < 0 for s in svals) and svals == sorted(svals, reverse=True)


def test_operator_checks(tmp_path):
    code, report = _run(tmp_path, ["operator-checks", "--n", "16", "--refinement", "16"])
    assert code == 0 and report["passed"]
    assert report["results"]["witness"]["witness_value"] < 0
    assert report["results"]["spectrum"]["lambda_min"] < 0


def test_three_marginal_gaussian(tmp_path):
    code, report = _run(tmp_path, [
        "three-marginal", "--state", "gaussian", "--families", "3", "--n", "16",
    ])
    assert code == 0 and report["passed"]
    assert len(report["tables"]["families"]) == 3


def test_three_marginal_tamper_aborts(tmp_path):
    code, report = _run(tmp_path, [
        "three-marginal", "--state", "random", "--families", "2", "--tamper",
    ])
    assert code == 1 and not report["passed"]


def test_three_marginal_alternative_drop(tmp_path):
    code, report = _run(tmp_path, [
        "three-marginal", "--state", "random", "--families", "2",
        "--drop-marginal", "pq",
    ])
    assert code == 0 and report["passed"]


def test_three_marginal_sqrt_profile_state(tmp_path):
    code, report = _run(tmp_path, [
        "three-marginal", "--state", "psi-plus", "--L", "10",
        "--n", "32", "--box", "16", "--families", "3",
    ])
    assert code == 0 and report["passed"]


def test_wigner_gaussian(tmp_path):
    code, report = _run(tmp_path, ["wigner", "--state", "gaussian"])
    assert code == 0 and report["passed"]


def test_wigner_oscillator(tmp_path):
    code, report = _run(tmp_path, ["wigner", "--state", "ho01", "--n", "64"])
    assert code == 0 and report["passed"]
    assert report["results"]["origin_value"] < 0


def test_selftest(tmp_path):
    code, report = _run(tmp_path, ["selftest"])
    assert code == 0 and report["passed"]


def test_csv_export(tmp_path):
    code, _ = _run(tmp_path, [
        "quantum-violation", "--L", "1e2", "--L", "1e4",
        "--grid-check-L", "2.0", "--n", "512", "--box", "32", "--format", "csv",
    ])
    assert code == 0
    csvs = list(tmp_path.glob("*.csv"))
    assert csvs and "L" in csvs[0].read_text().splitlines()[0]


def test_out_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("PHASEBELL_OUT", str(tmp_path / "envout"))
    code = main(["selftest"])
    assert code == 0
    assert (tmp_path / "envout" / "selftest.json").exists()
