import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest
from referencing import Registry, Resource

from bornlab.cli import main
from bornlab.io import SCHEMA_NAMES, dumps_samples, load_schema, loads_samples, read_samples
from bornlab.errors import ValidationError
from bornlab.fit import MeasureSample


def registry():
    resources = []
    for name in SCHEMA_NAMES:
        schema = load_schema(name)
        resources.append((schema["$id"], Resource.from_contents(schema)))
    return Registry().with_resources(resources)


def validate(instance, name):
    jsonschema.Draft202012Validator(load_schema(name), registry=registry()).validate(instance)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_schemas_are_valid_and_versioned():
    for name in SCHEMA_NAMES:
        schema = load_schema(name)
        jsonschema.Draft202012Validator.check_schema(schema)
        assert schema["$id"] == f"urn:bornlab:{name}:v1"


def test_derive_z(capsys):
    code, out, _ = run(capsys, "derive", "--bloch", "0,0,1")
    assert code == 0
    rep = json.loads(out)
    assert rep["c"] == 0 and rep["k"] == [0.5, 0, 0, 0.5]
    assert rep["version"] and rep["config"]["bloch"] == "0,0,1"
    validate(rep["trace"], "derivation_trace")


def test_derive_x(capsys):
    code, out, _ = run(capsys, "derive", "--bloch", "1,0,0")
    assert code == 0 and json.loads(out)["k"] == [0.5, 0.5, 0, 0]


@pytest.mark.parametrize("bloch", ["0,0,2", "0,0", "a,b,c", "0,0,nan", "0.6,0,0.79"])
def test_derive_invalid(capsys, bloch):
    code, out, err = run(capsys, "derive", "--bloch", bloch)
    assert code == 2 and out == "" and "error" in err


@pytest.mark.parametrize(
    "proj, expected", [("0,0,1", 1.0), ("1,0,0", 0.5), ("0,0,-1", 0.0)]
)
def test_prob(capsys, proj, expected):
    code, out, _ = run(capsys, "prob", "--state", "0,0,1", "--proj", proj)
    rep = json.loads(out)
    assert code == 0
    assert rep["probability"] == expected
    assert rep["agreement_defect"] < 1e-12


def test_prob_invalid(capsys):
    assert run(capsys, "prob", "--state", "0,0,1", "--proj", "0,0,3")[0] == 2


def test_check_born(capsys):
    code, out, _ = run(capsys, "check", "--target", "born", "--samples", "2000", "--seed", "1")
    rep = json.loads(out)
    assert code == 0 and rep["all_ok"]
    names = [c["name"] for c in rep["checks"]]
    assert names == ["orthogonal_additivity", "full_additivity", "lattice_axioms", "fit_slice"]
    for c in rep["checks"][:3]:
        validate(c["report"], "additivity_report")
    validate(rep["checks"][3]["report"], "fit_report")
    assert rep["checks"][3]["report"]["verdict"] == "BornLinear"


def test_check_counterexample(capsys):
    code, out, _ = run(capsys, "check", "--target", "counterexample:3", "--samples", "2000")
    rep = json.loads(out)
    assert code == 0
    axioms, fit = rep["checks"]
    assert axioms["report"]["pass"] is True
    assert fit["report"]["verdict"] == "NonGudder" and fit["report"]["rms_residual"] > 0.01


def test_check_gudder(capsys):
    code, out, _ = run(capsys, "check", "--target", "gudder:1,0.5,0,0,0.5", "--samples", "500")
    rep = json.loads(out)
    assert code == 0
    assert rep["checks"][1]["report"]["verdict"] == "GudderQuadratic"


def test_check_expectation_failure_exit_3(capsys):
    # the born suite expects every lattice check to pass; 1e-300 tolerance cannot
    code, out, _ = run(capsys, "check", "--target", "born", "--samples", "50", "--tol", "1e-300")
    assert code == 3 and json.loads(out)["all_ok"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--samples", "0"],
        ["check", "--tol", "-1"],
        ["check", "--target", "banana"],
        ["check", "--target", "counterexample:4"],
        ["check", "--target", "gudder:1,2"],
        ["check", "--seed", "-5"],
        ["nonsense"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_fit_generated_born(capsys):
    code, out, _ = run(capsys, "fit", "--generate", "born", "--bloch", "0,0,1")
    rep = json.loads(out)
    assert code == 0
    validate(rep["fit"], "fit_report")
    assert rep["fit"]["verdict"] == "BornLinear"
    rho = np.array([complex(*p) for p in rep["fit"]["rho_hat"]]).reshape(2, 2)
    np.testing.assert_allclose(rho, np.diag([1, 0]), atol=1e-9)


def test_fit_slice_reports_rank(capsys):
    code, out, _ = run(capsys, "fit", "--generate", "born", "--support", "slice")
    fit = json.loads(out)["fit"]
    assert code == 0 and fit["design_rank"] == 4 and "2c+k0" in fit["identifiable_note"]


def test_fit_odd_power(capsys):
    code, out, _ = run(capsys, "fit", "--generate", "counterexample:3")
    assert code == 0 and json.loads(out)["fit"]["verdict"] == "NonGudder"
    code, _, err = run(capsys, "fit", "--generate", "counterexample:3", "--expect", "linear")
    assert code == 3 and "NonGudder" in err
    assert run(capsys, "fit", "--generate", "born", "--expect", "linear")[0] == 0


def test_fit_counterexample_needs_slice(capsys):
    assert run(capsys, "fit", "--generate", "counterexample:3", "--support", "general")[0] == 2


def test_fit_needs_one_source(capsys):
    assert run(capsys, "fit")[0] == 2
    assert run(capsys, "fit", "--input", "x.json", "--generate", "born")[0] == 2


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_sample_then_fit_file(capsys, tmp_path, fmt):
    path = tmp_path / f"s.{fmt}"
    code, _, _ = run(capsys, "sample", "--generate", "gudder:0.5,0.5,0,0,0.5", "--samples", "60",
                     "--seed", "3", "--format", fmt, "--out", str(path))
    assert code == 0
    samples = read_samples(path)
    assert len(samples) == 60
    if fmt == "json":
        validate(json.loads(path.read_text()), "samples")
    else:
        assert path.read_text().splitlines()[0] == "r0,r1,r2,r3,value"
    code, out, _ = run(capsys, "fit", "--input", str(path))
    fit = json.loads(out)["fit"]
    assert code == 0 and fit["c_hat"] == pytest.approx(0.5, abs=1e-8)
    assert fit["verdict"] == "GudderQuadratic"


@pytest.mark.parametrize(
    "content",
    ["not json", "{}", '[{"r": [1, 2, 3], "value": 1}]', '[{"r": [1, 0, 0, 0]}]',
     '[{"r": [1, 0, 0, 0], "value": NaN}]'],
)
def test_fit_malformed_files(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert run(capsys, "fit", "--input", str(path))[0] == 2


def test_fit_malformed_csv_and_missing(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    assert run(capsys, "fit", "--input", str(path))[0] == 2
    path.write_text("r0,r1,r2,r3,value\n1,0,0,x,1\n")
    assert run(capsys, "fit", "--input", str(path))[0] == 2
    path.write_bytes(b"\xff\xfe\x00")
    assert run(capsys, "fit", "--input", str(path))[0] == 2
    assert run(capsys, "fit", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "fit", "--input", str(tmp_path))[0] == 2


def test_too_few_samples_in_file(capsys, tmp_path):
    path = tmp_path / "few.json"
    path.write_text(dumps_samples([MeasureSample([1, 0, 0, 0], 0.5)] * 3))
    assert run(capsys, "fit", "--input", str(path))[0] == 2


def test_csv_report_format(capsys):
    code, out, _ = run(capsys, "derive", "--bloch", "0,0,1", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "key,value"
    assert "c,0.0" in lines


def test_sample_io_roundtrip():
    samples = [MeasureSample([0.1, -2.0, 1e-300, 3.3], 1 / 3), MeasureSample([1, 0, 0, 0], -0.0)]
    for fmt in ("json", "csv"):
        back = loads_samples(dumps_samples(samples, fmt), fmt)
        for a, b in zip(samples, back):
            assert np.array_equal(a.r, b.r) and a.value == b.value
    with pytest.raises(ValidationError):
        dumps_samples(samples, "xml")


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "bornlab.cli", "derive", "--bloch", "0,0,1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["c"] == 0


def test_library_encodings_match_schemas():
    from bornlab.measure import derive_measure
    from bornlab.pauli import hermitian_to_json, projector_from_bloch

    validate(hermitian_to_json(projector_from_bloch([1, 0, 0])), "hermitian2")
    f, trace = derive_measure([0, 1, 0])
    validate([float(x) for x in f.k], "four_vector")
    validate(trace.to_dict(), "derivation_trace")
    with pytest.raises(jsonschema.ValidationError):
        validate([[1, 0]] * 3, "hermitian2")
