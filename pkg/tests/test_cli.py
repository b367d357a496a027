import json
import subprocess
import sys
from fractions import Fraction

import pytest

from blform import cli
from blform import datum as dm
from blform.datum import NormalForm


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_datum(tmp_path, d, name="d.json"):
    p = tmp_path / name
    p.write_text(json.dumps(dm.datum_to_json(d)))
    return str(p)


def test_classify_special_datum(tmp_path, capsys):
    code, out, _ = run(["classify", "--input", write_datum(tmp_path, dm.thtsp_datum(Fraction(3)))], capsys)
    body = json.loads(out)
    assert code == 0 and body["normal_form"] == "L4" and body["beta"] == "-2" and body["verified"] is True


def test_classify_l1_identity_like(tmp_path, capsys):
    code, out, _ = run(["classify", "--input", write_datum(tmp_path, dm.datum_of(NormalForm("L1")))], capsys)
    assert code == 0 and json.loads(out)["normal_form"] == "L1"


def test_classify_exit_codes(tmp_path, capsys):
    d = dm.datum_of(NormalForm("L1"))
    bad = dm.BLDatum(d.pi1, d.pi2, d.pi3, d.pi1)
    assert run(["classify", "--input", write_datum(tmp_path, bad)], capsys)[0] == 2
    p = tmp_path / "broken.json"
    p.write_text(json.dumps({"pi1": [["1", "0", "0"]]}))
    assert run(["classify", "--input", str(p)], capsys)[0] == 3


@pytest.mark.parametrize("beta,seed", [(5, None), (1, None), (-3, 11)])
def test_invariant(tmp_path, capsys, beta, seed):
    d = dm.datum_of(NormalForm("L4", Fraction(beta)))
    if seed is not None:
        d = dm.apply_witness(d, dm.random_witness(seed))
    code, out, _ = run(["invariant", "--input", write_datum(tmp_path, d)], capsys)
    assert code == 0 and json.loads(out) == {"cross_ratio": str(beta)}


def test_invariant_undefined(tmp_path, capsys):
    code, _, err = run(["invariant", "--input", write_datum(tmp_path, dm.datum_of(NormalForm("Zero")))], capsys)
    assert code == 4 and "undefined" in err


def write_funcs(tmp_path, funcs):
    p = tmp_path / "f.json"
    p.write_text(json.dumps(funcs))
    return str(p)


GAUSS2 = {"type": "tensor", "fx": {"type": "gaussian", "a": 1}, "fy": {"type": "gaussian", "a": 1}}


def test_evaluate_l40_locally_constant(tmp_path, capsys):
    funcs = {"f": {"type": "box", "lo": -9, "hi": 9}, "G": GAUSS2, "H": GAUSS2}
    code, out, _ = run(["evaluate", "L4:0", "--input", write_funcs(tmp_path, funcs), "--t-max", "5", "--xy-points", "64"], capsys)
    body = json.loads(out)
    assert code == 0 and abs(body["value"][0]) < 1e-12


def test_evaluate_bht_and_not_converged(tmp_path, capsys):
    g = {"type": "gaussian", "a": 1}
    funcs = {"f": {"type": "translate", "shift": [0.4], "of": g}, "g": g, "h": g}
    code, out, _ = run(["evaluate", "bht:0", "--input", write_funcs(tmp_path, funcs)], capsys)
    assert code == 0 and json.loads(out)["converged"] is True
    code, out, err = run(["evaluate", "bht:2", "--input", write_funcs(tmp_path, funcs), "--xy-points", "16"], capsys)
    assert code == 5 and "value" in json.loads(out) and "not converged" in err


def test_experiment_tht_endpoint_csv(capsys):
    code, out, err = run(["experiment", "tht-endpoint", "--delta", "100,1000,10000", "--format", "csv"], capsys)
    assert code == 0 and out.startswith("parameter,value") and "PASS" in err


def test_experiment_boundedness_expected_failure(capsys):
    code, out, _ = run(["experiment", "boundedness", "--form", "L4:0", "--p", "inf,2,2", "--seeds", "2"], capsys)
    assert code == 1 and json.loads(out)["passed"] is False


def test_experiment_oracle_failure(monkeypatch, capsys):
    from blform import experiments as ex

    monkeypatch.setattr(ex, "tht_lower_bound_oracle", lambda d: 1.0)
    assert run(["experiment", "tht-endpoint"], capsys)[0] == 6


def test_selftest_twice_identical(capsys):
    first = run(["selftest"], capsys)
    second = run(["selftest"], capsys)
    assert first[0] == 0 and first == second


def test_selftest_catches_corrupted_targets(monkeypatch, capsys):
    real = dm.normal_form_targets

    def corrupted(nf):
        t = list(real(nf))
        t[0] = t[0] * 2
        return tuple(t)

    monkeypatch.setattr(dm, "normal_form_targets", corrupted)
    monkeypatch.setattr("blform.classifier.normal_form_targets", corrupted)
    assert run(["selftest"], capsys)[0] == 1


def test_console_script_module_entry():
    r = subprocess.run([sys.executable, "-m", "blform.cli", "selftest"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.count("ok") == 5
