import json
from importlib import resources

import jsonschema
import pytest

from hkcollapse.cli import main

SCHEMA = json.loads(resources.files("hkcollapse").joinpath("data/summary_schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_scan_ov_writes_valid_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "scan", "ov", "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0] == "eps,decay_C,boundary_min_V,harnack_deviation"
    doc = json.loads((tmp_path / "ov.json").read_text())
    jsonschema.validate(doc, SCHEMA)
    assert doc["passed"] and doc["seed"] == 0
    assert (tmp_path / "ov.csv").read_bytes().count(b"\r") == 0


def test_scan_deterministic_across_threads_and_dirs(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "scan", "ov", "--out", str(a))[0] == 0
    assert run(capsys, "scan", "ov", "--out", str(b), "--threads", "3")[0] == 0
    for name in ("ov.csv", "ov.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verify_subset(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--only", "C2", "--out", str(tmp_path))
    assert code == 0
    assert out.startswith("PASS C2")
    doc = json.loads((tmp_path / "verify.json").read_text())
    jsonschema.validate(doc, SCHEMA)


def test_unknown_check(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--only", "C99", "--out", str(tmp_path))
    assert code == 2 and "C99" in err


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"seed": }')
    code, _, err = run(capsys, "scan", "ov", "--config", str(bad), "--out", str(tmp_path))
    assert code == 2 and "bad.json:1:10" in err
    unk = tmp_path / "unk.json"
    unk.write_text('{"colour": 1}')
    assert run(capsys, "scan", "ov", "--config", str(unk))[0] == 2
    area = tmp_path / "area.json"
    area.write_text('{"fibration": {"h_series": [[-2, 0]]}}')
    code, _, err = run(capsys, "scan", "ov", "--config", str(area))
    assert code == 2 and "Im(conj(tau1) tau2) > 0" in err


def test_unwritable_output(capsys):
    assert run(capsys, "scan", "ov", "--out", "/proc/nope")[0] == 2


def test_bad_epsilons(tmp_path, capsys):
    assert run(capsys, "scan", "ov", "--epsilons", "0.1,0.2", "--out", str(tmp_path))[0] == 2


def test_argparse_errors():
    with pytest.raises(SystemExit) as e:
        main(["scan", "nope"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["scan", "ov", "--threads", "0"])
    assert e.value.code == 2


def test_positivity_failure_exits_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"fibration": {"h_series": [[0, 0]]}, "eps_schedule": [5]}')
    code, _, err = run(capsys, "verify", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 1 and "V = " in err


def test_eval_v0(capsys):
    code, out, _ = run(capsys, "eval", "v0", "--u", "0.25", "--y", "0.5", "--eps", "0.5")
    assert code == 0
    diff = float(out.splitlines()[2].split()[1])
    assert diff < 1e-12


def test_eval_f_epsilon_outside(capsys):
    code, out, _ = run(capsys, "eval", "f-epsilon", "--x2", "0.01", "--y", "0.75", "--eps", "0.1")
    assert code == 0 and out.split()[1] == "0.0"


def test_eval_curvature_constant(capsys):
    code, out, _ = run(capsys, "eval", "curvature-norm", "--u", "0.3", "--field", "constant")
    assert code == 0 and float(out.split()[1]) == 0.0


def test_eval_missing_argument(capsys):
    assert run(capsys, "eval", "v0", "--u", "0.2")[0] == 2
