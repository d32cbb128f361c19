import json
import subprocess
import sys

import pytest

from adjent.cli import main

KERNEL_E0 = '{"kind":"kernel","rows":[[[0,1]]]}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_compute_left_shift(capsys):
    code, rep = report(capsys, "compute", "--op", '{"p":2,"kind":"left_shift"}', "--subgroup", KERNEL_E0)
    assert code == 0 and rep["schema"] == "adjent.report/1"
    member = rep["results"]["members"][0]
    assert member["value"]["text"] == "log 2" and member["trace"]["alpha_final"] == 2
    assert "timing_s" not in rep


def test_compute_right_shift_zero(capsys):
    code, rep = report(capsys, "compute", "--op", '{"p":2,"kind":"right_shift"}', "--subgroup", KERNEL_E0)
    assert code == 0 and rep["results"]["members"][0]["value"]["kind"] == "zero"


def test_compute_trajectory_mode(capsys):
    code, rep = report(capsys, "compute", "--mode", "h", "--op", "right_shift", "--finite-subgroup", "e0")
    assert code == 0 and rep["results"]["members"][0]["value"]["text"] == "log 2"


def test_family_reports_lower_bound(capsys):
    parts = '{"kind":"direct_sum","parts":[{"kind":"left_shift"},{"kind":"left_shift"}]}'
    k1 = '{"kind":"kernel","rows":[[[[0,0],1]]]}'
    k2 = '{"kind":"kernel","rows":[[[[0,0],1]],[[[1,0],1]]]}'
    code, rep = report(capsys, "compute", "--op", parts, "--subgroup", k1, "--subgroup", k2)
    assert code == 0 and rep["results"]["family_bound"]["text"] == ">= log 4"


def test_inconclusive_exit_code(capsys):
    far = '{"kind":"kernel","rows":[[[30,1]]]}'
    code, rep = report(capsys, "compute", "--op", "left_shift", "--subgroup", far, "--max-steps", "5")
    assert code == 2 and "error" in rep["results"]


@pytest.mark.parametrize("argv", [
    ["compute", "--op", "{not json", "--subgroup", "e0"],
    ["compute", "--op", "no_such_kind", "--subgroup", "e0"],
    ["compute", "--op", "left_shift", "--subgroup", '{"kind":"kernel","rows":[[["x",1]]]}'],
    ["compute", "--op", "left_shift", "--p", "4", "--subgroup", "e0"],
    ["classify", "--op", "finite_dim"],
    ["verify", "nope"],
    ["verify", "perp", "--seed", str(2 ** 64)],
    ["frobnicate"],
])
def test_malformed_input_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 1


@pytest.mark.parametrize("op,kind,cert", [
    ("left_shift", "infinite", "non_algebraic"),
    ('{"kind":"int_endo","free_rank":1,"torsion":[4],"mult":3}', "zero", "narrow"),
    ('{"kind":"finite_dim","p":3,"matrix":[[1,2],[0,1]]}', "zero", "algebraic"),
])
def test_classify(capsys, op, kind, cert):
    code, rep = report(capsys, "classify", "--op", op)
    assert code == 0
    assert rep["results"]["value"]["kind"] == kind
    assert rep["results"]["certificate"]["kind"] == cert and rep["results"]["verified"]


def test_certificate_recheck(capsys, tmp_path):
    _, rep = report(capsys, "classify", "--op", "left_shift")
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(rep["results"]["certificate"]))
    code, rep = report(capsys, "verify", "--certificate", str(path), "--op", "left_shift")
    assert code == 0 and rep["results"]["verified"]
    code, rep = report(capsys, "verify", "--certificate", str(path), "--op", "right_shift")
    assert code == 3 and not rep["results"]["verified"]


@pytest.mark.parametrize("suite", ["duality", "dichotomy", "addition", "growth-laws"])
def test_verify_suites(capsys, suite):
    code, rep = report(capsys, "verify", suite, "--budget", "5", "--seed", "3")
    assert code == 0 and rep["results"]["ok"]


def test_text_format_and_timing(capsys):
    code, out, _ = run(capsys, "compute", "--op", "left_shift", "--subgroup", "e0", "--format", "text")
    assert code == 0 and "log 2" in out
    code, rep = report(capsys, "compute", "--op", "left_shift", "--subgroup", "e0", "--timing")
    assert "timing_s" in rep


def test_reports_are_byte_identical():
    argv = [sys.executable, "-m", "adjent", "verify", "growth-laws", "--seed", "11", "--budget", "4"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a
