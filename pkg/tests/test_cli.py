import json
import subprocess
import sys

import pytest

from versal.cli import COMMANDS

from helpers import call, fuzz_cli


def call_json(*argv):
    code, text = call(*argv, "--json")
    return code, json.loads(text)


def test_versal_on_obstruction():
    code, d = call_json("versal", "obstruction.json", "--order", "10")
    assert code == 0
    assert d["data"]["relations"] == ["1/2*x^2"]
    assert d["caps"]["truncation_order"] == 10


def test_check_linf_reports_offending_triple():
    code, d = call_json("check-linf", "broken-jacobi.json")
    assert code == 1 and d["verdict"] == "fail"
    assert d["findings"][0]["location"] == ["h", "e", "f"]
    assert call("check-linf", "lie-sl2")[0] == 0


def test_specialize_cone():
    code, d = call_json("specialize", "cone.json", "--omega", "u:3", "--cutoff", "10")
    assert code == 0
    assert d["data"]["value"] == "q^3 + O(q^10)"
    code, d = call_json("specialize", "cone.json")
    assert code == 0 and d["data"]["value"] == "0"


EXIT_CASES = [
    (["check-ainf", "dual-numbers"], 0),
    (["check-ainf", "dual-numbers-broken"], 1),
    (["check-functor", "rescale"], 0),
    (["mc-residual", "mc-failing"], 1),
    (["mc-residual", "mc-complete"], 0),
    (["gauge", "mc-gauge"], 0),
    (["minimal-model", "massey"], 0),
    (["minimal-model", "nonminimal"], 0),
    (["ks", "mc-complete"], 0),
    (["classify", "mc-complete"], 0),
    (["verdict", "mc-complete"], 0),
    (["hochschild", "dual-numbers", "--degree", "2"], 0),
    (["hochschild", "point", "--truncated"], 0),
    (["deform-to-mc", "dual-numbers-deformed"], 0),
    (["mc-to-deform", "cochain-deformation"], 0),
    (["versal-extend", "dual-numbers-deformed", "dual-numbers-reparam", "--order", "6"], 0),
    (["bc-solve", "bounding-solvable"], 0),
    (["bc-solve", "bounding-obstructed"], 1),
    (["bc-build", "bounding-solvable"], 0),
    (["cone", "quadric-cone"], 0),
    (["specialize", "quadric-point"], 0),
    (["check-linf", "no-such-file"], 2),
    (["check-linf", "dual-numbers"], 2),
    (["no-such-command", "x"], 2),
    ([], 2),
    (["versal", "obstruction", "--order", "0"], 2),
    (["versal", "obstruction", "--order", "many"], 2),
]


@pytest.mark.parametrize("argv,code", EXIT_CASES)
def test_exit_codes(argv, code):
    assert call(*argv)[0] == code


def test_every_command_has_an_example():
    assert set(COMMANDS) <= {argv[0] for argv, _ in EXIT_CASES if argv} | {"versal"}


def test_outputs_agree_in_content():
    code, text = call("versal", "obstruction", "--order", "6")
    _, d = call_json("versal", "obstruction", "--order", "6")
    assert "1/2*x^2" in text and d["data"]["relations"] == ["1/2*x^2"]
    assert f"verdict: {d['verdict']}" in text


@pytest.mark.parametrize("argv", [
    ["versal", "obstruction", "--order", "10"],
    ["check-linf", "broken-jacobi"],
    ["classify", "mc-complete"],
    ["hochschild", "two-object", "--degree", "2"],
    ["versal-extend", "dual-numbers-deformed", "dual-numbers-reparam", "--order", "6"],
])
def test_reports_are_byte_identical(argv):
    first = call(*argv, "--json")[1]
    assert all(call(*argv, "--json")[1] == first for _ in range(3))
    assert call(*argv)[1] == call(*argv)[1]


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "versal", "versal", "obstruction", "--json"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["data"]["relations"] == ["1/2*x^2"]


# fuzzing

def test_fuzzed_inputs_never_crash(tmp_path):
    codes, bad = fuzz_cli(1000, 1729, tmp_path / "case.json")
    assert not bad, bad[:3]
    assert sum(codes.values()) == 1000 and set(codes) <= {0, 1, 2}
    assert codes[2] > 500
