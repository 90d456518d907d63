import json
import subprocess
import sys

import pytest

from germ.cli import SessionError, execute, parse_session

RICH = (
    "# comment lines and blanks are skipped\n"
    "\n"
    "field Q\n"
    "jet 4\n"
    "source vars: x ideal: ()\n"
    "target vars: u ideal: ()\n"
    "filtration M = madic\n"
    "filtration Ch = chain[(x);(x^2)]\n"
    "map f = (x^2)\n"
    "map g = (2*x^2)\n"
    "aut P = (x+x^2)\n"
    "aut LP = (u+u^2)\n"
    "contact Ct = (u+x*u)\n"
    "vf xi = x^2 d/dx\n"
)

Q4 = (
    "field Q\n"
    "jet 4\n"
    "source vars: x ideal: ()\n"
    "target vars: u ideal: ()\n"
    "map f = (x^2)\n"
    "map ft = (x^2+2*x^3+x^4)\n"
    "map bad = (2*x^2)\n"
)

F3S = (
    "field F3\n"
    "jet 2\n"
    "source vars: x ideal: ()\n"
    "target vars: u ideal: ()\n"
    "map f = (x^2)\n"
    "map g = (2*x^2)\n"
)


@pytest.fixture(scope="module")
def sessions(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    paths = {}
    for name, text in [("rich", RICH), ("q4", Q4), ("f3", F3S)]:
        p = base / f"{name}.germ"
        p.write_text(text)
        paths[name] = str(p)
    paths["dir"] = str(base)
    return paths


def test_session_parse_and_name_lookup():
    sess = parse_session(
        "field Q\n"
        "jet 3\n"
        "source vars: x ideal: ()\n"
        "target vars: u ideal: ()\n"
        "map f = (x^2)\n"
    )
    assert sess.order == 3
    assert sess.source.xvars == ("x",)
    assert sorted(sess.maps) == ["f"]


def test_unbalanced_parenthesis_reports_the_line():
    with pytest.raises(SessionError) as exc:
        parse_session("map f = (x^2")
    assert "unbalanced parenthesis" in str(exc.value)
    assert exc.value.line == 1


def test_reducible_modulus_reports_the_line():
    with pytest.raises(SessionError) as exc:
        parse_session("field F3[b]/(b^2-1)\n")
    assert "reducible" in str(exc.value)
    assert exc.value.line == 1


def test_canonical_form_is_a_parse_fixed_point():
    rich = parse_session(RICH)
    canon = rich.canonical()
    assert parse_session(canon).canonical() == canon
    assert "filtration Ch = chain[(x);(x^2)]" in canon
    assert "aut LP = (u+u^2)" in canon
    assert "vf xi = x^2 d/dx" in canon
    assert rich.aut_sides == {"P": "source", "LP": "target"}


def test_act_is_deterministic(sessions):
    args = ["act", "--session", sessions["rich"],
            "--group", "R", "--elem", "P", "--map", "f"]
    rep1, code1 = execute(args)
    rep2, code2 = execute(args)
    assert code1 == code2 == 0
    assert rep1["ok"] and rep1["result"]["verified"]
    assert rep1["result"]["text"] == ["x^2+2*x^3+x^4"]
    assert json.dumps(rep1, sort_keys=True) == json.dumps(rep2, sort_keys=True)


def test_session_report_is_reparse_stable(sessions):
    rep, code = execute(["session", sessions["rich"]])
    assert code == 0
    assert rep["result"]["reparse_stable"]
    assert rep["result"]["canonical"] == parse_session(RICH).canonical()


def test_tangent_report(sessions):
    rep, code = execute(["tangent", "--session", sessions["rich"],
                         "--group", "R", "--map", "f", "--level", "1"])
    assert code == 0
    assert rep["result"]["tangent"]["rank"] > 0


def test_exp_then_log_round_trip(sessions, tmp_path):
    rep, code = execute(["exp", "--session", sessions["rich"], "--vf", "xi"])
    assert code == 0
    assert rep["result"]["level"] >= 1
    comps = rep["result"]["automorphism"]["components"]
    chained = tmp_path / "log.germ"
    chained.write_text(RICH + "aut E = (" + ", ".join(comps) + ")\n")
    rep, code = execute(["log", "--session", str(chained),
                         "--group", "R", "--elem", "E"])
    assert code == 0
    rpart = rep["result"]["parts"]["R"]
    assert rpart["vector"]["coefficients"] == ["x^2"]
    assert rpart["level"] >= 1


def test_artin_rees_reports_an_integer_bound(sessions):
    rep, code = execute(["artin-rees", "--session", sessions["rich"],
                         "--group", "R", "--map", "f", "--level", "1"])
    assert code == 0
    assert isinstance(rep["result"]["comparison"]["bound"], int)


def test_descend_success(sessions):
    rep, code = execute(["descend", "--session", sessions["q4"],
                         "--group", "R", "--map", "f", "--map2", "ft",
                         "--level", "1"])
    assert code == 0
    assert rep["result"]["descended"]
    assert rep["result"]["certificate"]["verified"]


def test_descend_obstruction_is_exit_2(sessions):
    rep, code = execute(["descend", "--session", sessions["q4"],
                         "--group", "R", "--map", "f", "--map2", "bad",
                         "--level", "1"])
    assert code == 2
    assert "obstruction" in rep["result"]["reason"]


def test_descend_invalid_witness_is_exit_1(sessions):
    rep, code = execute(["descend", "--session", sessions["q4"],
                         "--group", "R", "--map", "f", "--map2", "bad",
                         "--level", "1", "--witness", "(x+x^2)"])
    assert code == 1
    assert rep["error"] == "witness action mismatch at coefficient x^2"


@pytest.fixture(scope="module")
def compiled_system(sessions):
    out = sessions["dir"] + "/sys.json"
    rep, code = execute(["system", "--session", sessions["f3"],
                         "--group", "R", "--map", "f", "--map2", "g",
                         "--out", out])
    assert code == 0 and rep["result"]["written"] == out
    return out


def test_solve_without_solutions_is_exit_2(compiled_system):
    rep, code = execute(["solve", compiled_system, "--field", "F3"])
    assert code == 2
    assert rep["result"]["message"] == "no solutions"
    assert rep["result"]["solutions"] == []


def test_solve_over_the_extension_succeeds(compiled_system):
    rep, code = execute(["solve", compiled_system, "--field", "F3",
                         "--ext", "b^2+1"])
    assert code == 0
    assert rep["result"]["count"] >= 1


def test_groebner_reports_consistency(compiled_system):
    rep, code = execute(["solve", compiled_system, "--field", "F3",
                         "--method", "groebner"])
    assert code == 0
    assert rep["result"]["groebner"]["status"] == "consistent"


def test_orbits_with_jet_override(sessions):
    rep, code = execute(["orbits", "--session", sessions["f3"],
                         "--group", "R", "--ext", "b^2+1", "--jet", "2",
                         "--map", "f"])
    assert code == 0
    census = rep["result"]["orbits"]
    assert census["extension_orbit_size"] == 4
    assert len(census["orbits"]) == 2
    assert all(len(o) == 1 for o in census["orbits"])


def test_entry_point_exit_code_and_byte_identical_output(compiled_system):
    cmd = [sys.executable, "-m", "germ.cli", "solve", compiled_system,
           "--field", "F3"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 2, proc.stderr
    assert json.loads(proc.stdout)["result"]["message"] == "no solutions"
    again = subprocess.run(cmd, capture_output=True, text=True)
    assert again.stdout == proc.stdout


def test_entry_point_reads_the_session_from_stdin():
    proc = subprocess.run(
        [sys.executable, "-m", "germ.cli", "act", "--group", "R",
         "--elem", "P", "--map", "f"],
        input=RICH, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["result"]["text"] == ["x^2+2*x^3+x^4"]


def test_unknown_element_is_exit_1(sessions):
    rep, code = execute(["act", "--session", sessions["rich"],
                         "--group", "R", "--elem", "nope", "--map", "f"])
    assert code == 1
    assert not rep["ok"]


def test_missing_arguments_are_exit_1():
    proc = subprocess.run(
        [sys.executable, "-m", "germ.cli", "act", "--group", "R"],
        capture_output=True, text=True)
    assert proc.returncode == 1
