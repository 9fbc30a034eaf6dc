import json
import subprocess
import sys
from fractions import Fraction

import pytest

from fairload import cli, fixture_path
from fairload.instance import assignment_from_json, instance_from_json, load_report_from_json
from fairload.lp import solve_result_from_json
from fairload.verify import TheoremReport

FIG1, FIG2, FIG3 = (fixture_path(f"fig{i}.json") for i in (1, 2, 3))


def run(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_solve_min_spread(capsys, fig1):
    code, out, _ = run(capsys, "solve", "--objective", "min-spread", FIG1)
    obj = json.loads(out)
    assert code == 0 and obj["status"] == "OPTIMAL" and obj["value"] == "0"
    res = solve_result_from_json(obj, fig1)
    assert res.value == 0 and res.assignment.vector(fig1) == (20, 1, 0, 10, 2, 2)


def test_solve_min_max(capsys):
    code, out, _ = run(capsys, "solve", "--objective", "min-max", FIG1)
    assert code == 0 and json.loads(out)["value"] == "161/13"


def test_solve_equal_feas_infeasible_exits_zero(capsys, tmp_path):
    p = tmp_path / "i.json"
    p.write_text(json.dumps({"tasks": [{"id": "u", "demand": "3"}], "workers": ["w1", "w2"],
                             "edges": [{"task": "u", "worker": "w1"}]}))
    code, out, _ = run(capsys, "solve", "--objective", "equal-feas", p)
    assert code == 0 and json.loads(out)["status"] == "INFEASIBLE"


def test_solve_general_instance_fails(capsys):
    code, _, err = run(capsys, "solve", "--objective", "min-max", FIG3)
    assert code == 1 and "error" in json.loads(err)


def test_bad_objective_is_usage_error(capsys):
    code, _, err = run(capsys, "solve", "--objective", "median", FIG1)
    assert code == 2 and "--objective" in err


def test_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", FIG1)
    assert code == 0 and json.loads(out)["ok"] is True
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"tasks": [{"id": "u", "demand": "-1"}], "workers": ["w"],
                               "edges": [{"task": "u", "worker": "w"}]}))
    code, out, _ = run(capsys, "validate", bad)
    assert code == 1 and json.loads(out)["violations"][0]["code"] == "NEGATIVE_DEMAND"


def test_validate_garbage(capsys, tmp_path):
    g = tmp_path / "garbage.json"
    g.write_text('{"tasks": [\n  oops')
    code, _, err = run(capsys, "validate", g)
    msg = json.loads(err)
    assert code == 2 and msg["error"] == "PARSE_ERROR" and "line 2 column" in msg["message"]


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/x.json")
    assert code == 2


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--pareto", FIG2)
    s = json.loads(out)
    assert code == 0 and s["count"] == 3630 and s["min_lmax"] == 9
    assert s["pareto"][0] == [9, 5]


def test_enumerate_dump(capsys, fig2):
    code, out, _ = run(capsys, "enumerate", "--dump", FIG2)
    lines = out.splitlines()
    assert len(lines) == 3631
    first = json.loads(lines[0])
    assert len(first["x"]) == 6 and len(first["loads"]) == 3
    assert json.loads(lines[-1])["count"] == 3630


def test_equalize(capsys, tmp_path, fig3):
    start = tmp_path / "x0.json"
    start.write_text(json.dumps({"values": {"u1:w1": "1", "u1:w2": "0", "u2:w1": "1", "u2:w2": "0"}}))
    code, out, _ = run(capsys, "equalize", "--start", start, FIG3)
    obj = json.loads(out)
    assert code == 0 and obj["lambda"] == "1/2" and obj["improved"]
    x = assignment_from_json(obj["assignment"], fig3)
    assert x.vector(fig3) == (0, 1, 1, 0)
    assert load_report_from_json(obj["loads"]).spread == 0


def test_equalize_given_tree(capsys, tmp_path, fig_json):
    d = fig_json("fig3.json")
    d["start"] = {"values": {"u1:w1": "1", "u1:w2": "0", "u2:w1": "1", "u2:w2": "0"}}
    d["spanning_tree"] = ["u1:w1", "u1:w2", "u2:w1"]
    p = tmp_path / "i.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "equalize", "--tree", "given", p)
    assert code == 0 and json.loads(out)["tree"] == d["spanning_tree"]
    del d["spanning_tree"]
    p.write_text(json.dumps(d))
    code, _, _ = run(capsys, "equalize", "--tree", "given", p)
    assert code == 2


def test_equalize_default_start(capsys):
    code, out, _ = run(capsys, "equalize", FIG3)
    obj = json.loads(out)
    assert code == 0
    lams = set(obj["loads"]["per_worker"].values())
    assert len(lams) == 1


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--theorem", "thm1", "--seeds", "1..10")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2
    reports = [TheoremReport.from_json(r) for r in json.loads(lines[0])]
    assert [r.seed for r in reports] == list(range(1, 11))
    summary = json.loads(lines[1])["summary"]
    assert summary["VIOLATED"] == 0 and summary["CONFIRMED"] + summary["HYPOTHESIS_VOID"] == 10


def test_verify_bad_seeds(capsys):
    code, _, err = run(capsys, "verify", "--theorem", "thm1", "--seeds", "5..1")
    assert code == 2 and "--seeds" in err


def test_gen(capsys, tmp_path):
    params = json.dumps({"tasks": 2, "workers": 3, "density": 1.0})
    out_file = tmp_path / "g.json"
    code, _, _ = run(capsys, "gen", "--params", params, "--seed", 1, "-o", out_file)
    golden = json.loads((__import__("pathlib").Path(__file__).parent / "golden" / "gen_2x3_seed1.json").read_text())
    assert code == 0 and json.loads(out_file.read_text()) == golden
    instance_from_json(golden)
    pf = tmp_path / "p.json"
    pf.write_text(params)
    code, out, _ = run(capsys, "-o", "-", "gen", "--params", f"@{pf}", "--seed", 1)
    assert code == 0 and json.loads(out) == golden


@pytest.mark.parametrize("params", ["{nope", '{"colour": 1}', "[1]"])
def test_gen_bad_params(capsys, params):
    code, _, err = run(capsys, "gen", "--params", params)
    assert code == 2 and json.loads(err)["error"] == "PARSE_ERROR"


def test_gen_unsatisfiable(capsys):
    code, _, err = run(capsys, "gen", "--params", '{"density": 3}')
    assert code == 1 and json.loads(err)["error"] == "UNSATISFIABLE_PARAMS"


def test_meta_goes_to_stderr(capsys):
    code, out, err = run(capsys, "--meta", "solve", "--objective", "min-max", FIG1)
    assert code == 0 and "meta" in json.loads(err) and "meta" not in out
    code, out2, _ = run(capsys, "solve", "--objective", "min-max", FIG1)
    assert out == out2


@pytest.mark.parametrize("argv", [
    ["solve", "--objective", "min-spread", FIG1],
    ["enumerate", "--pareto", FIG2],
    ["verify", "--theorem", "thm2", "--seeds", "1..5"],
    ["gen", "--params", '{"tasks": [1, 4], "mode": "GENERAL_REAL", "depth": 2, "demands": [-3, 3]}',
     "--seed", "7"],
])
def test_byte_identical_subprocess(argv):
    cmd = [sys.executable, "-m", "fairload", *argv]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_version(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["--version"])
    assert "fairload" in capsys.readouterr().out
