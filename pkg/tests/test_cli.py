import json

import pytest

from ihss.cli import BAD_INPUT, FAILED, OK, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ih_positional_and_flags(capsys):
    code, out, _ = _run(capsys, "ih", "susp_t2", "lower-middle", "Z")
    assert code == OK
    assert [h["betti"] for h in json.loads(out)["homology"]] == [1, 2, 0, 1]
    code, out, _ = _run(capsys, "ih", "cone_t2", "--perversity", "0,0,0,1", "--ring", "Q", "--oracle")
    data = json.loads(out)
    assert code == OK and data["oracle"]["agrees"]
    assert [h["betti"] for h in data["homology"]] == [1, 0, 0, 0]


def test_ih_from_files(capsys, tmp_path):
    cx = tmp_path / "circle.txt"
    cx.write_text("dim 1\ns 0 1\ns 1 2\ns 0 2\n")
    ls = tmp_path / "twist.txt"
    ls.write_text("rank 1\nedge [0] [0,1] : -1\n")
    code, out, _ = _run(capsys, "ih", str(cx), "0,0", "Z", "--local-system", str(ls), "--oracle")
    data = json.loads(out)
    assert code == OK
    assert data["homology"][0]["torsion"] == [2] and data["local_system_rank"] == 1


@pytest.mark.parametrize("argv", [
    ["ih", "nowhere"],
    ["ih", "cone_s1", "1,0,0"],
    ["ih", "cone_s1", "zero", "R"],
    ["ss", "sphere2"],
    ["ss", "cone_s1", "--field", "Z"],
    ["ss", "cone_s1", "--base", "a,b"],
    ["check", "nosuch"],
    ["corpus", "nosuch"],
    ["frobnicate"],
    [],
])
def test_bad_input_exits_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == BAD_INPUT
    assert err


def test_ss_twisted_bundle(capsys, tmp_path):
    report = tmp_path / "ss.json"
    code, out, _ = _run(capsys, "ss", "twisted_cone_bundle", "--report", str(report))
    assert code == OK
    data = json.loads(out)
    assert all(v["ok"] for v in data["verdicts"].values())
    assert {"e2_cone", "e2_link", "stalk_comparison", "ss_map"} <= set(data["verdicts"])
    assert report.read_text() == out
    code, again, _ = _run(capsys, "ss", "twisted_cone_bundle")
    assert again == out


def test_ss_with_stalk_file(capsys, tmp_path):
    st = tmp_path / "stalks.txt"
    st.write_text("polygon 3\nvariant cone\ndegree 0\nrank 2\nedge 2 0 : 0 1 1 0\n")
    code, out, _ = _run(capsys, "ss", "twisted_cone_bundle", "--stalk-system", str(st))
    assert code == OK and json.loads(out)["verdicts"]["e2_cone"]["ok"]
    # the untwisted system gives the wrong E^2
    st.write_text("polygon 3\nvariant cone\ndegree 0\nrank 2\n")
    code, out, _ = _run(capsys, "ss", "twisted_cone_bundle", "--stalk-system", str(st))
    assert code == FAILED and not json.loads(out)["verdicts"]["e2_cone"]["ok"]


def test_ss_apex(capsys):
    code, out, _ = _run(capsys, "ss", "cone_s1", "--base", "apex")
    assert code == OK
    assert json.loads(out)["base"]["codimension"] == 2


def test_check_and_golden(capsys, tmp_path):
    golden = tmp_path / "golden.json"
    code, out, _ = _run(capsys, "check", "cone-formula", "--report", str(golden))
    assert code == OK and out.rstrip().endswith("ok")
    assert all(line.startswith("PASS") for line in out.splitlines()[:-1])
    code, out, _ = _run(capsys, "check", "cone-formula", "--golden", str(golden))
    assert code == OK and "DIFF" not in out
    data = json.loads(golden.read_text())
    data["suites"][0]["cases"][0]["ok"] = False
    golden.write_text(json.dumps(data))
    code, out, _ = _run(capsys, "check", "cone-formula", "--golden", str(golden))
    assert code == FAILED
    assert any(line.startswith("DIFF") for line in out.splitlines())
    assert out.rstrip().endswith("FAILED")


def test_corpus(capsys, tmp_path):
    code, out, _ = _run(capsys, "corpus")
    assert code == OK and "twisted_cone_bundle" in json.loads(out)["spaces"]
    dest = tmp_path / "pt.txt"
    code, out, _ = _run(capsys, "corpus", "pinched_torus", "--oracle", "--export", str(dest))
    data = json.loads(out)
    assert code == OK and all(v["agrees"] for v in data["oracle"].values())
    assert data["frontier_components"] == 2
    code, out, _ = _run(capsys, "ih", str(dest), "zero", "Z")
    assert [h["betti"] for h in json.loads(out)["homology"]] == [1, 0, 1]
