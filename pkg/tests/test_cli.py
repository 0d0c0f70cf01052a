import json

import pytest

from cyclicsix.cli import run
from cyclicsix.rules import load_rules


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_rules(capsys):
    code, out, _ = call(capsys, "check-rules")
    assert code == 0
    assert out == "103 rules (39 T / 28 P / 36 H), overlap audit: clean\n"


def test_check_rules_strict_reading(capsys):
    code, out, _ = call(capsys, "check-rules", "--semantics", "strict4")
    assert code == 0 and out.endswith("clean\n")


def test_check_rules_reports_conflicts(tmp_path, capsys):
    path = tmp_path / "r.txt"
    path.write_text("H:*H5H* -1/60\nH:*F+F* -12/60\n")
    code, out, _ = call(capsys, "check-rules", "--rules", str(path), "--format", "json")
    assert code == 1
    assert json.loads(out)["conflicts"]


def test_verify_triangles_exit_0(capsys):
    code, out, _ = call(capsys, "verify-triangles")
    assert code == 0 and out.startswith("triangles: verified")


def test_verify_triangles_without_exclusions_exit_1(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, out, _ = call(capsys, "verify-triangles", "--configs", str(empty), "--max-violations", "3")
    assert code == 1
    assert "(listing the first 3)" in out


def test_verify_vertices_json(capsys):
    code, out, _ = call(capsys, "verify-vertices", "--format", "json", "--dmax", "8")
    assert code == 0
    d = json.loads(out)
    assert d["lemma"] == "vertices" and d["parameters"]["dmax"] == 8


def test_verify_faces_5_with_empty_configs_exit_1(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    code, out, _ = call(capsys, "verify-faces", "--size", "5", "--configs", str(empty), "--format", "json",
                        "--max-violations", "2")
    assert code == 1
    d = json.loads(out)
    assert d["violation_count"] > 0 and len(d["violations"]) == 2


def test_match(capsys):
    assert call(capsys, "match", "H:o3o", "H:oOoH4H4H4H4H")[0] == 0
    assert call(capsys, "match", "H:o3o", "H:4H4H4H4H4H4H")[0] == 1
    code, out, _ = call(capsys, "match", "T:3H3x3Hx", "H:tHtxtH4H4H4H", "--format", "json")
    assert code == 0 and json.loads(out)["edges"] == [1]


def test_match_size_mismatch_is_a_usage_error(capsys):
    assert call(capsys, "match", "P:v*3P3", "H:4H4H4H4H4H4H")[0] == 2


def test_explain(capsys):
    code, out, _ = call(capsys, "explain", "H:oOoH4H4H4H4H")
    assert code == 0
    assert "matched configurations: H:o3o*********" in out
    code, out, _ = call(capsys, "explain", "tri:3(3),3(3),3(3)", "--format", "json")
    assert code == 1 and json.loads(out)["breakdown"]["final"] == -60


def test_dump_rules_is_the_serialized_table(capsys):
    code, out, _ = call(capsys, "dump-rules")
    assert code == 0 and out == load_rules().serialize()


def test_dump_configs(capsys):
    code, out, err = call(capsys, "dump-configs")
    assert code == 0 and len(out.splitlines()) == 10
    assert "12 after u/v/w closure" in err


def test_complete_flag_fails_on_subset(capsys):
    code, _, err = call(capsys, "dump-configs", "--complete")
    assert code == 2 and "193" in err


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["check-rules", "--bogus"],
    ["verify-faces"],
    ["verify-faces", "--size", "7"],
    ["check-rules", "--rules", "/no/such/file"],
    ["verify-faces", "--size", "5", "--configs", "/no/such/file"],
    ["explain", "H:zz"],
    ["verify-vertices", "--dmax", "4"],
    ["verify-faces", "--size", "5", "--jobs", "0"],
])
def test_usage_and_data_errors_exit_2(argv, capsys):
    assert call(capsys, *argv)[0] == 2


def test_duplicate_config_warning_goes_to_stderr(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text("P:v*3P3\nP:u*3P3\n")
    code, out, err = call(capsys, "dump-configs", "--configs", str(path))
    assert code == 0 and "implied by" in err
    assert len(out.splitlines()) == 1
