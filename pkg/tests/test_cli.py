from __future__ import annotations

import json

import pytest

from cak.cli import main

from conftest import JAVA_PROJECT, PYTHON_PROJECT, golden
from stub_server import stub_server

JAVA = ["--input", str(JAVA_PROJECT), "--language", "java"]
PYTHON = ["--input", str(PYTHON_PROJECT), "--language", "python"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_classes(capsys):
    code, out = run(capsys, "classes", *JAVA)
    assert code == 0
    assert json.loads(out) == ["com.acme.AbstractShape", "com.acme.Circle", "com.acme.Shape", "com.acme.util.Calc"]


def test_methods(capsys):
    code, out = run(capsys, "methods", *PYTHON, "--class", "calc.Calculator")
    assert code == 0
    assert json.loads(out) == ["__init__(int)", "add(int,int)", "sub(int,int)"]


def test_missing_input_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["classes", "--language", "java"])
    assert info.value.code == 2


def test_missing_language_is_config_error(capsys):
    assert run(capsys, "classes", "--input", str(JAVA_PROJECT))[0] == 2


def test_missing_directory_is_config_error(capsys, tmp_path):
    assert run(capsys, "classes", "--input", str(tmp_path / "nope"), "--language", "java")[0] == 2


def test_unknown_class_exit_3(capsys):
    assert run(capsys, "methods", *JAVA, "--class", "com.acme.Nope")[0] == 3
    assert run(capsys, "chain", *JAVA, "--class", "com.acme.Circle", "--kind", "private", "--method", "x()")[0] == 3


def test_chains(capsys):
    code, out = run(capsys, "chain", *JAVA, "--class", "com.acme.Circle")
    assert (code, json.loads(out)) == (0, ["com.acme.AbstractShape", "com.acme.Shape"])
    code, out = run(capsys, "chain", *JAVA, "--class", "com.acme.Circle", "--kind", "private", "--method", "area()")
    assert (code, json.loads(out)) == (0, ["calcArea(double)", "square(double)"])


def test_callgraph_dot_matches_golden(capsys):
    code, out = run(capsys, "callgraph", *JAVA, "--format", "dot")
    assert code == 0
    assert out == golden("java_callgraph.dot")


def test_callgraph_json_restricted_to_method(capsys):
    code, out = run(capsys, "callgraph", *JAVA, "--class", "com.acme.Circle", "--method", "area()")
    data = json.loads(out)
    assert code == 0
    assert data["edges"] == [
        ["com.acme.Circle.area()", "com.acme.Circle.calcArea(double)"],
        ["com.acme.Circle.calcArea(double)", "com.acme.Circle.square(double)"],
    ]


def test_validate(capsys, tmp_path):
    good = tmp_path / "Good.java"
    good.write_text("class Good { void f() {} }\n")
    code, out = run(capsys, "validate", "--language", "java", str(good))
    assert (code, json.loads(out)) == (0, [])
    bad = tmp_path / "Bad.java"
    bad.write_text("class Bad { void f() { }\n")
    code, out = run(capsys, "validate", "--language", "java", str(bad))
    diags = json.loads(out)
    assert code == 1
    assert diags and all(d["file"] == str(bad) for d in diags)


def test_validate_unreadable_file(capsys, tmp_path):
    assert run(capsys, "validate", "--language", "java", str(tmp_path / "missing.java"))[0] == 2


def test_snapshot_round_trip(capsys, tmp_path):
    snap = tmp_path / "snap.json"
    assert run(capsys, "analyze", *JAVA, "--level", "call_graph", "--output", str(snap))[0] == 0
    assert snap.read_bytes() == golden("java_snapshot.json").encode()
    code, out = run(capsys, "classes", "--snapshot", str(snap))
    assert code == 0 and len(json.loads(out)) == 4
    code, out = run(capsys, "callgraph", "--snapshot", str(snap), "--format", "dot")
    assert out == golden("java_callgraph.dot")


def test_analyze_stdout(capsys):
    code, out = run(capsys, "analyze", *PYTHON, "--level", "call_graph")
    assert code == 0
    assert out == golden("python_snapshot.json")


def test_empty_directory(capsys, tmp_path):
    code, out = run(capsys, "classes", "--input", str(tmp_path), "--language", "python")
    assert (code, json.loads(out)) == (0, [])


def test_prompt_json(capsys):
    code, out = run(capsys, "prompt", *JAVA, "--class", "com.acme.Circle", "--method", "area()")
    assert code == 0
    assert json.loads(out)["prompt"] + "\n" == golden("circle_area_prompt.txt")


def test_prompt_mockables(capsys, tmp_path):
    listing = tmp_path / "mocks.txt"
    listing.write_text("# types to mock\njava.sql.Connection\n")
    args = ["prompt", *JAVA, "--class", "com.acme.AbstractShape", "--method", "save(String)"]
    _, plain = run(capsys, *args)
    code, from_file = run(capsys, *args, "--mockable-file", str(listing))
    _, from_flag = run(capsys, *args, "--mockable", "Connection")
    assert code == 0
    assert "Mock calls" not in json.loads(plain)["prompt"]
    assert json.loads(from_file)["prompt"].endswith("Mock calls made on these types: Connection.")
    assert json.loads(from_flag) == json.loads(from_file)


def test_prompt_not_focal(capsys):
    assert run(capsys, "prompt", *JAVA, "--class", "com.acme.Circle", "--method", "square(double)")[0] == 3


def test_prompt_execute(capsys, monkeypatch):
    monkeypatch.delenv("CAK_LLM_ENDPOINT", raising=False)
    monkeypatch.delenv("CAK_LLM_MODEL", raising=False)
    with stub_server() as (base, requests):
        code, out = run(
            capsys, "prompt", *JAVA, "--class", "com.acme.Circle", "--method", "area()",
            "--execute", "--endpoint", base + "/echo", "--model", "m1",
        )
        assert code == 0
        assert json.loads(out)["completion"] + "\n" == golden("circle_area_prompt.txt")
        assert requests[0][1]["model"] == "m1"
        code, _ = run(
            capsys, "prompt", *JAVA, "--class", "com.acme.Circle", "--method", "area()",
            "--execute", "--endpoint", base + "/fail",
        )
        assert code == 4


def test_prompt_execute_unreachable(capsys, monkeypatch):
    monkeypatch.delenv("CAK_LLM_ENDPOINT", raising=False)
    code, _ = run(
        capsys, "prompt", *JAVA, "--class", "com.acme.Circle", "--method", "area()",
        "--execute", "--endpoint", "http://127.0.0.1:9/none", "--timeout", "2",
    )
    assert code == 4


def test_validate_mutated_fixture_single_diagnostic(capsys, tmp_path):
    src = (JAVA_PROJECT / "com/acme/Circle.java").read_text()
    mutated = tmp_path / "Circle.java"
    mutated.write_text(src.replace("area() {", "area( {", 1))
    code, out = run(capsys, "validate", "--language", "java", str(mutated))
    diags = json.loads(out)
    assert code == 1
    assert len(diags) == 1
    assert (diags[0]["line"], diags[0]["message"]) == (8, "missing ')'")
