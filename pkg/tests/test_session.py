from __future__ import annotations

import json

import pytest

from cak.errors import IoFailure, MalformedSnapshot, ProjectPathNotFound, SchemaVersionMismatch, UnsupportedLanguage
from cak.session import (
    AnalysisLevel,
    ToolkitConfig,
    create_session,
    discover_files,
    load_session,
    save_session,
    schema_from_json,
    schema_to_json,
    session_to_jsonable,
    supported_languages,
)

from conftest import JAVA_PROJECT, PYTHON_PROJECT


def test_supported_languages():
    assert [lang.value for lang in supported_languages()] == ["java", "python"]


def test_config_errors(tmp_path):
    with pytest.raises(UnsupportedLanguage):
        ToolkitConfig("cobol", tmp_path)
    with pytest.raises(ProjectPathNotFound):
        create_session(ToolkitConfig("java", tmp_path / "missing"))


def test_empty_project_serializes_to_minimal_document(tmp_path):
    s = create_session(ToolkitConfig("java", tmp_path))
    assert schema_to_json(s) == '{"schema_version":"1.0","language":"java","modules":[]}'


def test_fixture_counts(java_session, python_session):
    assert len(java_session.modules) == 4 and len(java_session.type_index) == 4
    assert len(java_session.callable_index) == 10
    assert len(python_session.modules) == 2 and len(python_session.type_index) == 2
    ctors = [c for c in python_session.callable_index.values() if c.is_constructor]
    assert len(ctors) == 1


def test_build_and_config_files(java_session, python_session):
    b = java_session.build
    assert (b.build_tool, b.package_name, b.version, b.dependencies) == (
        "maven",
        "shapes",
        "1.2.0",
        ("junit:junit:4.13.2",),
    )
    assert [c.config_file_name for c in java_session.configs] == ["pom.xml"]
    p = python_session.build
    assert p.dependencies == ("requests>=2.0", "rich")


@pytest.mark.parametrize("project, language", [(JAVA_PROJECT, "java"), (PYTHON_PROJECT, "python")])
@pytest.mark.parametrize("level", list(AnalysisLevel))
def test_json_round_trip(project, language, level):
    s = create_session(ToolkitConfig(language, project, analysis_level=level))
    text = schema_to_json(s)
    back = schema_from_json(text)
    assert back == s
    assert schema_to_json(back) == text
    keys = list(json.loads(text))
    assert keys[:4] == ["schema_version", "language", "modules", "types"]
    assert ("call_graph" in keys) == (level is AnalysisLevel.CALL_GRAPH)


def test_save_and_load(tmp_path, java_session):
    path = tmp_path / "snap" / "s.json"
    save_session(java_session, path)
    assert path.read_bytes().endswith(b"}\n")
    assert load_session(path) == java_session


def test_load_errors(tmp_path, java_session):
    with pytest.raises(IoFailure):
        load_session(tmp_path / "nope.json")
    with pytest.raises(MalformedSnapshot):
        schema_from_json("{not json")
    with pytest.raises(MalformedSnapshot):
        schema_from_json('{"language":"java","modules":[]}')
    with pytest.raises(SchemaVersionMismatch):
        schema_from_json('{"schema_version":"9.9","language":"java","modules":[]}')
    data = session_to_jsonable(java_session)
    data["types"].pop("com.acme.Circle")
    with pytest.raises(MalformedSnapshot):
        schema_from_json(json.dumps(data))


def test_save_to_unwritable_location(tmp_path, java_session):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        save_session(java_session, blocker / "sub" / "s.json")


def test_cache_hit_returns_equal_session(tmp_path):
    cfg = ToolkitConfig("java", JAVA_PROJECT, cache_dir=tmp_path)
    first = create_session(cfg)
    assert len(list(tmp_path.glob("*.json"))) == 1
    second = create_session(cfg)
    assert second == first
    assert second.config.project_path == JAVA_PROJECT


def test_discovery_ignores(tmp_path):
    (tmp_path / "target").mkdir()
    (tmp_path / "target" / "Gen.java").write_text("class Gen {}")
    (tmp_path / ".hidden").mkdir()
    (tmp_path / ".hidden" / "H.java").write_text("class H {}")
    (tmp_path / "src").mkdir()
    (tmp_path / "src" / "A.java").write_text("class A {}")
    (tmp_path / "src" / "ATest.java").write_text("class ATest {}")
    assert discover_files(ToolkitConfig("java", tmp_path)) == ["src/A.java", "src/ATest.java"]
    cfg = ToolkitConfig("java", tmp_path, ignore_globs=("*Test.java",))
    assert discover_files(cfg) == ["src/A.java", "target/Gen.java"]


def test_broken_files_still_produce_modules(tmp_path):
    (tmp_path / "Bad.java").write_text("class Bad { void f( }")
    s = create_session(ToolkitConfig("java", tmp_path))
    (module,) = s.modules
    assert module.diagnostics and module.diagnostics[0].severity == "error"


def test_sessions_are_immutable(java_session):
    with pytest.raises(Exception):
        java_session.modules = ()
    with pytest.raises(TypeError):
        java_session.type_index["x"] = None
