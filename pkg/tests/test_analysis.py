from __future__ import annotations

import pytest

from cak import analysis
from cak.errors import FileNotInSession, MethodNotFound, TypeNotFound
from cak.schema import to_jsonable

from conftest import JAVA_PROJECT, PYTHON_PROJECT, load_truth
from oracles import slice_body

PROJECTS = {"java": JAVA_PROJECT, "python": PYTHON_PROJECT}


def class_view(t) -> dict:
    d = to_jsonable(t)
    d.pop("code_body")
    d["callables"] = [c.full_signature for c in t.callables]
    return d


def callable_view(c) -> dict:
    d = to_jsonable(c)
    d.pop("code_body")
    return d


@pytest.mark.parametrize("language", ["java", "python"])
def test_get_classes_matches_ground_truth(sessions, language):
    truth = load_truth(language)["classes"]
    got = analysis.get_classes(sessions[language])
    assert list(got) == sorted(truth)
    for qname, expected in truth.items():
        assert class_view(got[qname]) == expected, qname


@pytest.mark.parametrize("language", ["java", "python"])
def test_methods_match_ground_truth(sessions, language):
    truth = load_truth(language)["methods"]
    session = sessions[language]
    for qname, methods in truth.items():
        got = analysis.get_methods_in_class(session, qname)
        assert sorted(got) == sorted(methods)
        for sig, expected in methods.items():
            assert callable_view(got[sig]) == expected, (qname, sig)


def test_python_module_functions_match_ground_truth(python_session):
    truth = load_truth("python")["module_functions"]
    for module_name, funcs in truth.items():
        for sig, expected in funcs.items():
            got = analysis.get_callable(python_session, module_name, sig)
            assert callable_view(got) == expected


@pytest.mark.parametrize("language", ["java", "python"])
def test_imports_and_compilation_units_match_ground_truth(sessions, language):
    truth = load_truth(language)
    session = sessions[language]
    modules = analysis.get_all_modules(session)
    assert [m.file_name for m in modules] == sorted(truth["imports"])
    for m in modules:
        assert to_jsonable(analysis.get_imports(m)) == truth["imports"][m.file_name]
    for path, expected in truth["compilation_units"].items():
        assert to_jsonable(analysis.get_compilation_unit(session, path)) == expected


@pytest.mark.parametrize("language", ["java", "python"])
def test_code_bodies_equal_source_line_slices(sessions, language):
    session = sessions[language]
    root = PROJECTS[language]
    for t in session.type_index.values():
        assert t.code_body == slice_body(root / t.file_name, t.line_offset)
        for c in t.callables:
            assert c.code_body == slice_body(root / t.file_name, c.line_offset)
    for m in session.modules:
        for c in m.callables:
            assert c.code_body == slice_body(root / m.file_name, c.line_offset)


def test_get_all_methods_excludes_constructors(java_session, python_session):
    calc = java_session.module_by_file["com/acme/util/Calc.java"]
    assert [c.full_signature for c in analysis.get_all_methods(calc)] == ["add(int,int)", "sub(int,int)"]
    report = python_session.module_by_file["report.py"]
    assert [c.full_signature for c in analysis.get_all_methods(report)] == ["summarize(int,int)", "render(int)"]


def test_lookup_errors(java_session):
    with pytest.raises(TypeNotFound):
        analysis.get_class(java_session, "com.acme.Nope")
    with pytest.raises(MethodNotFound):
        analysis.get_method(java_session, "com.acme.Circle", "area(int)")
    with pytest.raises(FileNotInSession):
        analysis.get_compilation_unit(java_session, "com/acme/Missing.java")


def test_compilation_unit_accepts_absolute_path(java_session):
    unit = analysis.get_compilation_unit(java_session, str(JAVA_PROJECT / "com/acme/Circle.java"))
    assert unit.types == ("com.acme.Circle",)


def test_resolve_simple_name_and_source_file(java_session):
    assert analysis.resolve_simple_name(java_session, "Circle") == ["com.acme.Circle"]
    assert analysis.resolve_simple_name(java_session, "Square") == []
    assert analysis.get_source_file(java_session, "com.acme.util.Calc") == "com/acme/util/Calc.java"


def test_resolve_type_orders(java_session):
    circle_mod = java_session.module_by_file["com/acme/Circle.java"]
    calc_mod = java_session.module_by_file["com/acme/util/Calc.java"]
    # same package
    assert analysis.resolve_type(java_session, "AbstractShape", circle_mod) == "com.acme.AbstractShape"
    # other package, not imported
    assert analysis.resolve_type(java_session, "AbstractShape", calc_mod) is None
    assert analysis.resolve_type(java_session, "com.acme.Shape", calc_mod) == "com.acme.Shape"
    assert analysis.resolve_type(java_session, "List<Integer>", calc_mod) is None


@pytest.mark.parametrize(
    "module_name, file_name, clause, expected",
    [
        ("pkg.sub.mod", "pkg/sub/mod.py", ".sibling", "pkg.sub.sibling"),
        ("pkg.sub.mod", "pkg/sub/mod.py", "..up", "pkg.up"),
        ("pkg.sub", "pkg/sub/__init__.py", ".child", "pkg.sub.child"),
        ("pkg.sub.mod", "pkg/sub/mod.py", "absolute", "absolute"),
    ],
)
def test_absolute_module(module_name, file_name, clause, expected):
    from cak.schema import CodeModule

    module = CodeModule(file_name, module_name, module_name)
    assert analysis.absolute_module(module, clause) == expected
