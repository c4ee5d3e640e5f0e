from __future__ import annotations

import socket

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cak import callgraph as cg
from cak.errors import EndpointUnreachable, HttpStatus, MalformedResponse, Timeout, UnresolvedPlaceholder
from cak.prompting import (
    CodeBlock,
    GraphBlock,
    LLMEndpointConfig,
    PromptSkeleton,
    RenderedPrompt,
    TextLine,
    execute_prompt,
    render,
)
from cak.testgen import build_testgen_context, render_testgen_prompt

from conftest import golden
from stub_server import stub_server


def test_builders_append_in_order():
    sk = PromptSkeleton().add_line("Generate a pytest unit test for the method").add_line("")
    sk.add_code_block("return 1;", "java")
    assert [type(b) for b in sk.blocks] == [TextLine, TextLine, CodeBlock]
    assert sk.blocks[1] == TextLine("")


def test_placeholders_kept_until_render(java_session):
    method = java_session.callable_index[("com.acme.Circle", "area()")]
    sk = PromptSkeleton().add_line("Method {callable.method_name} returns {callable.return_type}")
    sk.add_code_block("{callable.code_body}", "java")
    assert sk.blocks[1].code == "{callable.code_body}"
    text = render(sk, {"callable": method}).text
    assert text.startswith("Method area returns double\n```java\n@Override")


def test_render_without_placeholders_is_concatenation():
    sk = PromptSkeleton().add_line("a").add_line("b")
    assert render(sk).text == "a\nb"
    assert render(PromptSkeleton()).text == ""


def test_escaped_braces():
    assert render(PromptSkeleton().add_line("{{x}} and {{")).text == "{x} and {"


def test_unresolved_placeholder(java_session):
    method = java_session.callable_index[("com.acme.Circle", "area()")]
    with pytest.raises(UnresolvedPlaceholder) as info:
        render(PromptSkeleton().add_line("{callable.no_such_field}"), {"callable": method})
    assert info.value.path == "callable.no_such_field"
    with pytest.raises(UnresolvedPlaceholder):
        render(PromptSkeleton().add_line("{missing}"), {})
    with pytest.raises(UnresolvedPlaceholder):
        render(PromptSkeleton().add_line("{callable._derived}"), {"callable": method})


def test_tuple_and_enum_values_render_readably(java_session):
    klass = java_session.type_index["com.acme.AbstractShape"]
    text = render(PromptSkeleton().add_line("{t.kind}: {t.modifiers}"), {"t": klass}).text
    assert text == "abstract_class: public, abstract"


def test_code_fences_grow_past_backticks():
    text = render(PromptSkeleton().add_code_block("a ``` b", "md", literal=True)).text
    assert text == "````md\na ``` b\n````"


def test_graph_block(java_session):
    sub = cg.get_method_call_graph(java_session, "com.acme.Circle", "area()")
    sk = PromptSkeleton().add_graph(sub)
    assert isinstance(sk.blocks[0], GraphBlock)
    assert render(sk).text == (
        "Call graph:\n"
        "com.acme.Circle.area() -> com.acme.Circle.calcArea(double)\n"
        "com.acme.Circle.calcArea(double) -> com.acme.Circle.square(double)"
    )
    assert render(PromptSkeleton().add_graph(cg.CallGraph())).text == "Call graph:"


def test_circle_area_prompt_golden(java_session):
    ctx = build_testgen_context(java_session, "com.acme.Circle", "area()", set())
    assert render_testgen_prompt(ctx).text + "\n" == golden("circle_area_prompt.txt")


blocks = st.lists(
    st.one_of(
        st.text(alphabet="abc xyz", max_size=10).map(TextLine),
        st.text(alphabet="abc xyz;", max_size=10).map(lambda s: CodeBlock("java", s, True)),
    ),
    max_size=8,
)


@given(blocks)
def test_block_order_fidelity(bs):
    sk = PromptSkeleton(list(bs))
    text = render(sk).text
    pos = 0
    for b in bs:
        piece = b.text if isinstance(b, TextLine) else f"```java\n{b.code}\n```"
        found = text.find(piece, pos)
        assert found >= 0
        pos = found + len(piece)
    assert render(sk).text == text


def test_endpoint_config_validation():
    with pytest.raises(ValueError):
        LLMEndpointConfig("http://x", "m", timeout=0)


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("CAK_LLM_ENDPOINT", "http://other")
    monkeypatch.setenv("CAK_LLM_MODEL", "m2")
    cfg = LLMEndpointConfig("http://x", "m").with_env()
    assert (cfg.base_url, cfg.model_id) == ("http://other", "m2")


def test_execute_echo_sends_expected_body(monkeypatch):
    monkeypatch.delenv("CAK_LLM_ENDPOINT", raising=False)
    monkeypatch.delenv("CAK_LLM_MODEL", raising=False)
    with stub_server() as (url, seen):
        cfg = LLMEndpointConfig(url + "/echo", "tiny", timeout=5, max_tokens=7, temperature=0.5)
        assert execute_prompt(cfg, RenderedPrompt("hello")) == "hello"
    assert seen == [("/echo", {"model": "tiny", "prompt": "hello", "max_tokens": 7, "temperature": 0.5})]


def test_execute_error_statuses(monkeypatch):
    monkeypatch.delenv("CAK_LLM_ENDPOINT", raising=False)
    with stub_server() as (url, _):
        with pytest.raises(HttpStatus) as info:
            execute_prompt(LLMEndpointConfig(url + "/fail", "m", timeout=5), RenderedPrompt("x"))
        assert info.value.status == 500
        with pytest.raises(Timeout):
            execute_prompt(LLMEndpointConfig(url + "/slow", "m", timeout=0.3), RenderedPrompt("x"))
        with pytest.raises(MalformedResponse):
            execute_prompt(LLMEndpointConfig(url + "/garbage", "m", timeout=5), RenderedPrompt("x"))
        with pytest.raises(MalformedResponse):
            execute_prompt(LLMEndpointConfig(url + "/other", "m", timeout=5), RenderedPrompt("x"))


def test_execute_unreachable(monkeypatch):
    monkeypatch.delenv("CAK_LLM_ENDPOINT", raising=False)
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    with pytest.raises(EndpointUnreachable):
        execute_prompt(LLMEndpointConfig(f"http://127.0.0.1:{port}/", "m", timeout=2), RenderedPrompt("x"))


def test_execute_refuses_unresolved_prompt():
    with pytest.raises(ValueError):
        execute_prompt(LLMEndpointConfig("http://x", "m"), RenderedPrompt("x", placeholders_resolved=False))
