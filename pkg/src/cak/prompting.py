"""Prompt skeletons over schema objects, and a generic HTTP completion client.

A skeleton is an ordered list of text lines, code blocks and call-graph
blocks.  Text (and non-literal code) may contain ``{dotted.path}``
placeholders that are resolved against a context of schema objects at render
time; ``{{`` and ``}}`` produce literal braces.

>>> sk = PromptSkeleton().add_line("Explain {m.method_name}.")
>>> render(sk, {"m": {"method_name": "area"}}).text
'Explain area.'
"""

from __future__ import annotations

import enum
import json
import os
import re
import socket
import urllib.error
import urllib.request
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Union

from cak.callgraph import CallGraph
from cak.errors import EndpointUnreachable, HttpStatus, MalformedResponse, Timeout, UnresolvedPlaceholder

ENV_ENDPOINT = "CAK_LLM_ENDPOINT"
ENV_MODEL = "CAK_LLM_MODEL"

_PLACEHOLDER = re.compile(r"\{\{|\}\}|\{([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\}")


@dataclass(frozen=True)
class TextLine:
    text: str


@dataclass(frozen=True)
class CodeBlock:
    language_tag: str
    code: str
    # literal blocks skip placeholder substitution (for real source code)
    literal: bool = False


@dataclass(frozen=True)
class GraphBlock:
    graph: CallGraph


Block = Union[TextLine, CodeBlock, GraphBlock]


@dataclass
class PromptSkeleton:
    blocks: list[Block] = field(default_factory=list)

    def add_line(self, text: str) -> PromptSkeleton:
        self.blocks.append(TextLine(text))
        return self

    def add_code_block(self, code: str, language_tag: str = "", *, literal: bool = False) -> PromptSkeleton:
        self.blocks.append(CodeBlock(language_tag, code, literal))
        return self

    def add_graph(self, graph: CallGraph) -> PromptSkeleton:
        self.blocks.append(GraphBlock(graph))
        return self

    def copy(self) -> PromptSkeleton:
        return PromptSkeleton(list(self.blocks))


Composer = PromptSkeleton


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    placeholders_resolved: bool = True


def _format(value: Any) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_format(v) for v in value)
    return str(value)


def resolve_path(context: Mapping[str, Any], path: str) -> Any:
    head, *rest = path.split(".")
    if head not in context:
        raise UnresolvedPlaceholder(path)
    value = context[head]
    for part in rest:
        if part.startswith("_"):
            raise UnresolvedPlaceholder(path)
        if isinstance(value, Mapping):
            if part not in value:
                raise UnresolvedPlaceholder(path)
            value = value[part]
        elif hasattr(value, part):
            value = getattr(value, part)
        else:
            raise UnresolvedPlaceholder(path)
    return value


def substitute(template: str, context: Mapping[str, Any]) -> str:
    def repl(m: re.Match[str]) -> str:
        token = m.group(0)
        if token == "{{":
            return "{"
        if token == "}}":
            return "}"
        return _format(resolve_path(context, m.group(1)))

    return _PLACEHOLDER.sub(repl, template)


def _fence(code: str, tag: str) -> str:
    fence = "```"
    while fence in code:
        fence += "`"
    return f"{fence}{tag}\n{code.rstrip(chr(10))}\n{fence}"


def render_block(block: Block, context: Mapping[str, Any]) -> str:
    if isinstance(block, TextLine):
        return substitute(block.text, context)
    if isinstance(block, CodeBlock):
        code = block.code if block.literal else substitute(block.code, context)
        return _fence(code, block.language_tag)
    return "\n".join(["Call graph:", *block.graph.edge_lines()])


def render(skeleton: PromptSkeleton, context: Mapping[str, Any] | None = None) -> RenderedPrompt:
    """Render blocks in order, joined by LF.  Unknown placeholders raise."""
    context = context or {}
    return RenderedPrompt("\n".join(render_block(b, context) for b in skeleton.blocks), True)


# --------------------------------------------------------------------------
# Execution


@dataclass(frozen=True)
class LLMEndpointConfig:
    base_url: str
    model_id: str
    timeout: float = 60.0
    max_tokens: int = 512
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")

    def with_env(self, environ: Mapping[str, str] | None = None) -> LLMEndpointConfig:
        env = os.environ if environ is None else environ
        return LLMEndpointConfig(
            base_url=env.get(ENV_ENDPOINT) or self.base_url,
            model_id=env.get(ENV_MODEL) or self.model_id,
            timeout=self.timeout,
            max_tokens=self.max_tokens,
            temperature=self.temperature,
        )


def _is_timeout(exc: BaseException | object) -> bool:
    return isinstance(exc, (socket.timeout, TimeoutError))


def execute_prompt(config: LLMEndpointConfig, prompt: RenderedPrompt) -> str:
    """POST ``{model, prompt, max_tokens, temperature}`` and return ``completion``.

    ``CAK_LLM_ENDPOINT`` / ``CAK_LLM_MODEL`` override the config.  No retries.
    """
    if not prompt.placeholders_resolved:
        raise ValueError("prompt still contains unresolved placeholders")
    config = config.with_env()
    body = json.dumps(
        {
            "model": config.model_id,
            "prompt": prompt.text,
            "max_tokens": config.max_tokens,
            "temperature": config.temperature,
        }
    ).encode("utf-8")
    request = urllib.request.Request(
        config.base_url, data=body, method="POST", headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(request, timeout=config.timeout) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as exc:
        raise HttpStatus(exc.code, exc.read().decode("utf-8", "replace")) from None
    except urllib.error.URLError as exc:
        if _is_timeout(exc.reason):
            raise Timeout(f"no response from {config.base_url} within {config.timeout}s") from None
        raise EndpointUnreachable(f"{config.base_url}: {exc.reason}") from None
    except (socket.timeout, TimeoutError):
        raise Timeout(f"no response from {config.base_url} within {config.timeout}s") from None
    except (OSError, ValueError) as exc:
        raise EndpointUnreachable(f"{config.base_url}: {exc}") from None
    try:
        payload = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise MalformedResponse("response is not JSON") from None
    if not isinstance(payload, dict) or not isinstance(payload.get("completion"), str):
        raise MalformedResponse('response lacks a string "completion" field')
    return payload["completion"]
