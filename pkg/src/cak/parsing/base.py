from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass

import tree_sitter

from cak.parsing.grammar import parse_tree
from cak.schema import Language, LineOffset, ParseDiagnostic


@dataclass(frozen=True)
class ParseResult:
    ok: bool
    diagnostics: tuple[ParseDiagnostic, ...]
    # (total lines, total bytes)
    root_span: tuple[int, int]


def to_bytes(source: str | bytes) -> bytes:
    if isinstance(source, bytes):
        return source
    return source.encode("utf-8", "surrogatepass")


def node_text(node: tree_sitter.Node | None, src: bytes) -> str:
    if node is None:
        return ""
    return src[node.start_byte : node.end_byte].decode("utf-8", "replace")


def squash(text: str) -> str:
    return re.sub(r"\s+", "", text)


def line_span(node: tree_sitter.Node) -> LineOffset:
    start = node.start_point.row + 1
    end = node.end_point.row + 1
    if node.end_point.column == 0 and end > start:
        end -= 1
    return start, end


def byte_point(src: bytes, offset: int) -> tuple[int, int]:
    """1-based line and 0-based byte column of ``offset``.

    Used for error and missing nodes instead of ``Node.start_point``, which
    corrupts memory on those nodes in tree-sitter 0.26.0.
    """
    line_start = src.rfind(b"\n", 0, offset) + 1
    return src.count(b"\n", 0, offset) + 1, offset - line_start


def walk(node: tree_sitter.Node) -> Iterator[tree_sitter.Node]:
    """Pre-order traversal without recursion (error trees can nest deeply)."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def has_ancestor_kind(node: tree_sitter.Node, kinds: frozenset[str], stop: tree_sitter.Node | None = None) -> bool:
    p = node.parent
    while p is not None and p != stop:
        if p.type in kinds:
            return True
        p = p.parent
    return False


def count_lines(src: bytes) -> int:
    if not src:
        return 0
    return src.count(b"\n") + (0 if src.endswith(b"\n") else 1)


def collect_diagnostics(tree: tree_sitter.Tree, src: bytes, file: str = "") -> tuple[ParseDiagnostic, ...]:
    """One diagnostic per outermost ERROR node and per MISSING node."""
    out: list[ParseDiagnostic] = []
    root = tree.root_node
    if not root.has_error:
        return ()
    stack = [root]
    while stack:
        n = stack.pop()
        if n.is_missing:
            out.append(ParseDiagnostic(file, *byte_point(src, n.start_byte), f"missing {n.type!r}"))
            continue
        if n.is_error:
            snippet = node_text(n, src)[:24].replace("\n", "\\n")
            out.append(ParseDiagnostic(file, *byte_point(src, n.start_byte), f"syntax error near {snippet!r}"))
            continue
        if n.has_error:
            stack.extend(reversed(n.children))
    out.sort(key=lambda d: (d.line, d.column, d.message))
    if not out:
        # has_error without a located culprit; should not happen but stay total
        out.append(ParseDiagnostic(file, 1, 0, "syntax error"))
    return tuple(out)


def parse_source(language: Language | str, source_text: str | bytes) -> ParseResult:
    """Parse ``source_text`` and report syntax errors; never raises on bad input."""
    lang = Language.parse(language)
    src = to_bytes(source_text)
    tree = parse_tree(lang, src)
    diags = collect_diagnostics(tree, src)
    ok = not any(d.severity == "error" for d in diags)
    return ParseResult(ok=ok, diagnostics=diags, root_span=(count_lines(src), len(src)))


def is_parsable(language: Language | str, source_text: str | bytes) -> bool:
    return parse_source(language, source_text).ok
