"""Per-language grammar table.

All grammar-specific knowledge that is plain data lives here: the
tree-sitter language object, node-kind sets, and the declarative capture
queries each extractor runs.  Keeping the queries in one table means the
extractors never hard-code which grammar a construct comes from.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import tree_sitter
import tree_sitter_java
import tree_sitter_python

from cak.errors import UnsupportedLanguage
from cak.schema import Language


@dataclass(frozen=True)
class GrammarSpec:
    language: Language
    file_suffix: str
    type_kinds: frozenset[str]
    callable_kinds: frozenset[str]
    call_kinds: frozenset[str]
    # node kinds that open a new function scope; types nested under one are
    # local/anonymous and are not hoisted into the type index
    function_scopes: frozenset[str]
    queries: dict[str, str]


GRAMMARS: dict[Language, GrammarSpec] = {
    Language.JAVA: GrammarSpec(
        language=Language.JAVA,
        file_suffix=".java",
        type_kinds=frozenset(
            {
                "class_declaration",
                "interface_declaration",
                "enum_declaration",
                "annotation_type_declaration",
                "record_declaration",
            }
        ),
        callable_kinds=frozenset({"method_declaration", "constructor_declaration", "compact_constructor_declaration"}),
        call_kinds=frozenset({"method_invocation", "object_creation_expression", "explicit_constructor_invocation"}),
        function_scopes=frozenset(
            {
                "method_declaration",
                "constructor_declaration",
                "compact_constructor_declaration",
                "lambda_expression",
                "object_creation_expression",
                "static_initializer",
                "block",
            }
        ),
        queries={
            "types": """
                [(class_declaration) (interface_declaration) (enum_declaration)
                 (annotation_type_declaration) (record_declaration)] @type
            """,
            "callables": """
                [(method_declaration) (constructor_declaration)
                 (compact_constructor_declaration)] @callable
            """,
            "fields": "[(field_declaration) (constant_declaration)] @field",
            "imports": "(import_declaration) @import",
            "package": "(package_declaration) @package",
            "calls": """
                [(method_invocation) (object_creation_expression)
                 (explicit_constructor_invocation)] @call
            """,
            "locals": """
                [(formal_parameter) (spread_parameter) (local_variable_declaration)
                 (enhanced_for_statement) (catch_formal_parameter) (resource)] @local
            """,
        },
    ),
    Language.PYTHON: GrammarSpec(
        language=Language.PYTHON,
        file_suffix=".py",
        type_kinds=frozenset({"class_definition"}),
        callable_kinds=frozenset({"function_definition"}),
        call_kinds=frozenset({"call"}),
        function_scopes=frozenset({"function_definition", "lambda"}),
        queries={
            "types": "(class_definition) @type",
            "callables": "(function_definition) @callable",
            "imports": "[(import_statement) (import_from_statement) (future_import_statement)] @import",
            "calls": "(call) @call",
            "locals": """
                [(typed_parameter) (typed_default_parameter)
                 (assignment left: (identifier))] @local
            """,
        },
    ),
}


def grammar_for(language: Language | str) -> GrammarSpec:
    return GRAMMARS[Language.parse(language)]


@functools.lru_cache(maxsize=None)
def ts_language(language: Language) -> tree_sitter.Language:
    if language is Language.JAVA:
        return tree_sitter.Language(tree_sitter_java.language())
    if language is Language.PYTHON:
        return tree_sitter.Language(tree_sitter_python.language())
    raise UnsupportedLanguage(language)


@functools.lru_cache(maxsize=None)
def _query(language: Language, role: str) -> tree_sitter.Query:
    return tree_sitter.Query(ts_language(language), GRAMMARS[language].queries[role])


def capture(language: Language, role: str, node: tree_sitter.Node) -> list[tree_sitter.Node]:
    """Run the ``role`` query under ``node``; nodes come back in source order."""
    found = tree_sitter.QueryCursor(_query(language, role)).captures(node)
    nodes = [n for group in found.values() for n in group]
    nodes.sort(key=lambda n: (n.start_byte, -n.end_byte))
    return nodes


def parse_tree(language: Language, source: bytes) -> tree_sitter.Tree:
    # parsers are cheap; one per call keeps this safe across threads
    return tree_sitter.Parser(ts_language(language)).parse(source)
