"""Grammar-based parsing backends.

``parse_source``/``is_parsable`` report syntax errors; ``extract_module`` maps
one source file onto a :class:`~cak.schema.CodeModule`; ``extract_call_sites``
lists invocations inside a standalone callable body.
"""

from __future__ import annotations

from collections.abc import Mapping, Iterable

from cak.parsing import java, python
from cak.parsing.base import ParseResult, is_parsable, parse_source, to_bytes
from cak.parsing.common import ReceiverScope
from cak.schema import CallSite, CodeModule, Language

__all__ = ["ParseResult", "extract_call_sites", "extract_module", "is_parsable", "parse_source"]

_EXTRACTORS = {Language.JAVA: java, Language.PYTHON: python}


def extract_module(language: Language | str, file_path: str, source_text: str | bytes) -> CodeModule:
    """Map one file onto the schema; unparsable input yields diagnostics, never an exception."""
    lang = Language.parse(language)
    return _EXTRACTORS[lang].extract_module(str(file_path), to_bytes(source_text))


def extract_call_sites(
    language: Language | str,
    callable_body_text: str | bytes,
    body_start_line: int = 1,
    *,
    body_start_col: int = 0,
    enclosing_type: str = "",
    super_type: str = "",
    field_types: Mapping[str, str] | None = None,
    local_types: Mapping[str, str] | None = None,
    known_types: Iterable[str] = (),
) -> list[CallSite]:
    """Call sites in a callable body, positioned as if the body began at ``body_start_line``.

    The keyword arguments supply the lexical context a bare body lacks: the
    enclosing type's simple name (receiver of implicit ``this``/``self``
    calls), its first supertype, declared field types, and extra local types.
    """
    lang = Language.parse(language)
    scope = ReceiverScope(
        enclosing=enclosing_type,
        super_type=super_type,
        fields=dict(field_types or {}),
        locals=dict(local_types or {}),
        known_types=frozenset(known_types),
    )
    return list(_EXTRACTORS[lang].extract_call_sites(to_bytes(callable_body_text), body_start_line, body_start_col, scope))
