"""Unit-test generation pipeline built on the analysis and prompt modules.

Two phases.  Preprocessing gathers static context for a focal method
(inheritance chain, private call chain with bodies, mockable call sites,
constructors) and assembles a prompt skeleton.  Post-processing takes raw
model output, extracts the code, applies a few mechanical repairs and
reports whether the result parses.  Compiling or running the generated
tests is left to the caller, who can feed errors back via
:func:`feedback_prompt`.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable
from dataclasses import dataclass
from typing import TYPE_CHECKING

from cak.analysis import get_callable, get_class
from cak.callgraph import get_inheritance_chain, get_private_call_chain
from cak.errors import InvalidFeedback, NotAFocalMethod
from cak.parsing.base import parse_source, to_bytes
from cak.parsing.grammar import parse_tree
from cak.prompting import PromptSkeleton, RenderedPrompt, render
from cak.schema import CallSite, Language, ParseDiagnostic

if TYPE_CHECKING:
    from cak.session import AnalysisSession


@dataclass(frozen=True)
class TestGenContext:
    __test__ = False  # keep pytest from collecting this as a test class

    focal_class: str
    focal_method: str
    inheritance_chain: tuple[str, ...]
    # (signature, code_body) in call-chain order
    private_chain: tuple[tuple[str, str], ...]
    mockable_hits: tuple[CallSite, ...]
    constructors: tuple[str, ...]
    language: Language = Language.JAVA
    focal_body: str = ""


class FixKind(str, enum.Enum):
    ADDED_TEST_ANNOTATION = "ADDED_TEST_ANNOTATION"
    BALANCED_DELIMITERS_FLAGGED = "BALANCED_DELIMITERS_FLAGGED"
    ADDED_PACKAGE = "ADDED_PACKAGE"
    MERGED_IMPORTS = "MERGED_IMPORTS"


@dataclass(frozen=True)
class SanitizationReport:
    extracted: bool
    fixes_applied: tuple[FixKind, ...]
    final_code: str
    parsable: bool
    diagnostics: tuple[ParseDiagnostic, ...] = ()


# --------------------------------------------------------------------------
# Preprocessing


def identify_focal_methods(session: AnalysisSession, qualified_class: str) -> list[str]:
    """Non-private, non-constructor methods of the class, in source order."""
    klass = get_class(session, qualified_class)
    methods = [c for c in klass.callables if not c.is_constructor and "private" not in c.modifiers]
    methods.sort(key=lambda c: c.line_offset)
    return [c.full_signature for c in methods]


def _import_qualified(session: AnalysisSession, qualified_class: str, simple: str) -> set[str]:
    module = session.module_by_file.get(get_class(session, qualified_class).file_name)
    names = set()
    for imp in module.imports if module else ():
        if simple in imp.imports and imp.from_module:
            names.add(f"{imp.from_module}.{simple}")
    return names


def mockable_hits(
    session: AnalysisSession, qualified_class: str, signature: str, mockable_types: Iterable[str]
) -> list[CallSite]:
    wanted = set(mockable_types)
    method = get_callable(session, qualified_class, signature)
    if not wanted:
        return []
    hits = []
    for site in method.call_sites:
        if not site.receiver_type:
            continue
        simple = site.receiver_type.rsplit(".", 1)[-1]
        names = {site.receiver_type, simple} | _import_qualified(session, qualified_class, simple)
        if names & wanted:
            hits.append(site)
    return hits


def is_mocking_type(
    session: AnalysisSession, qualified_class: str, signature: str, mockable_types: Iterable[str]
) -> bool:
    """True iff some call site's receiver type is one of ``mockable_types``.

    A receiver matches by its declared name, its simple name, or the
    qualified name it was imported under.
    """
    return bool(mockable_hits(session, qualified_class, signature, mockable_types))


def build_testgen_context(
    session: AnalysisSession, qualified_class: str, signature: str, mockable_types: Iterable[str] = ()
) -> TestGenContext:
    focal = identify_focal_methods(session, qualified_class)
    if signature not in focal:
        get_callable(session, qualified_class, signature)
        raise NotAFocalMethod(signature)
    klass = get_class(session, qualified_class)
    chain = get_private_call_chain(session, qualified_class, signature)
    return TestGenContext(
        focal_class=qualified_class,
        focal_method=signature,
        inheritance_chain=tuple(get_inheritance_chain(session, qualified_class)),
        private_chain=tuple((s, get_callable(session, qualified_class, s).code_body) for s in chain),
        mockable_hits=tuple(mockable_hits(session, qualified_class, signature, mockable_types)),
        constructors=tuple(c.full_signature for c in klass.callables if c.is_constructor),
        language=session.language,
        focal_body=get_callable(session, qualified_class, signature).code_body,
    )


_FRAMEWORK = {Language.JAVA: "JUnit", Language.PYTHON: "pytest"}


def build_testgen_prompt(context: TestGenContext) -> PromptSkeleton:
    """Instruction, focal code, private-chain code, then optional hint lines.

    Placeholders refer to the context under the name ``context``; source
    code goes in literal blocks so braces in it are never interpreted.
    """
    lang = Language.parse(context.language)
    sk = PromptSkeleton()
    sk.add_line(
        f"Generate a {_FRAMEWORK[lang]} unit test for the method {{context.focal_method}}"
        " of class {context.focal_class}."
    )
    sk.add_code_block(context.focal_body, lang.value, literal=True)
    for _, body in context.private_chain:
        sk.add_code_block(body, lang.value, literal=True)
    if context.inheritance_chain:
        sk.add_line("The class {context.focal_class} inherits from: {context.inheritance_chain}.")
    if context.mockable_hits:
        receivers = sorted({h.receiver_type for h in context.mockable_hits})
        sk.add_line("Mock calls made on these types: " + ", ".join(receivers).replace("{", "{{").replace("}", "}}") + ".")
    return sk


def render_testgen_prompt(context: TestGenContext) -> RenderedPrompt:
    return render(build_testgen_prompt(context), {"context": context})


# --------------------------------------------------------------------------
# Post-processing

_FENCED = re.compile(r"^(`{3,})[^\n`]*\n(.*?)^\1[ \t]*$", re.DOTALL | re.MULTILINE)
_TEST_NAME = re.compile(r"test[A-Z_]")
_PAIRS = {")": "(", "]": "[", "}": "{"}
_MAX_PASSES = 8


def extract_code(raw: str) -> tuple[str, bool]:
    """The first fenced block's content, or the whole text when there is none."""
    m = _FENCED.search(raw)
    if m is None:
        return raw, False
    return m.group(2), True


def delimiters_balanced(language: Language, code: str) -> bool:
    """Bracket-balance scan that skips string literals and comments."""
    stack: list[str] = []
    i, n = 0, len(code)
    while i < n:
        ch = code[i]
        if language is Language.JAVA and code.startswith("//", i) or language is Language.PYTHON and ch == "#":
            j = code.find("\n", i)
            i = n if j < 0 else j
            continue
        if language is Language.JAVA and code.startswith("/*", i):
            j = code.find("*/", i + 2)
            i = n if j < 0 else j + 2
            continue
        if language is Language.PYTHON and code.startswith(('"""', "'''"), i):
            j = code.find(code[i : i + 3], i + 3)
            i = n if j < 0 else j + 3
            continue
        if ch in "\"'":
            j = i + 1
            while j < n and code[j] != ch and code[j] != "\n":
                j += 2 if code[j] == "\\" else 1
            i = j + 1
            continue
        if ch in "([{":
            stack.append(ch)
        elif ch in ")]}":
            if not stack or stack.pop() != _PAIRS[ch]:
                return False
        i += 1
    return not stack


def _has_test_annotation(method, src: bytes) -> bool:
    for child in method.children:
        if child.type == "modifiers":
            for mod in child.children:
                if mod.type == "marker_annotation" or mod.type == "annotation":
                    name = mod.child_by_field_name("name")
                    text = src[name.start_byte : name.end_byte].decode() if name else ""
                    if text.rsplit(".", 1)[-1] == "Test":
                        return True
    return False


def _add_test_annotations(code: str) -> tuple[str, bool]:
    src = to_bytes(code)
    tree = parse_tree(Language.JAVA, src)
    starts = []
    stack = [tree.root_node]
    while stack:
        node = stack.pop()
        if node.type == "method_declaration":
            name = node.child_by_field_name("name")
            rtype = node.child_by_field_name("type")
            if (
                name is not None
                and _TEST_NAME.match(src[name.start_byte : name.end_byte].decode())
                and rtype is not None
                and rtype.type == "void_type"
                and not _has_test_annotation(node, src)
                # error recovery can detach an annotation from its method
                and not src[: node.start_byte].rstrip().endswith(b"@Test")
            ):
                starts.append(node.start_byte)
        stack.extend(node.children)
    if not starts:
        return code, False
    out = src
    for at in sorted(set(starts), reverse=True):
        line_start = out.rfind(b"\n", 0, at) + 1
        prefix = out[line_start:at]
        if prefix.strip():
            # something else shares the line: annotate inline
            out = out[:at] + b"@Test " + out[at:]
        else:
            out = out[:line_start] + prefix + b"@Test\n" + out[line_start:]
    return out.decode("utf-8"), True


def _import_line(language: Language, entry: str) -> str:
    entry = " ".join(entry.split())
    if language is Language.JAVA:
        if not entry.startswith("import "):
            entry = f"import {entry}"
        return entry if entry.endswith(";") else entry + ";"
    if entry.startswith(("import ", "from ")):
        return entry
    return f"import {entry}"


_IMPORT_LINE = {
    Language.JAVA: re.compile(r"import\s+(?:static\s+)?[\w.]+(?:\.\*)?\s*;\s*"),
    Language.PYTHON: re.compile(r"(?:import\s+[\w., ]+|from\s+[\w.]+\s+import\s+[\w., *]+)"),
}
_PACKAGE_LINE = re.compile(r"\s*package\s+[\w.]+\s*;.*")


def _top_level_imports(language: Language, code: str) -> list[tuple[int, int, str]]:
    """(first_row, last_row, normalized_text) of each single-line import at column 0.

    Line-based on purpose: the answer must not change with parsability, or
    the sanitizer would stop being idempotent on broken code.
    """
    found = []
    for row, line in enumerate(code.split("\n")):
        if _IMPORT_LINE[language].fullmatch(line.rstrip()):
            found.append((row, row, " ".join(line.split())))
    return found


def _merge_imports(language: Language, code: str, required: Iterable[str]) -> tuple[str, bool]:
    existing = _top_level_imports(language, code)
    texts = [t for _, _, t in existing]
    wanted = [_import_line(language, r) for r in required]
    missing = [w for w in wanted if w not in texts]
    if len(set(texts)) == len(texts) and not missing:
        return code, False
    merged = sorted(set(texts) | set(wanted), key=lambda t: (not t.startswith("from __future__"), t))
    lines = code.split("\n")
    if existing:
        at = existing[0][0]
        drop = {r for first, last, _ in existing for r in range(first, last + 1)}
        kept = [ln for r, ln in enumerate(lines) if r not in drop]
        at -= sum(1 for r in drop if r < at)
        lines = kept[:at] + merged + kept[at:]
    else:
        at = 0
        if language is Language.JAVA:
            row = _package_row(lines)
            at = 0 if row is None else row + 1
        block = merged + [""] if at == 0 else [""] + merged
        lines = lines[:at] + block + lines[at:]
    return "\n".join(lines), True


def _package_row(lines: list[str]) -> int | None:
    """Row of a ``package`` line that precedes all other code, if any."""
    for row, line in enumerate(lines):
        stripped = line.strip()
        if not stripped or stripped.startswith(("//", "/*", "*")):
            continue
        return row if _PACKAGE_LINE.fullmatch(line) else None
    return None


def _has_package(code: str) -> bool:
    return _package_row(code.split("\n")) is not None


def sanitize_generated_output(
    language: Language | str,
    raw_llm_text: str,
    target_package: str = "",
    required_imports: Iterable[str] = (),
) -> SanitizationReport:
    """Extract, repair and check model output.  Never raises on bad code.

    Repairs: ``@Test`` on void ``test[A-Z_]...`` methods lacking it (Java),
    a missing ``package`` line (Java), and a merged, deduplicated, sorted
    import block.  Unbalanced delimiters are flagged, never repaired.
    """
    lang = Language.parse(language)
    code, extracted = extract_code(raw_llm_text)
    required = tuple(required_imports)
    fixes: set[FixKind] = set()
    # Each repair can change how the others see broken code, so run them to
    # a fixpoint; that is what makes a second sanitize pass a no-op.
    for _ in range(_MAX_PASSES):
        before = code
        if lang is Language.JAVA:
            code, changed = _add_test_annotations(code)
            if changed:
                fixes.add(FixKind.ADDED_TEST_ANNOTATION)
            if target_package and not _has_package(code):
                code = f"package {target_package};\n\n{code}"
                fixes.add(FixKind.ADDED_PACKAGE)
        code, changed = _merge_imports(lang, code, required)
        if changed:
            fixes.add(FixKind.MERGED_IMPORTS)
        if code == before:
            break
    result = parse_source(lang, code)
    if not result.ok and not delimiters_balanced(lang, code):
        fixes.add(FixKind.BALANCED_DELIMITERS_FLAGGED)
    ordered = tuple(k for k in FixKind if k in fixes)
    return SanitizationReport(extracted, ordered, code, result.ok, result.diagnostics)


def feedback_prompt(previous_prompt: PromptSkeleton, report: SanitizationReport, error_text: str = "") -> PromptSkeleton:
    """Previous skeleton plus a failure line and a block with the errors."""
    if report.parsable and not error_text.strip():
        raise InvalidFeedback("nothing failed: the output parsed and no error text was given")
    details = error_text if error_text.strip() else "\n".join(str(d) for d in report.diagnostics)
    return previous_prompt.copy().add_line("The previous attempt failed:").add_code_block(details, "", literal=True)
