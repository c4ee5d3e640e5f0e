"""Language-neutral code schema.

Every backend maps its constructs onto these frozen dataclasses: a
``CodeModule`` per source file holding ``CodeType`` objects (classes,
interfaces, enums, structs), which hold ``Callable`` objects, which hold
``CallSite`` objects.  Java and Python populate the same fields; where a
concept does not exist in a language the field is left empty (e.g.
``CodeType.interfaces`` for Python, ``CodeModule.callables`` for Java).

The module also carries the generic JSON codec used by snapshots and the CLI.
Serialization emits object keys in field-declaration order so that output is
byte-stable.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import logging
import re
import types
import typing
from dataclasses import dataclass, field
from typing import Any

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"

LineOffset = tuple[int, int]


class Language(str, enum.Enum):
    JAVA = "java"
    PYTHON = "python"

    @classmethod
    def parse(cls, value: Language | str) -> Language:
        from cak.errors import UnsupportedLanguage

        if isinstance(value, Language):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise UnsupportedLanguage(value) from None


class TypeKind(str, enum.Enum):
    CLASS = "class"
    INTERFACE = "interface"
    STRUCT = "struct"
    ENUM = "enum"
    ABSTRACT_CLASS = "abstract_class"


@dataclass(frozen=True)
class ParseDiagnostic:
    file: str
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        where = f"{self.file}:" if self.file else ""
        return f"{where}{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Parameter:
    arg_name: str
    arg_type: str = ""


@dataclass(frozen=True)
class CallSite:
    target_method: str
    receiver_type: str
    # Source text of the explicit receiver ("" for a bare call).  The resolver
    # needs it to tell ``foo()`` from ``unknown.foo()``.
    receiver_expr: str
    arguments: tuple[str, ...]
    line_offset: LineOffset
    col_offset: LineOffset


@dataclass(frozen=True)
class Callable:
    method_name: str
    full_signature: str
    code_body: str
    is_static: bool
    is_constructor: bool
    modifiers: tuple[str, ...]
    formal_params: tuple[Parameter, ...]
    return_type: str
    call_sites: tuple[CallSite, ...]
    line_offset: LineOffset

    @property
    def arity(self) -> int:
        return len(self.formal_params)


@dataclass(frozen=True)
class FieldDecl:
    field_name: str
    field_type: str
    line_offset: LineOffset


@dataclass(frozen=True)
class CodeType:
    type_name: str
    qualified_name: str
    kind: TypeKind
    code_body: str
    file_name: str
    modifiers: tuple[str, ...]
    super_classes: tuple[str, ...]
    interfaces: tuple[str, ...]
    fields: tuple[FieldDecl, ...]
    callables: tuple[Callable, ...]
    line_offset: LineOffset

    # Names used by the original devkit API.
    @property
    def extends_list(self) -> tuple[str, ...]:
        return self.super_classes

    @property
    def implements_list(self) -> tuple[str, ...]:
        return self.interfaces


@dataclass(frozen=True)
class ImportDecl:
    from_module: str
    imports: tuple[str, ...]
    raw_text: str


@dataclass(frozen=True)
class CodeModule:
    file_name: str
    qualified_name: str
    # Java package, or the module's own qualified name for Python.
    package_name: str
    types: tuple[CodeType, ...] = ()
    imports: tuple[ImportDecl, ...] = ()
    callables: tuple[Callable, ...] = ()
    diagnostics: tuple[ParseDiagnostic, ...] = ()


@dataclass(frozen=True)
class CompilationUnit:
    file_path: str
    package_name: str
    imports: tuple[ImportDecl, ...]
    types: tuple[str, ...]


@dataclass(frozen=True)
class BuildAttributes:
    build_file_type: str
    build_tool: str
    package_name: str | None = None
    version: str | None = None
    dependencies: tuple[str, ...] = ()
    scripts: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConfigArtifact:
    config_file_name: str
    code_body: str
    config_type: str
    settings: dict[str, str] = field(default_factory=dict, hash=False)


# --------------------------------------------------------------------------
# Kind normalization

_KIND_TABLE: dict[Language, dict[str, TypeKind]] = {
    Language.JAVA: {
        "class_declaration": TypeKind.CLASS,
        "interface_declaration": TypeKind.INTERFACE,
        "enum_declaration": TypeKind.ENUM,
        "annotation_type_declaration": TypeKind.INTERFACE,
    },
    Language.PYTHON: {
        "class_definition": TypeKind.CLASS,
    },
}


def normalize_kind(language: Language | str, raw_kind: str) -> tuple[TypeKind, str | None]:
    """Map a grammar node kind onto a schema kind.

    Total: unknown kinds fall back to CLASS and the second element carries a
    message the caller records as a diagnostic.
    """
    lang = Language.parse(language)
    kind = _KIND_TABLE[lang].get(raw_kind)
    if kind is None:
        return TypeKind.CLASS, f"unknown {lang.value} type kind {raw_kind!r} mapped to class"
    return kind, None


# --------------------------------------------------------------------------
# Signatures

_SIG_RE = re.compile(r"^(?P<name>[^()\s]+)\((?P<params>.*)\)$")


def make_signature(name: str, param_types: typing.Iterable[str]) -> str:
    params = ",".join(re.sub(r"\s+", "", t) for t in param_types)
    return f"{name}({params})"


def split_signature(signature: str) -> tuple[str, int]:
    """Return (name, arity) for a normalized signature like ``add(int,int)``."""
    m = _SIG_RE.match(signature)
    if not m:
        raise ValueError(f"not a signature: {signature!r}")
    params = m.group("params")
    if not params:
        return m.group("name"), 0
    # commas inside generic arguments do not separate parameters
    depth = 0
    count = 1
    for ch in params:
        if ch in "<[(":
            depth += 1
        elif ch in ">])":
            depth -= 1
        elif ch == "," and depth == 0:
            count += 1
    return m.group("name"), count


# --------------------------------------------------------------------------
# JSON codec


def to_jsonable(obj: Any) -> Any:
    """Convert schema objects into plain JSON values, keys in declared order."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.init}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, typing.Mapping):
        return {str(k): to_jsonable(obj[k]) for k in sorted(obj)}
    return obj


@functools.lru_cache(maxsize=None)
def _hints(cls: type) -> dict[str, Any]:
    return typing.get_type_hints(cls)


def from_jsonable(tp: Any, data: Any, where: str = "$") -> Any:
    """Inverse of :func:`to_jsonable` for a target type annotation."""
    from cak.errors import MalformedSnapshot

    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin in (typing.Union, types.UnionType):
        if data is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return from_jsonable(inner[0], data, where)
    if dataclasses.is_dataclass(tp):
        if not isinstance(data, dict):
            raise MalformedSnapshot(f"{where}: expected object for {tp.__name__}")
        hints = _hints(tp)
        kwargs = {}
        init_fields = [f for f in dataclasses.fields(tp) if f.init]
        for f in init_fields:
            if f.name not in data:
                if f.default is not dataclasses.MISSING or f.default_factory is not dataclasses.MISSING:
                    continue
                raise MalformedSnapshot(f"{where}: missing key {f.name!r} for {tp.__name__}")
            kwargs[f.name] = from_jsonable(hints[f.name], data[f.name], f"{where}.{f.name}")
        extra = set(data) - {f.name for f in init_fields}
        if extra:
            log.warning("%s: ignoring unknown keys %s", where, sorted(extra))
        return tp(**kwargs)
    if origin is tuple:
        if not isinstance(data, list):
            raise MalformedSnapshot(f"{where}: expected array")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(from_jsonable(args[0], x, f"{where}[{i}]") for i, x in enumerate(data))
        if len(data) != len(args):
            raise MalformedSnapshot(f"{where}: expected {len(args)} items")
        return tuple(from_jsonable(a, x, f"{where}[{i}]") for i, (a, x) in enumerate(zip(args, data)))
    if origin is dict:
        if not isinstance(data, dict):
            raise MalformedSnapshot(f"{where}: expected object")
        return {str(k): from_jsonable(args[1], v, f"{where}.{k}") for k, v in data.items()}
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(data)
        except ValueError:
            raise MalformedSnapshot(f"{where}: bad {tp.__name__} value {data!r}") from None
    if tp is bool:
        if not isinstance(data, bool):
            raise MalformedSnapshot(f"{where}: expected boolean")
        return data
    if tp is int:
        if isinstance(data, bool) or not isinstance(data, int):
            raise MalformedSnapshot(f"{where}: expected integer")
        return data
    if tp is str:
        if not isinstance(data, str):
            raise MalformedSnapshot(f"{where}: expected string")
        return data
    return data
