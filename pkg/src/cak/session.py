"""Analysis sessions: configuration, project discovery, orchestration and snapshots.

``create_session`` parses every source file of the configured language under
the project root and freezes the result in an :class:`AnalysisSession`.
Sessions serialize to one compact JSON document (``schema_to_json``), which
is both the on-disk snapshot format and what the CLI prints.
"""

from __future__ import annotations

import dataclasses
import enum
import fnmatch
import hashlib
import json
import logging
import os
import re
import xml.etree.ElementTree as ET
from collections.abc import Callable as Thunk
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from cak.callgraph import CallEdge, CallableRef, CallGraph, RefKind, build_call_graph
from cak.errors import IoFailure, MalformedSnapshot, ProjectPathNotFound, SchemaVersionMismatch
from cak.parsing import extract_module
from cak.parsing.grammar import grammar_for
from cak.schema import (
    SCHEMA_VERSION,
    BuildAttributes,
    Callable,
    CallSite,
    CodeModule,
    CodeType,
    ConfigArtifact,
    Language,
    ParseDiagnostic,
    from_jsonable,
    to_jsonable,
)

log = logging.getLogger(__name__)

DEFAULT_IGNORES = ("target/", "build/", ".git/", "__pycache__/")


class AnalysisLevel(str, enum.Enum):
    SYMBOL_TABLE = "symbol_table"
    CALL_GRAPH = "call_graph"


class Engine(str, enum.Enum):
    BUILTIN_SYNTAX = "builtin_syntax"


@dataclass(frozen=True)
class ToolkitConfig:
    language: Language
    project_path: Path
    analysis_level: AnalysisLevel = AnalysisLevel.SYMBOL_TABLE
    engine: Engine = Engine.BUILTIN_SYNTAX
    cache_dir: Path | None = None
    ignore_globs: tuple[str, ...] = DEFAULT_IGNORES

    def __post_init__(self) -> None:
        object.__setattr__(self, "language", Language.parse(self.language))
        object.__setattr__(self, "project_path", Path(self.project_path))
        object.__setattr__(self, "analysis_level", AnalysisLevel(self.analysis_level))
        object.__setattr__(self, "engine", Engine(self.engine))
        if self.cache_dir is not None:
            object.__setattr__(self, "cache_dir", Path(self.cache_dir))


@dataclass(frozen=True)
class AnalysisSession:
    config: ToolkitConfig = field(compare=False)
    schema_version: str
    language: Language
    modules: tuple[CodeModule, ...]
    call_graph: CallGraph | None = None
    build: BuildAttributes | None = None
    configs: tuple[ConfigArtifact, ...] = ()

    type_index: Mapping[str, CodeType] = field(init=False, repr=False, compare=False)
    callable_index: Mapping[tuple[str, str], Callable] = field(init=False, repr=False, compare=False)
    module_by_file: Mapping[str, CodeModule] = field(init=False, repr=False, compare=False)
    module_by_name: Mapping[str, CodeModule] = field(init=False, repr=False, compare=False)
    module_of_callable: Mapping[tuple[str, str], CodeModule] = field(init=False, repr=False, compare=False)
    _derived: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        modules = tuple(sorted(self.modules, key=lambda m: m.file_name))
        types: dict[str, CodeType] = {}
        callables: dict[tuple[str, str], Callable] = {}
        owner_module: dict[tuple[str, str], CodeModule] = {}
        for m in modules:
            for t in m.types:
                if t.qualified_name in types:
                    log.warning("duplicate type %s in %s ignored", t.qualified_name, m.file_name)
                    continue
                types[t.qualified_name] = t
                for c in t.callables:
                    callables.setdefault((t.qualified_name, c.full_signature), c)
                    owner_module.setdefault((t.qualified_name, c.full_signature), m)
            for c in m.callables:
                callables.setdefault((m.qualified_name, c.full_signature), c)
                owner_module.setdefault((m.qualified_name, c.full_signature), m)
        object.__setattr__(self, "modules", modules)
        object.__setattr__(self, "language", Language.parse(self.language))
        object.__setattr__(self, "configs", tuple(self.configs))
        object.__setattr__(self, "type_index", MappingProxyType(types))
        object.__setattr__(self, "callable_index", MappingProxyType(callables))
        object.__setattr__(self, "module_by_file", MappingProxyType({m.file_name: m for m in modules}))
        object.__setattr__(self, "module_by_name", MappingProxyType({m.qualified_name: m for m in modules}))
        object.__setattr__(self, "module_of_callable", MappingProxyType(owner_module))
        object.__setattr__(self, "_derived", {})

    @property
    def analysis_level(self) -> AnalysisLevel:
        return AnalysisLevel.CALL_GRAPH if self.call_graph is not None else AnalysisLevel.SYMBOL_TABLE

    def derived(self, name: str, compute: Thunk[[], Any]) -> Any:
        """Memoize a value computed from this (immutable) session."""
        if name not in self._derived:
            self._derived[name] = compute()
        return self._derived[name]


def supported_languages() -> list[Language]:
    return [Language.JAVA, Language.PYTHON]


# --------------------------------------------------------------------------
# Discovery


def _ignored_dir(rel_dir: str, name: str, globs: tuple[str, ...]) -> bool:
    if name.startswith("."):
        return True
    for g in globs:
        if not g.endswith("/"):
            continue
        pat = g.rstrip("/")
        if fnmatch.fnmatch(name, pat) or fnmatch.fnmatch(rel_dir, pat):
            return True
    return False


def discover_files(config: ToolkitConfig) -> list[str]:
    """Source files of the configured language, relative posix paths, sorted."""
    root = config.project_path
    suffix = grammar_for(config.language).file_suffix
    file_globs = [g for g in config.ignore_globs if not g.endswith("/")]
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        rel = Path(dirpath).relative_to(root).as_posix()
        rel = "" if rel == "." else rel
        dirnames[:] = sorted(
            d for d in dirnames if not _ignored_dir(f"{rel}/{d}" if rel else d, d, config.ignore_globs)
        )
        for f in sorted(filenames):
            if not f.endswith(suffix) or f.startswith("."):
                continue
            rel_file = f"{rel}/{f}" if rel else f
            if any(fnmatch.fnmatch(rel_file, g) for g in file_globs):
                continue
            found.append(rel_file)
    return sorted(found)


# --------------------------------------------------------------------------
# Build and configuration files

_BUILD_FILES = {
    Language.JAVA: ("pom.xml", "build.gradle"),
    Language.PYTHON: ("pyproject.toml", "requirements.txt"),
}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _pom(text: str) -> tuple[BuildAttributes, dict[str, str]]:
    root = ET.fromstring(text)
    top = {_local(c.tag): (c.text or "").strip() for c in root if len(c) == 0 and isinstance(c.tag, str)}
    deps = []
    for el in root.iter():
        if isinstance(el.tag, str) and _local(el.tag) == "dependency":
            parts = {_local(c.tag): (c.text or "").strip() for c in el if isinstance(c.tag, str)}
            coord = ":".join(p for p in (parts.get("groupId"), parts.get("artifactId"), parts.get("version")) if p)
            if coord and coord not in deps:
                deps.append(coord)
    build = BuildAttributes(
        build_file_type="pom.xml",
        build_tool="maven",
        package_name=top.get("artifactId"),
        version=top.get("version"),
        dependencies=tuple(deps),
    )
    return build, top


_GRADLE_DEP = re.compile(
    r"^\s*(?:implementation|api|compile|compileOnly|runtimeOnly|testImplementation|testCompile)\s*\(?\s*['\"]([^'\"]+)['\"]",
    re.M,
)
_GRADLE_SETTING = re.compile(r"^(\w+)\s*=\s*['\"]?([^'\"\n]*)['\"]?\s*$", re.M)


def _gradle(text: str) -> tuple[BuildAttributes, dict[str, str]]:
    settings = {k: v.strip() for k, v in _GRADLE_SETTING.findall(text)}
    deps = list(dict.fromkeys(_GRADLE_DEP.findall(text)))
    tasks = list(dict.fromkeys(re.findall(r"^\s*task\s+(\w+)", text, re.M)))
    build = BuildAttributes(
        build_file_type="build.gradle",
        build_tool="gradle",
        package_name=settings.get("group") or None,
        version=settings.get("version") or None,
        dependencies=tuple(deps),
        scripts=tuple(tasks),
    )
    return build, settings


def _flatten(data: Mapping[str, Any], prefix: str = "") -> dict[str, str]:
    out: dict[str, str] = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(v, ensure_ascii=False, sort_keys=True, default=str)
        else:
            out[key] = str(v)
    return out


def _pyproject(text: str) -> tuple[BuildAttributes, dict[str, str]]:
    data = tomllib.loads(text)
    project = data.get("project", {})
    poetry = data.get("tool", {}).get("poetry", {})
    backend = data.get("build-system", {}).get("build-backend", "")
    tool = "poetry" if poetry else (backend.split(".")[0] if backend else "setuptools")
    deps = list(project.get("dependencies", [])) or [k for k in poetry.get("dependencies", {}) if k != "python"]
    scripts = list(project.get("scripts", {})) or list(poetry.get("scripts", {}))
    build = BuildAttributes(
        build_file_type="pyproject.toml",
        build_tool=tool,
        package_name=project.get("name") or poetry.get("name"),
        version=project.get("version") or poetry.get("version"),
        dependencies=tuple(dict.fromkeys(deps)),
        scripts=tuple(scripts),
    )
    return build, _flatten(data)


_REQ_NAME = re.compile(r"^([A-Za-z0-9][A-Za-z0-9._-]*)(.*)$")


def _requirements(text: str) -> tuple[BuildAttributes, dict[str, str]]:
    deps: list[str] = []
    settings: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("-"):
            continue
        if line not in deps:
            deps.append(line)
        m = _REQ_NAME.match(line)
        if m:
            settings.setdefault(m.group(1), m.group(2).strip())
    return BuildAttributes("requirements.txt", "pip", dependencies=tuple(deps)), settings


_PARSERS = {
    "pom.xml": (_pom, "xml"),
    "build.gradle": (_gradle, "gradle"),
    "pyproject.toml": (_pyproject, "toml"),
    "requirements.txt": (_requirements, "requirements"),
}


def read_build_files(root: Path, language: Language) -> tuple[BuildAttributes | None, tuple[ConfigArtifact, ...]]:
    build = None
    configs = []
    for name in _BUILD_FILES[language]:
        path = root / name
        if not path.is_file():
            continue
        text = path.read_text(encoding="utf-8", errors="replace")
        parse, config_type = _PARSERS[name]
        try:
            attrs, settings = parse(text)
        except Exception as exc:  # malformed build file: keep the raw text
            log.warning("could not parse %s: %s", path, exc)
            attrs, settings = BuildAttributes(name, "unknown"), {}
        build = build or attrs
        configs.append(ConfigArtifact(name, text, config_type, dict(sorted(settings.items()))))
    return build, tuple(configs)


# --------------------------------------------------------------------------
# Session construction


def _analyze_file(language: Language, root: Path, rel: str) -> CodeModule:
    try:
        data = (root / rel).read_bytes()
    except OSError as exc:
        module = extract_module(language, rel, b"")
        diag = ParseDiagnostic(rel, 1, 0, f"unreadable file: {exc}")
        return dataclasses.replace(module, diagnostics=(diag,))
    return extract_module(language, rel, data)


def project_hash(config: ToolkitConfig, files: list[str]) -> str:
    h = hashlib.sha256()
    h.update(f"{SCHEMA_VERSION}\0{config.language.value}\0{config.analysis_level.value}\0".encode())
    for rel in [*files, *_BUILD_FILES[config.language]]:
        path = config.project_path / rel
        if path.is_file():
            h.update(rel.encode() + b"\0" + hashlib.sha256(path.read_bytes()).digest())
    return h.hexdigest()


def create_session(config: ToolkitConfig) -> AnalysisSession:
    """Parse and index a project.

    Files that fail to parse still produce modules (carrying diagnostics);
    only a missing project directory or an unsupported language is an error.
    """
    root = config.project_path
    if not root.is_dir():
        raise ProjectPathNotFound(root)
    files = discover_files(config)

    cache_file = None
    if config.cache_dir is not None:
        cache_file = config.cache_dir / f"{project_hash(config, files)}.json"
        if cache_file.is_file():
            try:
                cached = load_session(cache_file)
                return dataclasses.replace(cached, config=config)
            except (MalformedSnapshot, SchemaVersionMismatch, IoFailure) as exc:
                log.warning("ignoring stale cache %s: %s", cache_file, exc)

    with ThreadPoolExecutor(max_workers=min(8, max(1, len(files)))) as pool:
        modules = list(pool.map(lambda rel: _analyze_file(config.language, root, rel), files))
    build, configs = read_build_files(root, config.language)
    session = AnalysisSession(
        config=config,
        schema_version=SCHEMA_VERSION,
        language=config.language,
        modules=tuple(modules),
        build=build,
        configs=configs,
    )
    if config.analysis_level is AnalysisLevel.CALL_GRAPH:
        session = dataclasses.replace(session, call_graph=build_call_graph(session))

    if cache_file is not None:
        try:
            save_session(session, cache_file)
        except IoFailure as exc:
            log.warning("could not write cache: %s", exc)
    return session


# --------------------------------------------------------------------------
# JSON projection


def _graph_to_jsonable(graph: CallGraph) -> dict[str, Any]:
    return {
        "nodes": [to_jsonable(n) for n in graph.nodes],
        "edges": [
            {
                "caller": e.caller.key,
                "callee": e.callee.key,
                "ambiguous": e.ambiguous,
                "site": to_jsonable(e.site),
            }
            for e in graph.edges
        ],
    }


def _graph_from_jsonable(data: Any) -> CallGraph:
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise MalformedSnapshot("$.call_graph: expected object with nodes and edges")
    nodes = from_jsonable(tuple[CallableRef, ...], data["nodes"], "$.call_graph.nodes")
    by_key = {n.key: n for n in nodes}
    edges = []
    for i, e in enumerate(data["edges"] if isinstance(data["edges"], list) else []):
        where = f"$.call_graph.edges[{i}]"
        try:
            caller, callee = by_key[e["caller"]], by_key[e["callee"]]
            site = from_jsonable(CallSite, e["site"], f"{where}.site")
            ambiguous = bool(e.get("ambiguous", False))
        except (KeyError, TypeError) as exc:
            raise MalformedSnapshot(f"{where}: {exc}") from None
        edges.append(CallEdge(caller, callee, site, ambiguous))
    return CallGraph(nodes=nodes, edges=tuple(edges))


def session_to_jsonable(session: AnalysisSession) -> dict[str, Any]:
    out: dict[str, Any] = {
        "schema_version": session.schema_version,
        "language": session.language.value,
        "modules": [to_jsonable(m) for m in session.modules],
    }
    if session.type_index:
        out["types"] = {
            q: {
                "module": session.module_by_file[t.file_name].qualified_name,
                "file_name": t.file_name,
                "kind": t.kind.value,
            }
            for q, t in sorted(session.type_index.items())
        }
    if session.call_graph is not None:
        out["call_graph"] = _graph_to_jsonable(session.call_graph)
    if session.build is not None:
        out["build"] = to_jsonable(session.build)
    if session.configs:
        out["configs"] = [to_jsonable(c) for c in session.configs]
    return out


def schema_to_json(session: AnalysisSession) -> str:
    """Compact, byte-stable JSON text for a session (UTF-8, no trailing newline)."""
    return json.dumps(session_to_jsonable(session), ensure_ascii=False, separators=(",", ":"))


_TOP_KEYS = {"schema_version", "language", "modules", "types", "call_graph", "build", "configs"}


def schema_from_json(text: str | bytes) -> AnalysisSession:
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedSnapshot(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "schema_version" not in data:
        raise MalformedSnapshot("snapshot lacks schema_version")
    if data["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(data["schema_version"], SCHEMA_VERSION)
    for key in ("language", "modules"):
        if key not in data:
            raise MalformedSnapshot(f"snapshot lacks {key}")
    extra = set(data) - _TOP_KEYS
    if extra:
        log.warning("ignoring unknown snapshot keys %s", sorted(extra))
    try:
        language = Language(data["language"])
    except ValueError:
        raise MalformedSnapshot(f"unknown language {data['language']!r}") from None
    modules = from_jsonable(tuple[CodeModule, ...], data["modules"], "$.modules")
    graph = _graph_from_jsonable(data["call_graph"]) if data.get("call_graph") is not None else None
    build = from_jsonable(BuildAttributes, data["build"], "$.build") if data.get("build") is not None else None
    configs = from_jsonable(tuple[ConfigArtifact, ...], data.get("configs", []), "$.configs")
    session = AnalysisSession(
        config=ToolkitConfig(
            language=language,
            project_path=Path("."),
            analysis_level=AnalysisLevel.CALL_GRAPH if graph is not None else AnalysisLevel.SYMBOL_TABLE,
        ),
        schema_version=SCHEMA_VERSION,
        language=language,
        modules=modules,
        call_graph=graph,
        build=build,
        configs=configs,
    )
    declared = data.get("types", {})
    if not isinstance(declared, dict) or set(declared) != set(session.type_index):
        raise MalformedSnapshot("types index does not match the types declared in modules")
    return session


def save_session(session: AnalysisSession, path: str | os.PathLike[str]) -> None:
    text = schema_to_json(session) + "\n"
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write snapshot {path}: {exc}") from exc


def load_session(path: str | os.PathLike[str]) -> AnalysisSession:
    try:
        text = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read snapshot {path}: {exc}") from exc
    return schema_from_json(text)
