"""Language-independent query surface over an :class:`~cak.session.AnalysisSession`.

Every function here is read-only and accepts Java and Python sessions alike.
Types are addressed by qualified name; ``resolve_simple_name`` is the escape
hatch for callers that only know a simple name.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from cak.errors import FileNotInSession, MethodNotFound, TypeNotFound
from cak.parsing.common import base_type
from cak.schema import Callable, CodeModule, CodeType, CompilationUnit, ImportDecl, Language

if TYPE_CHECKING:
    from cak.session import AnalysisSession


def get_classes(session: AnalysisSession) -> dict[str, CodeType]:
    return {k: session.type_index[k] for k in sorted(session.type_index)}


def get_class(session: AnalysisSession, qualified_name: str) -> CodeType:
    try:
        return session.type_index[qualified_name]
    except KeyError:
        raise TypeNotFound(qualified_name) from None


def resolve_simple_name(session: AnalysisSession, simple_name: str) -> list[str]:
    """All qualified type names whose simple name is ``simple_name``, sorted."""
    return sorted(q for q, t in session.type_index.items() if t.type_name == simple_name)


def get_methods_in_class(session: AnalysisSession, qualified_class_name: str) -> dict[str, Callable]:
    klass = get_class(session, qualified_class_name)
    return {c.full_signature: c for c in klass.callables}


def get_method(session: AnalysisSession, qualified_class_name: str, signature: str) -> Callable:
    methods = get_methods_in_class(session, qualified_class_name)
    try:
        return methods[signature]
    except KeyError:
        raise MethodNotFound(signature, qualified_class_name) from None


def get_callable(session: AnalysisSession, owner: str, signature: str) -> Callable:
    """Look up a type's method or, with a module name as ``owner``, a module function."""
    try:
        return session.callable_index[(owner, signature)]
    except KeyError:
        if owner not in session.type_index and owner not in session.module_by_name:
            raise TypeNotFound(owner) from None
        raise MethodNotFound(signature, owner) from None


def get_all_modules(session: AnalysisSession) -> list[CodeModule]:
    return sorted(session.modules, key=lambda m: m.file_name)


def get_all_methods(module: CodeModule) -> list[Callable]:
    """Module-level functions plus every contained type's methods, constructors excluded."""
    methods = [c for c in module.callables if not c.is_constructor]
    for klass in module.types:
        methods.extend(c for c in klass.callables if not c.is_constructor)
    return methods


def get_imports(module: CodeModule) -> list[ImportDecl]:
    return list(module.imports)


def _module_for_path(session: AnalysisSession, file_path: str) -> CodeModule:
    wanted = str(file_path).replace("\\", "/")
    module = session.module_by_file.get(wanted)
    if module is None:
        # tolerate absolute paths under the project root
        root = str(session.config.project_path).replace("\\", "/").rstrip("/") + "/"
        if wanted.startswith(root):
            module = session.module_by_file.get(wanted[len(root) :])
    if module is None:
        raise FileNotInSession(file_path)
    return module


def get_compilation_unit(session: AnalysisSession, file_path: str) -> CompilationUnit:
    module = _module_for_path(session, file_path)
    return CompilationUnit(
        file_path=module.file_name,
        package_name=module.package_name,
        imports=module.imports,
        types=tuple(t.qualified_name for t in module.types),
    )


def get_source_file(session: AnalysisSession, qualified_type_name: str) -> str:
    return get_class(session, qualified_type_name).file_name


def module_of_type(session: AnalysisSession, qualified_type_name: str) -> CodeModule:
    return session.module_by_file[get_class(session, qualified_type_name).file_name]


# --------------------------------------------------------------------------
# Name resolution shared by the call graph and inheritance walks


def absolute_module(module: CodeModule, from_module: str) -> str:
    """Resolve a Python relative ``from`` clause against ``module``."""
    if not from_module.startswith("."):
        return from_module
    dots = len(from_module) - len(from_module.lstrip("."))
    rest = from_module[dots:]
    package = module.qualified_name.split(".")
    if not module.file_name.endswith("__init__.py"):
        package = package[:-1]
    if dots > 1:
        package = package[: len(package) - (dots - 1)]
    return ".".join([*package, rest] if rest else package)


def resolve_type(session: AnalysisSession, name: str, module: CodeModule | None) -> str | None:
    """Resolve a declared type name as seen from ``module`` to a project type.

    Order: exact qualified name, types declared in the same file, explicit
    imports, wildcard imports, then the same package.  Returns ``None`` for
    names that do not denote a project type.
    """
    name = base_type(name)
    if not name:
        return None
    index = session.type_index
    if module is None:
        return name if name in index else None
    head, _, tail = name.partition(".")

    def with_tail(q: str) -> str | None:
        full = f"{q}.{tail}" if tail else q
        return full if full in index else None

    for t in module.types:
        if t.qualified_name.rsplit(".", 1)[-1] == head and (found := with_tail(t.qualified_name)):
            return found
    for imp in module.imports:
        source = absolute_module(module, imp.from_module) if session.language is Language.PYTHON else imp.from_module
        if head in imp.imports and source and (found := with_tail(f"{source}.{head}")):
            return found
    for imp in module.imports:
        if "*" in imp.imports and imp.from_module:
            source = absolute_module(module, imp.from_module) if session.language is Language.PYTHON else imp.from_module
            if found := with_tail(f"{source}.{head}"):
                return found
    if module.package_name and (found := with_tail(f"{module.package_name}.{head}")):
        return found
    if name in index:
        return name
    return None
