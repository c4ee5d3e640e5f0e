"""Java backend: maps a tree-sitter-java syntax tree onto the code schema."""

from __future__ import annotations

from pathlib import PurePosixPath

import tree_sitter

from cak.parsing.base import byte_point, collect_diagnostics, has_ancestor_kind, line_span, node_text, squash
from cak.parsing.common import NO_SHIFT, ReceiverScope, Shift, base_type, make_site
from cak.parsing.grammar import GRAMMARS, capture, parse_tree
from cak.schema import (
    Callable,
    CallSite,
    CodeModule,
    CodeType,
    FieldDecl,
    ImportDecl,
    Language,
    Parameter,
    ParseDiagnostic,
    TypeKind,
    make_signature,
    normalize_kind,
)

JAVA = Language.JAVA
_GRAMMAR = GRAMMARS[JAVA]
_COMMENTS = frozenset({"line_comment", "block_comment"})


def _modifiers(node: tree_sitter.Node, src: bytes) -> tuple[str, ...]:
    mods = next((c for c in node.children if c.type == "modifiers"), None)
    if mods is None:
        return ()
    out = []
    for c in mods.children:
        if c.type in _COMMENTS:
            continue
        if c.type in ("marker_annotation", "annotation"):
            out.append("@" + node_text(c.child_by_field_name("name"), src))
        else:
            out.append(node_text(c, src))
    return tuple(out)


def _import(node: tree_sitter.Node, src: bytes) -> ImportDecl:
    raw = node_text(node, src)
    path = next((c for c in node.named_children if c.type in ("scoped_identifier", "identifier")), None)
    dotted = squash(node_text(path, src))
    if any(c.type == "asterisk" for c in node.children):
        return ImportDecl(from_module=dotted, imports=("*",), raw_text=raw)
    head, _, last = dotted.rpartition(".")
    return ImportDecl(from_module=head, imports=(last or dotted,), raw_text=raw)


def _param(node: tree_sitter.Node, src: bytes) -> Parameter | None:
    if node.type == "formal_parameter":
        type_text = node_text(node.child_by_field_name("type"), src)
        dims = node.child_by_field_name("dimensions")
        return Parameter(node_text(node.child_by_field_name("name"), src), squash(type_text + node_text(dims, src)))
    if node.type == "spread_parameter":
        type_node = next(
            (c for c in node.named_children if c.type not in ("modifiers", "variable_declarator") and c.type not in _COMMENTS),
            None,
        )
        decl = next((c for c in node.named_children if c.type == "variable_declarator"), None)
        name = node_text(decl.child_by_field_name("name"), src) if decl else ""
        return Parameter(name, squash(node_text(type_node, src)) + "...")
    return None


def _params(node: tree_sitter.Node, src: bytes) -> tuple[Parameter, ...]:
    params = node.child_by_field_name("parameters")
    if params is None:
        return ()
    return tuple(p for p in (_param(c, src) for c in params.named_children) if p is not None)


def _locals(callable_node: tree_sitter.Node, src: bytes) -> dict[str, str]:
    out: dict[str, str] = {}
    for n in capture(JAVA, "locals", callable_node):
        if n.type in ("formal_parameter", "spread_parameter"):
            p = _param(n, src)
            if p and p.arg_name:
                out.setdefault(p.arg_name, p.arg_type.removesuffix("..."))
        elif n.type == "local_variable_declaration":
            declared = node_text(n.child_by_field_name("type"), src)
            for d in n.children_by_field_name("declarator"):
                name = node_text(d.child_by_field_name("name"), src)
                value = d.child_by_field_name("value")
                t = declared
                if declared == "var" and value is not None and value.type == "object_creation_expression":
                    t = node_text(value.child_by_field_name("type"), src)
                if name:
                    out.setdefault(name, t)
        elif n.type in ("enhanced_for_statement", "resource"):
            name = node_text(n.child_by_field_name("name"), src)
            if name:
                out.setdefault(name, node_text(n.child_by_field_name("type"), src))
        elif n.type == "catch_formal_parameter":
            name = node_text(n.child_by_field_name("name"), src)
            catch_type = next((c for c in n.named_children if c.type == "catch_type"), None)
            if name:
                out.setdefault(name, node_text(catch_type, src))
    return out


def _receiver_type(obj: tree_sitter.Node | None, src: bytes, scope: ReceiverScope) -> str:
    if obj is None or obj.type == "this":
        return scope.enclosing
    if obj.type == "super":
        return scope.super_type
    if obj.type == "identifier":
        name = node_text(obj, src)
        if name in scope.locals:
            return scope.locals[name]
        if name in scope.fields:
            return scope.fields[name]
        # a capitalized bare identifier is a static call on a type name
        return name if name[:1].isupper() else ""
    if obj.type == "field_access":
        inner = obj.child_by_field_name("object")
        if inner is not None and inner.type == "this":
            return scope.fields.get(node_text(obj.child_by_field_name("field"), src), "")
    return ""


def _arguments(node: tree_sitter.Node, src: bytes) -> tuple[str, ...]:
    args = node.child_by_field_name("arguments")
    if args is None:
        return ()
    return tuple(node_text(a, src) for a in args.named_children if a.type not in _COMMENTS)


def call_site(node: tree_sitter.Node, src: bytes, scope: ReceiverScope, shift: Shift = NO_SHIFT) -> CallSite | None:
    args = _arguments(node, src)
    if node.type == "method_invocation":
        name = node_text(node.child_by_field_name("name"), src)
        if not name:
            return None
        obj = node.child_by_field_name("object")
        return make_site(node, name, _receiver_type(obj, src, scope), node_text(obj, src), args, shift)
    if node.type == "object_creation_expression":
        created = node_text(node.child_by_field_name("type"), src)
        if not created:
            return None
        return make_site(node, "<init>", created, "", args, shift)
    if node.type == "explicit_constructor_invocation":
        ctor = node.child_by_field_name("constructor")
        if ctor is None:
            return None
        rt = scope.super_type if ctor.type == "super" else scope.enclosing
        return make_site(node, "<init>", rt, node_text(ctor, src), args, shift)
    return None


def call_sites_under(node: tree_sitter.Node, src: bytes, scope: ReceiverScope, shift: Shift = NO_SHIFT) -> tuple[CallSite, ...]:
    calls = sorted(capture(JAVA, "calls", node), key=lambda n: (n.start_byte, n.end_byte))
    sites = (call_site(c, src, scope, shift) for c in calls)
    return tuple(s for s in sites if s is not None)


def _callable(node: tree_sitter.Node, src: bytes, scope: ReceiverScope) -> Callable:
    name = node_text(node.child_by_field_name("name"), src)
    params = _params(node, src)
    mods = _modifiers(node, src)
    local_scope = ReceiverScope(
        enclosing=scope.enclosing,
        super_type=scope.super_type,
        fields=scope.fields,
        locals=_locals(node, src),
    )
    is_ctor = node.type != "method_declaration"
    return Callable(
        method_name=name,
        full_signature=make_signature(name, (p.arg_type for p in params)),
        code_body=node_text(node, src),
        is_static="static" in mods,
        is_constructor=is_ctor,
        modifiers=mods,
        formal_params=params,
        return_type="" if is_ctor else " ".join(node_text(node.child_by_field_name("type"), src).split()),
        call_sites=call_sites_under(node, src, local_scope),
        line_offset=line_span(node),
    )


def _members(body: tree_sitter.Node | None) -> list[tree_sitter.Node]:
    if body is None:
        return []
    out = []
    for c in body.named_children:
        if c.type == "enum_body_declarations":
            out.extend(c.named_children)
        else:
            out.append(c)
    return out


def _fields(members: list[tree_sitter.Node], src: bytes) -> tuple[FieldDecl, ...]:
    out = []
    for m in members:
        if m.type not in ("field_declaration", "constant_declaration"):
            continue
        declared = node_text(m.child_by_field_name("type"), src)
        for d in m.children_by_field_name("declarator"):
            name = node_text(d.child_by_field_name("name"), src)
            dims = node_text(d.child_by_field_name("dimensions"), src)
            if name:
                out.append(FieldDecl(name, squash(declared + dims), line_span(m)))
    return tuple(out)


def _supertypes(node: tree_sitter.Node, src: bytes) -> tuple[tuple[str, ...], tuple[str, ...]]:
    supers: list[str] = []
    interfaces: list[str] = []

    def type_list(n: tree_sitter.Node) -> list[str]:
        tl = next((c for c in n.named_children if c.type == "type_list"), None)
        return [squash(node_text(t, src)) for t in (tl.named_children if tl else []) if t.type not in _COMMENTS]

    for c in node.children:
        if c.type == "superclass":
            supers.extend(squash(node_text(t, src)) for t in c.named_children if t.type not in _COMMENTS)
        elif c.type == "super_interfaces":
            interfaces.extend(type_list(c))
        elif c.type == "extends_interfaces":
            # an interface's extends clause plays the role of its superclass list
            supers.extend(type_list(c))
    return tuple(supers), tuple(interfaces)


def _outer_names(node: tree_sitter.Node, src: bytes) -> list[str]:
    names = []
    p = node.parent
    while p is not None:
        if p.type in _GRAMMAR.type_kinds:
            names.append(node_text(p.child_by_field_name("name"), src))
        p = p.parent
    return names[::-1]


def extract_module(file_name: str, src: bytes) -> CodeModule:
    tree = parse_tree(JAVA, src)
    root = tree.root_node
    diagnostics: list[ParseDiagnostic] = list(collect_diagnostics(tree, src, file_name))

    package = ""
    for pkg in capture(JAVA, "package", root):
        ident = next((c for c in pkg.named_children if c.type in ("scoped_identifier", "identifier")), None)
        package = squash(node_text(ident, src))
        break
    stem = PurePosixPath(file_name).stem
    qualified = f"{package}.{stem}" if package else stem

    imports = tuple(_import(n, src) for n in capture(JAVA, "imports", root))

    types: list[CodeType] = []
    for node in capture(JAVA, "types", root):
        if has_ancestor_kind(node, _GRAMMAR.function_scopes):
            continue
        name = node_text(node.child_by_field_name("name"), src)
        if not name:
            continue
        kind, note = normalize_kind(JAVA, node.type)
        if note:
            diagnostics.append(
                ParseDiagnostic(file_name, *byte_point(src, node.start_byte), note, "warning")
            )
        mods = _modifiers(node, src)
        if kind is TypeKind.CLASS and node.type == "class_declaration" and "abstract" in mods:
            kind = TypeKind.ABSTRACT_CLASS
        supers, interfaces = _supertypes(node, src)
        members = _members(node.child_by_field_name("body"))
        fields = _fields(members, src)
        scope = ReceiverScope(
            enclosing=name,
            super_type=supers[0] if supers else "",
            fields={f.field_name: f.field_type for f in fields},
        )
        callables = tuple(_callable(m, src, scope) for m in members if m.type in _GRAMMAR.callable_kinds)
        if node.type == "record_declaration":
            # record components are the implicit fields
            fields = fields + tuple(
                FieldDecl(p.arg_name, p.arg_type, line_span(node)) for p in _params(node, src)
            )
        qname = ".".join(part for part in [package, *_outer_names(node, src), name] if part)
        types.append(
            CodeType(
                type_name=name,
                qualified_name=qname,
                kind=kind,
                code_body=node_text(node, src),
                file_name=file_name,
                modifiers=mods,
                super_classes=supers,
                interfaces=interfaces,
                fields=fields,
                callables=callables,
                line_offset=line_span(node),
            )
        )

    diagnostics.sort(key=lambda d: (d.line, d.column, d.message))
    return CodeModule(
        file_name=file_name,
        qualified_name=qualified,
        package_name=package,
        types=tuple(types),
        imports=imports,
        callables=(),
        diagnostics=tuple(diagnostics),
    )


_WRAP_MEMBER = b"class __CakSnippet__ {\n"
_WRAP_STATEMENTS = b"class __CakSnippet__ { void __cak__() {\n"


def extract_call_sites(body: bytes, start_line: int, start_col: int, scope: ReceiverScope) -> tuple[CallSite, ...]:
    """Call sites of a standalone Java snippet (a whole member or bare statements)."""
    if not body.strip():
        return ()
    shift = Shift(rows=start_line - 2, first_row=1, first_row_cols=start_col)
    for prefix, suffix in ((_WRAP_MEMBER, b"\n}"), (_WRAP_STATEMENTS, b"\n}}")):
        src = prefix + body + suffix
        tree = parse_tree(JAVA, src)
        if not tree.root_node.has_error:
            break
    local_scope = ReceiverScope(
        enclosing=scope.enclosing,
        super_type=scope.super_type,
        fields=scope.fields,
        locals={**_locals(tree.root_node, src), **scope.locals},
    )
    return call_sites_under(tree.root_node, src, local_scope, shift)
