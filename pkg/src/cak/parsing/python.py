"""Python backend: maps a tree-sitter-python syntax tree onto the code schema."""

from __future__ import annotations

from dataclasses import replace
from pathlib import PurePosixPath

import tree_sitter

from cak.parsing.base import collect_diagnostics, has_ancestor_kind, line_span, node_text, squash
from cak.parsing.common import NO_SHIFT, ReceiverScope, Shift, make_site
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
    TypeKind,
    make_signature,
    normalize_kind,
)

PY = Language.PYTHON
_GRAMMAR = GRAMMARS[PY]
_ABC_BASES = frozenset({"ABC", "abc.ABC"})
_ABC_META = frozenset({"ABCMeta", "abc.ABCMeta"})
_IMPORT_KINDS = frozenset({"import_statement", "import_from_statement", "future_import_statement"})


def module_name_for(file_name: str) -> str:
    parts = list(PurePosixPath(file_name).with_suffix("").parts)
    if parts and parts[-1] == "__init__" and len(parts) > 1:
        parts.pop()
    return ".".join(parts)


def _import(node: tree_sitter.Node, src: bytes) -> ImportDecl:
    raw = node_text(node, src)

    def imported(n: tree_sitter.Node) -> str:
        if n.type == "aliased_import":
            return squash(node_text(n.child_by_field_name("name"), src))
        return squash(node_text(n, src))

    names = [imported(n) for n in node.children_by_field_name("name")]
    if node.type == "import_statement":
        return ImportDecl(from_module="", imports=tuple(names), raw_text=raw)
    if any(c.type == "wildcard_import" for c in node.children):
        names.append("*")
    module = "__future__" if node.type == "future_import_statement" else squash(
        node_text(node.child_by_field_name("module_name"), src)
    )
    return ImportDecl(from_module=module, imports=tuple(names), raw_text=raw)


def _decorators(definition: tree_sitter.Node, src: bytes) -> tuple[tree_sitter.Node, tuple[str, ...]]:
    """Return the node spanning decorators plus definition, and ``@name`` strings."""
    parent = definition.parent
    if parent is None or parent.type != "decorated_definition":
        return definition, ()
    names = []
    for c in parent.named_children:
        if c.type != "decorator":
            continue
        expr = next((e for e in c.named_children if e.type != "comment"), None)
        if expr is not None and expr.type == "call":
            expr = expr.child_by_field_name("function")
        names.append("@" + squash(node_text(expr, src)))
    return parent, tuple(names)


def _param(node: tree_sitter.Node, src: bytes) -> Parameter | None:
    t = node.type
    if t == "identifier":
        return Parameter(node_text(node, src), "")
    if t in ("list_splat_pattern", "dictionary_splat_pattern"):
        return Parameter(node_text(node, src), "")
    if t == "typed_parameter":
        inner = node.named_children[0]
        return Parameter(node_text(inner, src), node_text(node.child_by_field_name("type"), src))
    if t == "default_parameter":
        return Parameter(node_text(node.child_by_field_name("name"), src), "")
    if t == "typed_default_parameter":
        return Parameter(
            node_text(node.child_by_field_name("name"), src), node_text(node.child_by_field_name("type"), src)
        )
    return None


def _signature_part(p: Parameter) -> str:
    stars = len(p.arg_name) - len(p.arg_name.lstrip("*"))
    return "*" * stars + (squash(p.arg_type) or "Any")


def _locals(fn: tree_sitter.Node, src: bytes, params: tuple[Parameter, ...], known: frozenset[str]) -> dict[str, str]:
    out = {p.arg_name: p.arg_type for p in params if p.arg_type and not p.arg_name.startswith("*")}
    body = fn.child_by_field_name("body")
    if body is None:
        return out
    for n in capture(PY, "locals", body):
        if n.type != "assignment":
            continue
        name = node_text(n.child_by_field_name("left"), src)
        declared = n.child_by_field_name("type")
        if declared is not None:
            out.setdefault(name, node_text(declared, src))
            continue
        right = n.child_by_field_name("right")
        if right is not None and right.type == "call":
            fn_name = node_text(right.child_by_field_name("function"), src)
            if fn_name in known:
                out.setdefault(name, fn_name)
    return out


def _receiver_type(obj: tree_sitter.Node, src: bytes, scope: ReceiverScope) -> str:
    if obj.type == "identifier":
        name = node_text(obj, src)
        if scope.self_name and name == scope.self_name:
            return scope.enclosing
        if name in scope.locals:
            return scope.locals[name]
        return name if name in scope.known_types else ""
    if obj.type == "attribute":
        inner = obj.child_by_field_name("object")
        if inner is not None and inner.type == "identifier" and scope.self_name and node_text(inner, src) == scope.self_name:
            return scope.fields.get(node_text(obj.child_by_field_name("attribute"), src), "")
        return ""
    if obj.type == "call":
        fn = obj.child_by_field_name("function")
        if fn is not None and node_text(fn, src) == "super":
            return scope.super_type
    return ""


def call_site(node: tree_sitter.Node, src: bytes, scope: ReceiverScope, shift: Shift = NO_SHIFT) -> CallSite | None:
    fn = node.child_by_field_name("function")
    if fn is None:
        return None
    args_node = node.child_by_field_name("arguments")
    if args_node is None:
        args: tuple[str, ...] = ()
    elif args_node.type == "generator_expression":
        args = (node_text(args_node, src),)
    else:
        args = tuple(node_text(a, src) for a in args_node.named_children if a.type != "comment")
    if fn.type == "identifier":
        name = node_text(fn, src)
        if name in scope.known_types:
            return make_site(node, "<init>", name, "", args, shift)
        return make_site(node, name, "", "", args, shift)
    if fn.type == "attribute":
        obj = fn.child_by_field_name("object")
        attr = node_text(fn.child_by_field_name("attribute"), src)
        if not attr or obj is None:
            return None
        return make_site(node, attr, _receiver_type(obj, src, scope), node_text(obj, src), args, shift)
    target = squash(node_text(fn, src))
    return make_site(node, target, "", "", args, shift) if target else None


def call_sites_under(node: tree_sitter.Node, src: bytes, scope: ReceiverScope, shift: Shift = NO_SHIFT) -> tuple[CallSite, ...]:
    calls = sorted(capture(PY, "calls", node), key=lambda n: (n.start_byte, n.end_byte))
    sites = (call_site(c, src, scope, shift) for c in calls)
    return tuple(s for s in sites if s is not None)


def _callable(fn: tree_sitter.Node, src: bytes, scope: ReceiverScope, in_class: bool) -> Callable:
    outer, decorators = _decorators(fn, src)
    name = node_text(fn.child_by_field_name("name"), src)
    params_node = fn.child_by_field_name("parameters")
    params = [p for p in (_param(c, src) for c in (params_node.named_children if params_node else [])) if p]
    is_static = "@staticmethod" in decorators
    self_name = ""
    if in_class and not is_static and params and not params[0].arg_name.startswith("*"):
        self_name = params.pop(0).arg_name
    local_scope = ReceiverScope(
        enclosing=scope.enclosing,
        super_type=scope.super_type,
        fields=scope.fields,
        locals=_locals(fn, src, tuple(params), scope.known_types),
        known_types=scope.known_types,
        self_name=self_name,
    )
    return Callable(
        method_name=name,
        full_signature=make_signature(name, (_signature_part(p) for p in params)),
        code_body=node_text(outer, src),
        is_static=is_static,
        is_constructor=in_class and name == "__init__",
        modifiers=decorators,
        formal_params=tuple(params),
        return_type=node_text(fn.child_by_field_name("return_type"), src),
        call_sites=call_sites_under(fn, src, local_scope),
        line_offset=line_span(outer),
    )


def _unwrap(stmt: tree_sitter.Node) -> tree_sitter.Node:
    if stmt.type == "decorated_definition":
        d = stmt.child_by_field_name("definition")
        return d if d is not None else stmt
    return stmt


def _class_fields(block: tree_sitter.Node | None, src: bytes, known: frozenset[str]) -> list[FieldDecl]:
    out: list[FieldDecl] = []
    if block is None:
        return out
    for stmt in block.named_children:
        if stmt.type != "expression_statement" or not stmt.named_children:
            continue
        a = stmt.named_children[0]
        if a.type == "assignment" and a.child_by_field_name("left").type == "identifier":
            out.append(
                FieldDecl(
                    node_text(a.child_by_field_name("left"), src),
                    node_text(a.child_by_field_name("type"), src),
                    line_span(stmt),
                )
            )
    init = next(
        (
            _unwrap(s)
            for s in block.named_children
            if _unwrap(s).type == "function_definition"
            and node_text(_unwrap(s).child_by_field_name("name"), src) == "__init__"
        ),
        None,
    )
    if init is None:
        return out
    params_node = init.child_by_field_name("parameters")
    params = [p for p in (_param(c, src) for c in (params_node.named_children if params_node else [])) if p]
    if not params:
        return out
    self_name = params[0].arg_name
    param_types = {p.arg_name: p.arg_type for p in params[1:]}
    body = init.child_by_field_name("body")
    stack = [body] if body is not None else []
    while stack:
        n = stack.pop()
        if n.type in ("function_definition", "class_definition", "lambda"):
            continue
        if n.type == "assignment":
            left = n.child_by_field_name("left")
            if (
                left is not None
                and left.type == "attribute"
                and node_text(left.child_by_field_name("object"), src) == self_name
            ):
                declared = node_text(n.child_by_field_name("type"), src)
                right = n.child_by_field_name("right")
                if not declared and right is not None:
                    if right.type == "identifier":
                        declared = param_types.get(node_text(right, src), "")
                    elif right.type == "call":
                        called = node_text(right.child_by_field_name("function"), src)
                        declared = called if called in known else ""
                out.append(FieldDecl(node_text(left.child_by_field_name("attribute"), src), declared, line_span(n)))
        stack.extend(reversed(n.named_children))
    out.sort(key=lambda f: f.line_offset)
    seen: set[str] = set()
    unique = []
    for f in out:
        if f.field_name not in seen:
            seen.add(f.field_name)
            unique.append(f)
    return unique


def _outer_names(node: tree_sitter.Node, src: bytes) -> list[str]:
    names = []
    p = node.parent
    while p is not None:
        if p.type == "class_definition":
            names.append(node_text(p.child_by_field_name("name"), src))
        p = p.parent
    return names[::-1]


def extract_module(file_name: str, src: bytes) -> CodeModule:
    tree = parse_tree(PY, src)
    root = tree.root_node
    diagnostics = list(collect_diagnostics(tree, src, file_name))
    qualified = module_name_for(file_name)

    imports = tuple(_import(n, src) for n in root.named_children if n.type in _IMPORT_KINDS)

    class_nodes = [n for n in capture(PY, "types", root) if not has_ancestor_kind(n, _GRAMMAR.function_scopes)]
    known = frozenset(
        [node_text(n.child_by_field_name("name"), src) for n in class_nodes]
        + [name.rpartition(".")[2] for imp in imports if imp.from_module for name in imp.imports if name[:1].isupper()]
    )

    types: list[CodeType] = []
    for node in class_nodes:
        name = node_text(node.child_by_field_name("name"), src)
        if not name:
            continue
        outer, decorators = _decorators(node, src)
        kind, note = normalize_kind(PY, node.type)
        supers: list[str] = []
        abstract = False
        bases = node.child_by_field_name("superclasses")
        for b in bases.named_children if bases is not None else []:
            if b.type == "keyword_argument":
                if node_text(b.child_by_field_name("name"), src) == "metaclass":
                    abstract |= squash(node_text(b.child_by_field_name("value"), src)) in _ABC_META
                continue
            if b.type == "comment":
                continue
            supers.append(squash(node_text(b, src)))
        if kind is TypeKind.CLASS and (abstract or _ABC_BASES & set(supers)):
            kind = TypeKind.ABSTRACT_CLASS
        block = node.child_by_field_name("body")
        fields = _class_fields(block, src, known)
        scope = ReceiverScope(
            enclosing=name,
            super_type=supers[0] if supers else "",
            fields={f.field_name: f.field_type for f in fields},
            known_types=known,
        )
        members = [_unwrap(s) for s in (block.named_children if block is not None else [])]
        callables = tuple(_callable(m, src, scope, True) for m in members if m.type == "function_definition")
        qname = ".".join(part for part in [qualified, *_outer_names(node, src), name] if part)
        types.append(
            CodeType(
                type_name=name,
                qualified_name=qname,
                kind=kind,
                code_body=node_text(outer, src),
                file_name=file_name,
                modifiers=decorators,
                super_classes=tuple(supers),
                interfaces=(),
                fields=tuple(fields),
                callables=callables,
                line_offset=line_span(outer),
            )
        )

    module_scope = ReceiverScope(known_types=known)
    functions = tuple(
        _callable(fn, src, module_scope, False)
        for fn in map(_unwrap, root.named_children)
        if fn.type == "function_definition"
    )

    return CodeModule(
        file_name=file_name,
        qualified_name=qualified,
        package_name=qualified,
        types=tuple(types),
        imports=imports,
        callables=functions,
        diagnostics=tuple(diagnostics),
    )



def extract_call_sites(body: bytes, start_line: int, start_col: int, scope: ReceiverScope) -> tuple[CallSite, ...]:
    """Call sites of a standalone Python snippet, dedented before parsing."""
    if not body.strip():
        return ()
    lines = body.split(b"\n")
    indent = min((len(l) - len(l.lstrip()) for l in lines if l.strip()), default=0)
    # a slice whose first line starts mid-line is already flush on line one
    first_indent = len(lines[0]) - len(lines[0].lstrip())
    if first_indent == 0:
        dedented = body
        extra = 0
    else:
        dedented = b"\n".join(l[indent:] if len(l) >= indent else l.lstrip() for l in lines)
        extra = indent
    tree = parse_tree(PY, dedented)
    local_scope = ReceiverScope(
        enclosing=scope.enclosing,
        super_type=scope.super_type,
        fields=scope.fields,
        locals={**scope.locals},
        known_types=scope.known_types,
        self_name=scope.self_name or ("self" if scope.enclosing else ""),
    )
    shift = Shift(rows=start_line - 1, first_row=0, first_row_cols=start_col)
    sites = call_sites_under(tree.root_node, dedented, local_scope, shift)
    if extra:
        sites = tuple(
            replace(s, col_offset=(s.col_offset[0] + extra, s.col_offset[1] + extra)) for s in sites
        )
    return sites
