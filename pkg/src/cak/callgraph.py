"""Approximate intra-project call graph, inheritance chains and private call chains.

Call sites are resolved syntactically, without type inference.  A site
resolves to a project callable when name and arity match, searching

1. the receiver's type: the enclosing type for implicit ``this``/``self``
   calls, otherwise the type named by the site's ``receiver_type``,
2. that type's inheritance chain, in chain order,
3. for Python bare calls, module functions of the same module and then
   functions imported by name from project modules.

Anything else becomes an EXTERNAL node ``<external>.name(arity=n)``.  When
several overloads of equal arity match at the winning type, every one of
them gets an edge and the edges are flagged ``ambiguous``.
"""

from __future__ import annotations

import enum
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple

from cak.analysis import absolute_module, get_class, get_callable, resolve_type
from cak.errors import MethodNotFound
from cak.parsing.common import base_type
from cak.schema import Callable, CallSite, CodeModule

if TYPE_CHECKING:
    from cak.session import AnalysisSession

log = logging.getLogger(__name__)

EXTERNAL_OWNER = "<external>"


class RefKind(str, enum.Enum):
    PROJECT = "project"
    EXTERNAL = "external"


@dataclass(frozen=True)
class CallableRef:
    # owning type, or the module's qualified name for module-level functions
    qualified_type_name: str
    signature: str
    kind: RefKind = RefKind.PROJECT

    @property
    def key(self) -> str:
        return f"{self.qualified_type_name}.{self.signature}"

    def __str__(self) -> str:
        return self.key

    def __lt__(self, other: CallableRef) -> bool:
        return self.key < other.key

    @classmethod
    def external(cls, target: str, arity: int) -> CallableRef:
        return cls(EXTERNAL_OWNER, f"{target}(arity={arity})", RefKind.EXTERNAL)


@dataclass(frozen=True)
class CallEdge:
    caller: CallableRef
    callee: CallableRef
    site: CallSite
    ambiguous: bool = False

    def sort_key(self) -> tuple:
        return (self.caller.key, self.site.line_offset[0], self.callee.key, self.site.col_offset[0])


@dataclass(frozen=True)
class CallGraph:
    nodes: tuple[CallableRef, ...] = ()
    edges: tuple[CallEdge, ...] = ()
    _out: dict = field(init=False, repr=False, compare=False)
    _in: dict = field(init=False, repr=False, compare=False)
    _by_key: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        nodes = tuple(sorted(set(self.nodes), key=lambda r: r.key))
        edges = tuple(sorted(self.edges, key=CallEdge.sort_key))
        node_set = set(nodes)
        for e in edges:
            if e.caller not in node_set or e.callee not in node_set:
                raise ValueError(f"edge endpoint missing from node set: {e.caller} -> {e.callee}")
        out: dict[CallableRef, list[CallEdge]] = defaultdict(list)
        into: dict[CallableRef, list[CallEdge]] = defaultdict(list)
        for e in edges:
            out[e.caller].append(e)
            into[e.callee].append(e)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_out", dict(out))
        object.__setattr__(self, "_in", dict(into))
        object.__setattr__(self, "_by_key", {n.key: n for n in nodes})

    def node(self, key: str) -> CallableRef:
        return self._by_key[key]

    def __contains__(self, ref: object) -> bool:
        return ref in self._by_key.values() if isinstance(ref, CallableRef) else ref in self._by_key

    def out_edges(self, ref: CallableRef) -> list[CallEdge]:
        return list(self._out.get(ref, ()))

    def in_edges(self, ref: CallableRef) -> list[CallEdge]:
        return list(self._in.get(ref, ()))

    def callees(self, ref: CallableRef) -> list[CallableRef]:
        return sorted({e.callee for e in self._out.get(ref, ())}, key=lambda r: r.key)

    def callers(self, ref: CallableRef) -> list[CallableRef]:
        return sorted({e.caller for e in self._in.get(ref, ())}, key=lambda r: r.key)

    def reachable(self, start: CallableRef) -> list[CallableRef]:
        seen = {start}
        stack = [start]
        while stack:
            for nxt in self.callees(stack.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return sorted(seen, key=lambda r: r.key)

    def subgraph(self, keep: set[CallableRef]) -> CallGraph:
        return CallGraph(
            nodes=tuple(keep),
            edges=tuple(e for e in self.edges if e.caller in keep and e.callee in keep),
        )

    def edge_lines(self) -> list[str]:
        """Unique ``caller -> callee`` lines, sorted."""
        return sorted({f"{e.caller.key} -> {e.callee.key}" for e in self.edges})

    def to_edge_list(self) -> str:
        return "".join(line + "\n" for line in self.edge_lines())

    def to_dot(self) -> str:
        def q(s: str) -> str:
            return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

        lines = ["digraph cg {"]
        lines.extend(f"  {q(n.key)};" for n in self.nodes)
        pairs = sorted({(e.caller.key, e.callee.key) for e in self.edges})
        lines.extend(f"  {q(a)} -> {q(b)};" for a, b in pairs)
        lines.append("}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Resolution


class Resolution(NamedTuple):
    callees: tuple[CallableRef, ...]
    ambiguous: bool


def _accepts(c: Callable, name: str, arity: int) -> bool:
    return c.method_name == name and c.arity == arity


def _type_lineage(session: AnalysisSession, qname: str) -> list[str]:
    """``qname`` followed by its resolvable supertypes, depth first."""
    chain, _ = walk_inheritance(session, qname)
    return [qname] + [t for t in chain if t in session.type_index]


def resolve_call(session: AnalysisSession, module: CodeModule, site: CallSite) -> Resolution:
    arity = len(site.arguments)
    if site.target_method == "<init>":
        owner = resolve_type(session, site.receiver_type, module)
        if owner:
            ctors = [c for c in session.type_index[owner].callables if c.is_constructor and c.arity == arity]
            if ctors:
                refs = tuple(sorted((CallableRef(owner, c.full_signature) for c in ctors), key=lambda r: r.key))
                return Resolution(refs, len(refs) > 1)
        return Resolution((CallableRef.external(site.target_method, arity),), False)

    if site.receiver_type:
        owner = resolve_type(session, site.receiver_type, module)
        if owner:
            for tier in _type_lineage(session, owner):
                hits = [c for c in session.type_index[tier].callables if _accepts(c, site.target_method, arity)]
                if hits:
                    refs = tuple(sorted((CallableRef(tier, c.full_signature) for c in hits), key=lambda r: r.key))
                    return Resolution(refs, len(refs) > 1)
    elif not site.receiver_expr:
        for owner_module in _function_scopes(session, module, site.target_method):
            hits = [c for c in owner_module.callables if _accepts(c, site.target_method, arity)]
            if hits:
                refs = tuple(
                    sorted((CallableRef(owner_module.qualified_name, c.full_signature) for c in hits), key=lambda r: r.key)
                )
                return Resolution(refs, len(refs) > 1)
    return Resolution((CallableRef.external(site.target_method, arity),), False)


def _function_scopes(session: AnalysisSession, module: CodeModule, name: str) -> list[CodeModule]:
    scopes = [module]
    for imp in module.imports:
        if name in imp.imports and imp.from_module:
            target = session.module_by_name.get(absolute_module(module, imp.from_module))
            if target is not None:
                scopes.append(target)
    return scopes


def build_call_graph(session: AnalysisSession) -> CallGraph:
    nodes: set[CallableRef] = set()
    edges: list[CallEdge] = []
    for (owner, signature), callable_ in session.callable_index.items():
        caller = CallableRef(owner, signature)
        nodes.add(caller)
        module = session.module_of_callable[(owner, signature)]
        for site in callable_.call_sites:
            res = resolve_call(session, module, site)
            for callee in res.callees:
                nodes.add(callee)
                edges.append(CallEdge(caller, callee, site, res.ambiguous))
    return CallGraph(nodes=tuple(nodes), edges=tuple(edges))


def graph_of(session: AnalysisSession) -> CallGraph:
    """The session's call graph, built on demand for symbol-table sessions."""
    if session.call_graph is not None:
        return session.call_graph
    return session.derived("call_graph", lambda: build_call_graph(session))


def _focal(session: AnalysisSession, qualified_class: str, signature: str) -> CallableRef:
    get_callable(session, qualified_class, signature)
    return CallableRef(qualified_class, signature)


def get_call_graph(session: AnalysisSession) -> CallGraph:
    return graph_of(session)


def get_method_call_graph(session: AnalysisSession, qualified_class: str, signature: str) -> CallGraph:
    """Forward closure of the focal callable, focal node included."""
    focal = _focal(session, qualified_class, signature)
    graph = graph_of(session)
    return graph.subgraph(set(graph.reachable(focal)))


@dataclass(frozen=True)
class MethodDetail:
    ref: CallableRef
    method: Callable | None

    @property
    def signature(self) -> str:
        return self.ref.signature


def get_class_call_graph(
    session: AnalysisSession, qualified_class: str, signature: str
) -> list[tuple[MethodDetail, MethodDetail]]:
    """Direct outgoing calls of the focal method as (caller, callee) detail pairs."""
    focal = _focal(session, qualified_class, signature)
    caller = MethodDetail(focal, session.callable_index[(qualified_class, signature)])
    pairs = []
    seen = set()
    for e in graph_of(session).out_edges(focal):
        if e.callee in seen:
            continue
        seen.add(e.callee)
        method = session.callable_index.get((e.callee.qualified_type_name, e.callee.signature))
        pairs.append((caller, MethodDetail(e.callee, method)))
    return pairs


def get_callers(session: AnalysisSession, qualified_class: str, signature: str) -> list[CallableRef]:
    focal = _focal(session, qualified_class, signature)
    return graph_of(session).callers(focal)


def get_callees(session: AnalysisSession, qualified_class: str, signature: str) -> list[CallableRef]:
    focal = _focal(session, qualified_class, signature)
    return graph_of(session).callees(focal)


def walk_inheritance(session: AnalysisSession, qualified_class: str) -> tuple[list[str], list[str]]:
    """Depth-first supertype chain of ``qualified_class`` plus cycle diagnostics.

    Project supertypes appear by qualified name and are expanded; unknown
    supertypes appear as written and are not.  Each name appears once.
    """
    start = get_class(session, qualified_class)
    chain: list[str] = []
    seen = {qualified_class}
    expanded: set[str] = set()
    diagnostics: list[str] = []

    def visit(qname: str, path: list[str]) -> None:
        klass = session.type_index[qname]
        module = session.module_by_file.get(klass.file_name)
        for raw in (*klass.super_classes, *klass.interfaces):
            resolved = resolve_type(session, raw, module)
            if resolved in path:
                diagnostics.append(f"inheritance cycle: {' -> '.join([*path, resolved])}")
                continue
            name = resolved or base_type(raw) or raw
            if name not in seen:
                seen.add(name)
                chain.append(name)
            if resolved and resolved not in expanded:
                expanded.add(resolved)
                visit(resolved, [*path, resolved])

    expanded.add(start.qualified_name)
    visit(start.qualified_name, [start.qualified_name])
    return chain, diagnostics


def get_inheritance_chain(session: AnalysisSession, qualified_class: str) -> list[str]:
    chain, diagnostics = walk_inheritance(session, qualified_class)
    for d in diagnostics:
        log.warning("%s: %s", qualified_class, d)
    return chain


def get_private_call_chain(session: AnalysisSession, qualified_class: str, signature: str) -> list[str]:
    """Private same-class methods reachable from the focal method through private calls.

    Follows the focal method's same-class callees; each private one is
    recorded on first visit and explored in turn.
    """
    _focal(session, qualified_class, signature)
    chain: list[str] = []

    def visit(sig: str) -> None:
        for _, callee in get_class_call_graph(session, qualified_class, sig):
            if callee.ref.qualified_type_name != qualified_class or callee.method is None:
                continue
            if "private" in callee.method.modifiers and callee.signature not in chain:
                chain.append(callee.signature)
                visit(callee.signature)

    visit(signature)
    return chain
