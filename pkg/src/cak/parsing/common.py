from __future__ import annotations

import re
from dataclasses import dataclass, field

import tree_sitter

from cak.schema import CallSite


@dataclass
class ReceiverScope:
    """Lexical facts available when typing call receivers inside one callable."""

    enclosing: str = ""
    super_type: str = ""
    fields: dict[str, str] = field(default_factory=dict)
    locals: dict[str, str] = field(default_factory=dict)
    known_types: frozenset[str] = frozenset()
    # Python only: name bound to the instance (usually ``self``)
    self_name: str = ""


@dataclass(frozen=True)
class Shift:
    """Maps positions in a re-parsed snippet back to file coordinates."""

    rows: int = 0
    first_row: int = 0
    first_row_cols: int = 0

    def point(self, p: tree_sitter.Point) -> tuple[int, int]:
        line = p.row + 1 + self.rows
        col = p.column + (self.first_row_cols if p.row == self.first_row else 0)
        return line, col


NO_SHIFT = Shift()


def base_type(text: str) -> str:
    """Declared type text without type arguments, array brackets or quotes."""
    text = text.strip().strip("\"'")
    for opener in "<[":
        cut = text.find(opener)
        if cut >= 0:
            text = text[:cut]
    return re.sub(r"\s+", "", text).removesuffix("...")


def make_site(
    node: tree_sitter.Node,
    target: str,
    receiver_type: str,
    receiver_expr: str,
    arguments: tuple[str, ...],
    shift: Shift,
) -> CallSite:
    start_line, start_col = shift.point(node.start_point)
    end_line, end_col = shift.point(node.end_point)
    return CallSite(
        target_method=target,
        receiver_type=base_type(receiver_type),
        receiver_expr=receiver_expr,
        arguments=arguments,
        line_offset=(start_line, end_line),
        col_offset=(start_col, end_col),
    )
