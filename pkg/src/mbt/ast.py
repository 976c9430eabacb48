"""Type terms and the expression/statement AST shared by method bodies and OCL."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .diagnostics import NO_SPAN, Span

BUILTIN_TYPES = ("Int", "Bool", "String", "Time")


@dataclass(frozen=True)
class Type:
    kind: str  # Int | Bool | String | Time | ref | seq | void | null
    name: Optional[str] = None  # class name for ref
    elem: Optional["Type"] = None  # element type for seq; None = empty-literal wildcard

    def __str__(self) -> str:
        if self.kind == "ref":
            return self.name or "?"
        if self.kind == "seq":
            return f"seq({self.elem})" if self.elem is not None else "seq(?)"
        return self.kind

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("Int", "Time")

    @property
    def is_ref(self) -> bool:
        return self.kind in ("ref", "null")


INT = Type("Int")
BOOL = Type("Bool")
STRING = Type("String")
TIME = Type("Time")
VOID = Type("void")
NULL = Type("null")
ANY_SEQ = Type("seq")


def ref(name: str) -> Type:
    return Type("ref", name)


def seq_of(elem: Optional[Type]) -> Type:
    return Type("seq", elem=elem)


def builtin(name: str) -> Type:
    return Type(name)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: Any
    type: Type
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class SelfRef:
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Nav:
    """Attribute or association navigation ``target.name``."""

    target: "Expr"
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    """Dynamically dispatched call ``target.method(args)``."""

    target: "Expr"
    method: str
    args: tuple["Expr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class StaticRead:
    cls: str
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class FactoryGet:
    cls: str
    args: tuple["Expr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Now:
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str  # + - * = <> < <= and or implies
    left: "Expr"
    right: "Expr"
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # not | -
    operand: "Expr"
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class CollOp:
    """Non-iterating collection operation ``target->op(args)``."""

    target: "Expr"
    op: str
    args: tuple["Expr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Iterate:
    """Iterator operation ``target->op(var | body)``: forAll, exists, select."""

    target: "Expr"
    op: str
    var: str
    body: "Expr"
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class SeqLit:
    items: tuple["Expr", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


Expr = Union[Lit, Var, SelfRef, Nav, Call, StaticRead, FactoryGet, Now, Binary, Unary, CollOp, Iterate, SeqLit]

COLLECTION_OPS = {
    # name: arity
    "size": 0,
    "isEmpty": 0,
    "notEmpty": 0,
    "includes": 1,
    "including": 1,
    "at": 1,
}
ITERATOR_OPS = ("forAll", "exists", "select")


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: Expr  # Var or Nav
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class StaticWrite:
    cls: str
    name: str
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: Type
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


Stmt = Union[Assign, StaticWrite, VarDecl, If, While, ExprStmt, Return]


def span_of(node: Any) -> Span:
    return getattr(node, "span", NO_SPAN)


def flatten_block(stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
    """Normalize statement sequencing: nested blocks and empty else-branches compare equal."""
    out: list[Stmt] = []
    for s in stmts:
        if isinstance(s, If):
            s = If(s.cond, flatten_block(s.then), flatten_block(s.orelse), s.span)
        elif isinstance(s, While):
            s = While(s.cond, flatten_block(s.body), s.span)
        out.append(s)
    return tuple(out)


# -- constraints -------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    """An OCL constraint with an optional class context and an optional location scope.

    ``location`` set and ``cls`` unset means a localized constraint without a
    quantifier; static reads then resolve at that location.
    """

    body: Expr
    cls: Optional[str] = None
    var: Optional[str] = None
    location: Optional[str] = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)
