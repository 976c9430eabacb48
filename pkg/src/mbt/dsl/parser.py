"""Recursive-descent parsers for the model, OD, SD, test and refactoring notations."""

from __future__ import annotations

import re
from typing import Callable, Iterable, Optional

from .. import ast as A
from ..ast import BOOL, BUILTIN_TYPES, INT, NULL, STRING, TIME, VOID, Type
from ..diagnostics import Diagnostic, DslError, Span, error
from ..diagrams import (
    DRIVER_NAMES, Checkpoint, LinkSpec, LocationSet, Message, ObjectDiagram, ObjectSpec,
    SequenceDiagram, StaticSpec, TestSource, TimeStamp, Wildcard,
)
from ..model import Association, Attribute, ClassDef, ClassModel, Invariant, MethodDef, Param
from .lexer import Token, tokenize

RESERVED = {"true", "false", "null", "self", "now", "factory", "not", "and", "or", "implies"}
CMP_OPS = ("=", "<>", "<", "<=")


class _Stop(Exception):
    pass


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.diags: list[Diagnostic] = []
        self.open_braces: list[Token] = []

    # -- token helpers -------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    @property
    def prev(self) -> Token:
        return self.toks[self.i - 1]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def at_punct(self, p: str) -> bool:
        return self.tok.is_punct(p)

    def at_word(self, w: str) -> bool:
        return self.tok.is_word(w)

    def same_line(self) -> bool:
        return self.i > 0 and self.tok.kind != "EOF" and self.tok.span.line == self.prev.span.line

    def fail(self, msg: str, tok: Optional[Token] = None, code: str = "P001"):
        tok = tok or self.tok
        if tok.kind == "EOF" and self.open_braces:
            brace = self.open_braces[-1]
            self.diags.append(error(brace.span, "P002", "unterminated block: '{' is never closed"))
        else:
            self.diags.append(error(tok.span, code, msg))
        raise _Stop()

    def describe(self, t: Token) -> str:
        if t.kind == "EOF":
            return "end of input"
        if t.kind == "STRING":
            return "string literal"
        return repr(str(t.value))

    def expect_punct(self, p: str) -> Token:
        if not self.at_punct(p):
            self.fail(f"expected '{p}', found {self.describe(self.tok)}")
        return self.advance()

    def expect_word(self, w: str) -> Token:
        if not self.at_word(w):
            self.fail(f"expected '{w}', found {self.describe(self.tok)}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "IDENT":
            self.fail(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    def open_block(self) -> None:
        self.open_braces.append(self.expect_punct("{"))

    def close_block(self) -> None:
        self.expect_punct("}")
        self.open_braces.pop()

    def skip_semis(self) -> None:
        while self.at_punct(";"):
            self.advance()

    def run(self, rule: Callable[[], object]):
        try:
            result = rule()
        except _Stop:
            result = None
        if any(d.is_error for d in self.diags):
            raise DslError(self.diags)
        return result

    # -- types ---------------------------------------------------------------
    def type_(self) -> Type:
        name = self.ident("type name")
        if name.value == "seq":
            self.expect_punct("(")
            inner = self.type_()
            self.expect_punct(")")
            if inner.kind == "seq":
                self.fail("sequence nesting deeper than one level", name)
            return A.seq_of(inner)
        if name.value in BUILTIN_TYPES:
            return A.builtin(name.value)
        return A.ref(name.value)

    # -- expressions ---------------------------------------------------------
    def expr(self) -> A.Expr:
        return self.implies()

    def implies(self) -> A.Expr:
        left = self.or_()
        if self.at_word("implies"):
            t = self.advance()
            right = self.implies()
            return A.Binary("implies", left, right, t.span)
        return left

    def or_(self) -> A.Expr:
        left = self.and_()
        while self.at_word("or"):
            t = self.advance()
            left = A.Binary("or", left, self.and_(), t.span)
        return left

    def and_(self) -> A.Expr:
        left = self.not_()
        while self.at_word("and"):
            t = self.advance()
            left = A.Binary("and", left, self.not_(), t.span)
        return left

    def not_(self) -> A.Expr:
        if self.at_word("not"):
            t = self.advance()
            return A.Unary("not", self.not_(), t.span)
        return self.cmp()

    def cmp(self) -> A.Expr:
        left = self.add()
        if self.tok.kind == "PUNCT" and self.tok.value in CMP_OPS:
            t = self.advance()
            right = self.add()
            return A.Binary(t.value, left, right, t.span)
        if self.tok.kind == "PUNCT" and self.tok.value in (">", ">="):
            self.fail(f"operator '{self.tok.value}' is not supported; swap the operands and use '<' or '<='")
        return left

    def add(self) -> A.Expr:
        left = self.mul()
        while self.tok.kind == "PUNCT" and self.tok.value in ("+", "-"):
            t = self.advance()
            left = A.Binary(t.value, left, self.mul(), t.span)
        return left

    def mul(self) -> A.Expr:
        left = self.unary()
        while self.at_punct("*"):
            t = self.advance()
            left = A.Binary("*", left, self.unary(), t.span)
        return left

    def unary(self) -> A.Expr:
        if self.at_punct("-"):
            t = self.advance()
            operand = self.unary()
            if isinstance(operand, A.Lit) and operand.type.is_numeric and operand.value >= 0 \
                    and not isinstance(operand.value, bool):
                return A.Lit(-operand.value, operand.type, t.span)
            return A.Unary("-", operand, t.span)
        return self.postfix()

    def args(self, close: str = ")", allow_wildcard: bool = False) -> tuple:
        items = []
        if not self.at_punct(close):
            while True:
                if allow_wildcard and self.at_word("_"):
                    items.append(Wildcard(self.advance().span))
                else:
                    items.append(self.expr())
                if not self.at_punct(","):
                    break
                self.advance()
        self.expect_punct(close)
        return tuple(items)

    def postfix(self) -> A.Expr:
        e = self.primary()
        while True:
            if self.at_punct("."):
                self.advance()
                name = self.ident("member name")
                if self.at_punct("("):
                    self.advance()
                    e = A.Call(e, name.value, self.args(), name.span)
                else:
                    e = A.Nav(e, name.value, name.span)
            elif self.at_punct("->") and self.peek().kind == "IDENT" and self.peek(2).is_punct("(") \
                    and (self.peek().value in A.COLLECTION_OPS or self.peek().value in A.ITERATOR_OPS):
                self.advance()
                name = self.advance()
                self.advance()
                if name.value in A.ITERATOR_OPS:
                    var = self.ident("iterator variable")
                    self.expect_punct("|")
                    body = self.expr()
                    self.expect_punct(")")
                    e = A.Iterate(e, name.value, var.value, body, name.span)
                else:
                    e = A.CollOp(e, name.value, self.args(), name.span)
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return A.Lit(t.value, INT, t.span)
        if t.kind == "TIME":
            self.advance()
            return A.Lit(t.value, TIME, t.span)
        if t.kind == "STRING":
            self.advance()
            return A.Lit(t.value, STRING, t.span)
        if t.is_punct("("):
            self.advance()
            e = self.expr()
            self.expect_punct(")")
            return e
        if t.is_punct("["):
            self.advance()
            return A.SeqLit(self.args("]"), t.span)
        if t.kind != "IDENT":
            self.fail(f"expected an expression, found {self.describe(t)}")
        word = t.value
        if word in ("true", "false"):
            self.advance()
            return A.Lit(word == "true", BOOL, t.span)
        if word == "null":
            self.advance()
            return A.Lit(None, NULL, t.span)
        if word == "self":
            self.advance()
            return A.SelfRef(t.span)
        if word == "now":
            self.advance()
            self.expect_punct("(")
            self.expect_punct(")")
            return A.Now(t.span)
        if word == "factory":
            self.advance()
            cls = self.ident("class name")
            self.expect_punct("(")
            return A.FactoryGet(cls.value, self.args(), t.span)
        if word in RESERVED:
            self.fail(f"unexpected keyword '{word}'")
        self.advance()
        if self.at_punct("::"):
            self.advance()
            name = self.ident("static name")
            return A.StaticRead(word, name.value, t.span)
        if self.at_punct("(") and self.same_line():
            self.fail(f"unknown function {word}; calls need a receiver", t)
        return A.Var(word, t.span)

    # -- constraints ---------------------------------------------------------
    def constraint(self) -> A.Constraint:
        start = self.tok
        location = None
        if self.at_punct("@"):
            self.advance()
            location = self.ident("location name").value
        cls = var = None
        if self.at_word("context"):
            self.advance()
            cls = self.ident("class name").value
            if self.tok.kind == "IDENT":
                var = self.advance().value
            self.expect_punct(":")
        body = self.expr()
        return A.Constraint(body, cls, var, location, start.span)

    # -- statements ----------------------------------------------------------
    def block(self) -> tuple[A.Stmt, ...]:
        self.open_block()
        stmts = []
        while not self.at_punct("}"):
            if self.tok.kind == "EOF":
                self.fail("unexpected end of input")
            stmts.append(self.stmt())
            self.skip_semis()
        self.close_block()
        return tuple(stmts)

    def stmt(self) -> A.Stmt:
        t = self.tok
        if t.is_word("var"):
            self.advance()
            name = self.ident("variable name")
            self.expect_punct(":")
            typ = self.type_()
            self.expect_punct(":=")
            return A.VarDecl(name.value, typ, self.expr(), t.span)
        if t.is_word("if"):
            return self.if_stmt()
        if t.is_word("while"):
            self.advance()
            cond = self.expr()
            return A.While(cond, self.block(), t.span)
        if t.is_word("return"):
            self.advance()
            if self.at_punct("}") or self.at_punct(";") or not self.same_line():
                return A.Return(None, t.span)
            return A.Return(self.expr(), t.span)
        e = self.expr()
        if self.at_punct(":="):
            op = self.advance()
            value = self.expr()
            if isinstance(e, A.StaticRead):
                return A.StaticWrite(e.cls, e.name, value, e.span)
            if not isinstance(e, (A.Var, A.Nav)):
                self.fail("invalid assignment target", op)
            return A.Assign(e, value, e.span)
        if not isinstance(e, (A.Call, A.FactoryGet)):
            self.fail("expected a statement", t)
        return A.ExprStmt(e, t.span)

    def if_stmt(self) -> A.If:
        t = self.expect_word("if")
        cond = self.expr()
        then = self.block()
        orelse: tuple = ()
        if self.at_word("else"):
            self.advance()
            orelse = (self.if_stmt(),) if self.at_word("if") else self.block()
        return A.If(cond, then, orelse, t.span)

    # -- class models --------------------------------------------------------
    def model(self) -> ClassModel:
        name = "model"
        if self.at_word("model"):
            self.advance()
            name = self.ident("model name").value
        classes, assocs, invs, published = [], [], [], []
        while self.tok.kind != "EOF":
            t = self.tok
            if t.is_word("class"):
                classes.append(self.class_def())
            elif t.is_word("assoc"):
                self.advance()
                an = self.ident("association name")
                self.expect_punct(":")
                src = self.ident("class name").value
                self.expect_punct("->")
                dst = self.ident("class name").value
                many = True
                if self.at_punct("["):
                    self.advance()
                    if self.at_punct("*"):
                        self.advance()
                    elif self.tok.kind == "INT" and self.tok.value == 1:
                        self.advance()
                        many = False
                    else:
                        self.fail("expected '*' or '1' multiplicity")
                    self.expect_punct("]")
                assocs.append(Association(an.value, src, dst, many, an.span))
            elif t.is_word("inv"):
                self.advance()
                iname = self.ident("invariant name")
                self.expect_punct(":")
                invs.append(Invariant(iname.value, self.constraint(), iname.span))
            elif t.is_word("publish"):
                self.advance()
                cls = self.ident("class name").value
                self.expect_punct(".")
                meth = self.ident("method name").value
                published.append((cls, meth))
            else:
                self.fail(f"expected a declaration (class, assoc, inv, publish), found {self.describe(t)}")
            self.skip_semis()
        return ClassModel(name, tuple(classes), tuple(assocs), tuple(invs), frozenset(published))

    def class_def(self) -> ClassDef:
        self.expect_word("class")
        name = self.ident("class name")
        sup = None
        if self.at_word("extends"):
            self.advance()
            sup = self.ident("superclass name").value
        self.open_block()
        attrs, statics, methods = [], [], []
        while not self.at_punct("}"):
            t = self.tok
            if t.kind == "EOF":
                self.fail("unexpected end of input")
            if t.is_word("attr") or t.is_word("static"):
                self.advance()
                an = self.ident("attribute name")
                self.expect_punct(":")
                (attrs if t.value == "attr" else statics).append(Attribute(an.value, self.type_(), an.span))
            elif t.is_word("method") or t.is_word("abstract"):
                methods.append(self.method_def())
            else:
                self.fail(f"expected a member (attr, static, method), found {self.describe(t)}")
            self.skip_semis()
        self.close_block()
        return ClassDef(name.value, sup, tuple(attrs), tuple(statics), tuple(methods), name.span)

    def method_def(self) -> MethodDef:
        abstract = False
        if self.at_word("abstract"):
            self.advance()
            abstract = True
        self.expect_word("method")
        name = self.ident("method name")
        self.expect_punct("(")
        params = []
        if not self.at_punct(")"):
            while True:
                pn = self.ident("parameter name")
                self.expect_punct(":")
                params.append(Param(pn.value, self.type_()))
                if not self.at_punct(","):
                    break
                self.advance()
        self.expect_punct(")")
        returns = VOID
        if self.at_punct(":"):
            self.advance()
            returns = self.type_()
        body = None if abstract else self.block()
        return MethodDef(name.value, tuple(params), returns, body, name.span)

    # -- object diagrams -----------------------------------------------------
    def od(self, default_name: str = "od") -> ObjectDiagram:
        name = default_name
        if self.at_word("od"):
            self.advance()
            name = self.ident("diagram name").value
        objects: list[ObjectSpec] = []
        links, statics = [], []
        seen: dict[str, ObjectSpec] = {}
        anon = 0
        while self.tok.kind != "EOF":
            t = self.tok
            if t.is_word("object"):
                self.advance()
                oname = None
                if self.tok.kind == "IDENT":
                    oname = self.advance()
                self.expect_punct(":")
                cls = self.ident("class name").value
                loc = None
                if self.at_punct("@"):
                    self.advance()
                    loc = self.ident("location name").value
                factory_for = None
                if self.at_word("factory"):
                    self.advance()
                    factory_for = cls
                    if self.at_word("for"):
                        self.advance()
                        factory_for = self.ident("class name").value
                slots = []
                if self.at_punct("{"):
                    self.open_block()
                    while not self.at_punct("}"):
                        if self.tok.kind == "EOF":
                            self.fail("unexpected end of input")
                        sn = self.ident("slot name")
                        self.expect_punct("=")
                        slots.append((sn.value, self.value()))
                        while self.at_punct(",") or self.at_punct(";"):
                            self.advance()
                    self.close_block()
                if oname is None:
                    anon += 1
                    spec = ObjectSpec(f"_{anon}", cls, loc, tuple(slots), factory_for, True, t.span)
                else:
                    spec = ObjectSpec(oname.value, cls, loc, tuple(slots), factory_for, False, oname.span)
                    if oname.value in seen:
                        self.diags.append(error(oname.span, "P005", f"duplicate object name {oname.value}"))
                    seen[oname.value] = spec
                objects.append(spec)
            elif t.is_word("link"):
                self.advance()
                assoc = self.ident("association name")
                self.expect_punct("(")
                a = self.ident("object name").value
                self.expect_punct(",")
                b = self.ident("object name").value
                self.expect_punct(")")
                links.append(LinkSpec(assoc.value, a, b, assoc.span))
            elif t.is_word("static"):
                self.advance()
                cls = self.ident("class name")
                self.expect_punct("::")
                sname = self.ident("static name").value
                loc = None
                if self.at_punct("@"):
                    self.advance()
                    loc = self.ident("location name").value
                self.expect_punct("=")
                statics.append(StaticSpec(cls.value, sname, loc, self.value(), cls.span))
            else:
                self.fail(f"expected object, link or static, found {self.describe(t)}")
            self.skip_semis()
        return ObjectDiagram(name, tuple(objects), tuple(links), tuple(statics))

    def value(self) -> A.Expr:
        start = self.tok
        v = self.expr()
        if not _is_value(v):
            self.fail("slot values must be literals, object names, null or sequences of those", start)
        return v

    # -- sequence diagrams ---------------------------------------------------
    def annotations(self) -> tuple[Optional[int], Optional[str]]:
        time = loc = None
        while self.at_punct("@") and self.same_line():
            self.advance()
            kind = self.ident("annotation")
            self.expect_punct("(")
            if kind.value == "time":
                if self.tok.kind not in ("INT", "TIME"):
                    self.fail("expected a time value")
                time = self.advance().value
            elif kind.value == "loc":
                loc = self.ident("location name").value
            else:
                self.fail(f"unknown annotation @{kind.value}", kind)
            self.expect_punct(")")
        return time, loc

    def message(self) -> Message:
        src = self.ident("lifeline")
        self.expect_punct("->")
        dst = self.ident("lifeline")
        self.expect_punct(".")
        meth = self.ident("method name")
        self.expect_punct("(")
        args = self.args(allow_wildcard=True)
        ret = None
        if self.at_punct("="):
            self.advance()
            ret = self.expr()
        time, loc = self.annotations()
        return Message(src.value, dst.value, meth.value, args, ret, time, loc, src.span)

    def sd(self, default_name: str = "sd") -> SequenceDiagram:
        name = default_name
        if self.at_word("sd"):
            self.advance()
            name = self.ident("diagram name").value
        lifelines: list[str] = []
        if self.at_word("lifelines"):
            self.advance()
            while True:
                lifelines.append(self.ident("lifeline name").value)
                if not self.at_punct(","):
                    break
                self.advance()
        steps = []
        declared = set(lifelines) | set(DRIVER_NAMES)
        while self.tok.kind != "EOF":
            t = self.tok
            if t.is_punct("@"):
                self.advance()
                kind = self.ident("annotation")
                self.expect_punct("(")
                if kind.value == "time":
                    if self.tok.kind not in ("INT", "TIME"):
                        self.fail("expected a time value")
                    steps.append(TimeStamp(self.advance().value, t.span))
                elif kind.value == "loc":
                    steps.append(LocationSet(self.ident("location name").value, t.span))
                else:
                    self.fail(f"unknown annotation @{kind.value}", kind)
                self.expect_punct(")")
            elif t.is_word("check"):
                self.advance()
                self.expect_punct(":")
                c = self.constraint()
                for var, sp in _bound_vars(c):
                    if var in declared:
                        self.diags.append(error(sp, "P008", f"checkpoint variable {var} collides with lifeline {var}"))
                steps.append(Checkpoint(c, t.span))
            elif t.kind == "IDENT" and self.peek().is_punct("->"):
                msg = self.message()
                for who, sp in ((msg.source, msg.span), (msg.target, msg.span)):
                    if who not in declared:
                        self.diags.append(error(sp, "P006", f"undeclared lifeline {who}"))
                if (msg.time is not None or msg.location is not None) and not msg.is_trigger:
                    self.diags.append(error(msg.span, "P013", "time and location stamps are only allowed on driver messages"))
                steps.append(msg)
            else:
                self.fail(f"expected a message, checkpoint or stamp, found {self.describe(t)}")
            self.skip_semis()
        if not any(isinstance(s, Message) and s.is_trigger for s in steps):
            sp = self.toks[0].span
            self.diags.append(error(sp, "P007", "driver has no trigger"))
        return SequenceDiagram(name, tuple(lifelines), tuple(steps))

    # -- tests ---------------------------------------------------------------
    def filename(self) -> str:
        parts = [str(self.ident("file name").value)]
        while self.at_punct(".") and self.same_line():
            self.advance()
            parts.append(str(self.ident("file extension").value))
        return ".".join(parts)

    def test(self, available: Optional[Iterable[str]] = None) -> TestSource:
        head = self.expect_word("test")
        name = self.ident("test name").value
        kind, mode = "internal", "subsequence"
        fixture, factories, constraints, invariants = [], [], [], []
        driver = oracle = None
        ref_spans: list[tuple[str, Span]] = []
        while self.tok.kind != "EOF":
            t = self.ident("directive")
            d = t.value
            if d == "kind":
                kind = self.ident("test kind").value
                if kind not in ("internal", "external"):
                    self.fail("test kind must be internal or external", self.prev)
            elif d == "mode":
                mode = self.ident("interaction mode").value
                if mode not in ("subsequence", "exact"):
                    self.fail("interaction mode must be subsequence or exact", self.prev)
            elif d == "fixture":
                sp = self.tok.span
                fixture.append(self.filename())
                ref_spans.append((fixture[-1], sp))
                while self.at_punct("+"):
                    self.advance()
                    sp = self.tok.span
                    fixture.append(self.filename())
                    ref_spans.append((fixture[-1], sp))
            elif d == "factory":
                while True:
                    sp = self.tok.span
                    factories.append(self.filename())
                    ref_spans.append((factories[-1], sp))
                    if not self.at_punct(","):
                        break
                    self.advance()
            elif d == "driver":
                if self.at_word("call"):
                    self.advance()
                    pre_time, pre_loc = self.annotations()
                    target = self.ident("object name")
                    self.expect_punct(".")
                    meth = self.ident("method name")
                    self.expect_punct("(")
                    args = self.args()
                    ret = None
                    if self.at_punct("="):
                        self.advance()
                        ret = self.expr()
                    time, loc = self.annotations()
                    msg = Message("driver", target.value, meth.value, args, ret,
                                  time if time is not None else pre_time,
                                  loc if loc is not None else pre_loc, target.span)
                    driver = SequenceDiagram(name, (target.value,), (msg,))
                else:
                    sp = self.tok.span
                    driver = self.filename()
                    ref_spans.append((driver, sp))
            elif d == "oracle":
                sp = self.tok.span
                oracle = self.filename()
                ref_spans.append((oracle, sp))
            elif d == "ocl":
                constraints.append(self.constraint())
            elif d == "invariant":
                invariants.append(self.ident("invariant name").value)
            else:
                self.fail(f"unknown test directive {d}", t)
            self.skip_semis()
        if driver is None:
            self.diags.append(error(head.span, "P012", f"test {name} has no driver"))
        if not fixture:
            self.diags.append(error(head.span, "P012", f"test {name} has no fixture"))
        if available is not None:
            names = set(available)
            for ref_name, sp in ref_spans:
                if ref_name not in names:
                    self.diags.append(error(sp, "P011", f"unknown unit {ref_name}"))
        return TestSource(name, kind, tuple(fixture), tuple(factories), driver, oracle,
                          tuple(constraints), mode, head.span, tuple(invariants))


def _is_value(e: A.Expr) -> bool:
    if isinstance(e, (A.Lit, A.Var)):
        return True
    if isinstance(e, A.SeqLit):
        return all(isinstance(i, (A.Lit, A.Var)) for i in e.items)
    return False


def _bound_vars(c: A.Constraint):
    if c.var:
        yield c.var, c.span
    stack = [c.body]
    while stack:
        e = stack.pop()
        if isinstance(e, A.Iterate):
            yield e.var, e.span
        for child in _children(e):
            stack.append(child)


def _children(e):
    if isinstance(e, (A.Nav,)):
        return [e.target]
    if isinstance(e, A.Call):
        return [e.target, *e.args]
    if isinstance(e, A.Binary):
        return [e.left, e.right]
    if isinstance(e, A.Unary):
        return [e.operand]
    if isinstance(e, A.CollOp):
        return [e.target, *e.args]
    if isinstance(e, A.Iterate):
        return [e.target, e.body]
    if isinstance(e, (A.SeqLit,)):
        return list(e.items)
    if isinstance(e, A.FactoryGet):
        return list(e.args)
    return []


# -- public entry points -----------------------------------------------------

def parse_model(text: str) -> ClassModel:
    p = Parser(text)
    return p.run(p.model)


def parse_od(text: str, name: str = "od") -> ObjectDiagram:
    p = Parser(text)
    return p.run(lambda: p.od(name))


def parse_sd(text: str, name: str = "sd") -> SequenceDiagram:
    p = Parser(text)
    return p.run(lambda: p.sd(name))


def parse_test(text: str, available: Optional[Iterable[str]] = None) -> TestSource:
    p = Parser(text)
    return p.run(lambda: p.test(available))


def parse_constraint(text: str) -> A.Constraint:
    p = Parser(text)

    def rule():
        c = p.constraint()
        if p.tok.kind != "EOF":
            p.fail(f"unexpected {p.describe(p.tok)} after constraint")
        return c

    return p.run(rule)


def parse_expr(text: str) -> A.Expr:
    p = Parser(text)

    def rule():
        e = p.expr()
        if p.tok.kind != "EOF":
            p.fail(f"unexpected {p.describe(p.tok)} after expression")
        return e

    return p.run(rule)


_RULE_LINE = re.compile(r"^(?P<rule>[A-Za-z][\w-]*)\s+(?P<cls>[A-Za-z_]\w*)\.(?P<member>[A-Za-z_]\w*)(?:\s+(?P<index>\d+))?\s*$")
RULE_NAMES = {
    "pull-up-attr": "pull-up-attribute",
    "pull-up-attribute": "pull-up-attribute",
    "pull-up-method": "pull-up-method-override",
    "pull-up-method-override": "pull-up-method-override",
    "pull-up-signature": "pull-up-signature",
    "drop-stmt": "drop-statement",
}
UNSUPPORTED_RULES = {"pull-up-method-variant3", "pull-up-method-factored"}


def parse_refactor(text: str) -> list:
    from ..refactor import Transformation

    steps, diags = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"\s(?:#|--)|^(?:#|--)", raw, maxsplit=1)[0].strip()
        if not line or line.startswith("refactor "):
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        m = _RULE_LINE.match(line)
        rule = line.split()[0]
        span = Span(lineno, col, len(rule))
        if rule in UNSUPPORTED_RULES:
            diags.append(error(span, "P010", f"unsupported rule {rule}"))
            continue
        if rule not in RULE_NAMES:
            diags.append(error(span, "P009", f"unknown rule {rule}"))
            continue
        if m is None:
            diags.append(error(span, "P001", f"malformed step; expected '{rule} Class.member'"))
            continue
        kind = RULE_NAMES[rule]
        index = int(m.group("index")) if m.group("index") else None
        if (kind == "drop-statement") != (index is not None):
            diags.append(error(span, "P001", "only drop-stmt takes a statement index"))
            continue
        steps.append(Transformation(kind, m.group("cls"), m.group("member"), index, span))
    if diags:
        raise DslError(diags)
    return steps
