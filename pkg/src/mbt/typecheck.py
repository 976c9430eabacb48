"""Static typing of method bodies and OCL constraints against a class model."""

from __future__ import annotations

from typing import Mapping, Optional

from . import ast as A
from .ast import BOOL, INT, NULL, STRING, TIME, VOID, Type, ref, seq_of
from .diagnostics import Diagnostic, error
from .model import ClassDef, ClassModel, Invariant, MethodDef, find_member, subtype_of


def conforms(m: ClassModel, actual: Type, expected: Type) -> bool:
    if actual == expected:
        return True
    if actual.is_numeric and expected.is_numeric:
        return True
    if actual.kind == "null" and expected.kind == "ref":
        return True
    if actual.kind == "ref" and expected.kind == "ref":
        if m.get(actual.name) is None or m.get(expected.name) is None:
            return False
        return subtype_of(m, actual.name, expected.name)
    if actual.kind == "seq" and expected.kind == "seq":
        if actual.elem is None or expected.elem is None:
            return True
        return conforms(m, actual.elem, expected.elem)
    return False


def comparable(m: ClassModel, a: Type, b: Type) -> bool:
    return conforms(m, a, b) or conforms(m, b, a)


def common_ref(m: ClassModel, a: str, b: str) -> Optional[str]:
    ups = [c.name for c in m.ancestors(a)]
    for c in m.ancestors(b):
        if c.name in ups:
            return c.name
    return None


def join(m: ClassModel, a: Type, b: Type) -> Optional[Type]:
    if conforms(m, b, a):
        return a if a.kind != "null" else b
    if conforms(m, a, b):
        return b
    if a.is_numeric and b.is_numeric:
        return TIME
    if a.kind == "ref" and b.kind == "ref":
        c = common_ref(m, a.name, b.name)
        return ref(c) if c else None
    return None


class _Abort(Exception):
    pass


class Checker:
    """Types one method body or one constraint; diagnostics accumulate in ``diags``."""

    def __init__(self, model: ClassModel, *, ocl: bool, code: str, self_cls: Optional[str] = None):
        self.m = model
        self.ocl = ocl
        self.code = code
        self.self_cls = self_cls
        self.scopes: list[dict[str, Type]] = [{}]
        self.diags: list[Diagnostic] = []

    # scope handling
    def lookup(self, name: str) -> Optional[Type]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def bind(self, name: str, t: Type) -> None:
        self.scopes[-1][name] = t

    def fail(self, node, msg: str, code: Optional[str] = None):
        self.diags.append(error(A.span_of(node), code or self.code, msg))
        raise _Abort()

    # expressions
    def expr(self, e: A.Expr, *, allow_void: bool = False) -> Type:
        t = self._expr(e)
        if t == VOID and not allow_void:
            self.fail(e, "void call used as a value")
        return t

    def _expr(self, e: A.Expr) -> Type:
        if isinstance(e, A.Lit):
            return e.type
        if isinstance(e, A.Var):
            t = self.lookup(e.name)
            if t is None:
                self.fail(e, f"unbound variable {e.name}", "O003" if self.ocl else None)
            return t
        if isinstance(e, A.SelfRef):
            if self.self_cls is None:
                self.fail(e, "self is not bound here", "O003" if self.ocl else None)
            return ref(self.self_cls)
        if isinstance(e, A.Nav):
            return self.nav_type(e)
        if isinstance(e, A.Call):
            owner = self.receiver(e.target, e)
            res = find_member(self.m, owner, e.method, "method")
            if res is None:
                self.fail(e, f"class {owner} has no method {e.method}", "O002" if self.ocl else None)
            meth: MethodDef = res.member
            if len(meth.params) != len(e.args):
                self.fail(e, f"{owner}.{e.method} expects {len(meth.params)} arguments, got {len(e.args)}")
            for p, a in zip(meth.params, e.args):
                at = self.expr(a)
                if not conforms(self.m, at, p.type):
                    self.fail(a, f"argument {p.name} of {owner}.{e.method} expects {p.type}, got {at}")
            return meth.returns
        if isinstance(e, A.StaticRead):
            return self.static_type(e, e.cls, e.name)
        if isinstance(e, A.FactoryGet):
            if self.ocl:
                self.fail(e, "factory call is not allowed in a constraint", "O006")
            if self.m.get(e.cls) is None:
                self.fail(e, f"unknown class {e.cls}")
            for a in e.args:
                self.expr(a)
            return ref(e.cls)
        if isinstance(e, A.Now):
            if self.ocl:
                self.fail(e, "now() is not allowed in a constraint", "O006")
            return TIME
        if isinstance(e, A.Unary):
            t = self.expr(e.operand)
            if e.op == "not":
                if t != BOOL:
                    self.fail(e, f"not expects Bool, got {t}")
                return BOOL
            if not t.is_numeric:
                self.fail(e, f"unary minus expects a number, got {t}")
            return t
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.CollOp):
            return self.collop(e)
        if isinstance(e, A.Iterate):
            st = self.expr(e.target)
            if st.kind != "seq" or st.elem is None:
                self.fail(e, f"{e.op} expects a typed sequence, got {st}")
            if self.ocl and self.lookup(e.var) is not None:
                self.fail(e, f"iterator variable {e.var} collides with a bound name", "O005")
            self.scopes.append({e.var: st.elem})
            try:
                bt = self.expr(e.body)
            finally:
                self.scopes.pop()
            if bt != BOOL:
                self.fail(e.body, f"{e.op} body must be Bool, got {bt}")
            return st if e.op == "select" else BOOL
        if isinstance(e, A.SeqLit):
            elem: Optional[Type] = None
            for item in e.items:
                it = self.expr(item)
                if it.kind == "seq":
                    self.fail(item, "nested sequences are not supported")
                if elem is None:
                    elem = it
                else:
                    j = join(self.m, elem, it)
                    if j is None:
                        self.fail(item, f"sequence element {it} does not match {elem}")
                    elem = j
            if elem is not None and elem.kind == "null":
                elem = None
            return seq_of(elem)
        raise TypeError(f"unknown expression node {e!r}")

    def receiver(self, target: A.Expr, node) -> str:
        t = self.expr(target)
        if t.kind == "null":
            self.fail(node, "navigation through null")
        if t.kind != "ref":
            self.fail(node, f"expected an object, got {t}")
        return t.name

    def nav_type(self, e: A.Nav) -> Type:
        owner = self.receiver(e.target, e)
        res = find_member(self.m, owner, e.name, "attribute")
        if res is not None:
            return res.member.type
        for a in self.m.associations:
            if a.name == e.name and self.m.get(a.source) is not None and subtype_of(self.m, owner, a.source):
                return seq_of(ref(a.target)) if a.many else ref(a.target)
        self.fail(e, f"class {owner} has no attribute or association {e.name}", "O002" if self.ocl else None)

    def static_type(self, node, cls: str, name: str) -> Type:
        if self.m.get(cls) is None:
            self.fail(node, f"unknown class {cls}", "O004" if self.ocl else None)
        res = find_member(self.m, cls, name, "static")
        if res is None:
            self.fail(node, f"class {cls} has no static {name}", "O002" if self.ocl else None)
        return res.member.type

    def binary(self, e: A.Binary) -> Type:
        lt = self.expr(e.left)
        rt = self.expr(e.right)
        op = e.op
        if op in ("and", "or", "implies"):
            if lt != BOOL or rt != BOOL:
                self.fail(e, f"{op} expects Bool operands, got {lt} and {rt}")
            return BOOL
        if op in ("=", "<>"):
            if not comparable(self.m, lt, rt):
                self.fail(e, f"cannot compare {lt} with {rt}")
            return BOOL
        if op in ("<", "<="):
            if not (lt.is_numeric and rt.is_numeric):
                self.fail(e, f"{op} expects numbers, got {lt} and {rt}")
            return BOOL
        if op == "+" and lt == STRING and rt == STRING:
            return STRING
        if op in ("+", "-", "*"):
            if not (lt.is_numeric and rt.is_numeric):
                self.fail(e, f"{op} expects numbers, got {lt} and {rt}")
            return TIME if TIME in (lt, rt) else INT
        raise TypeError(f"unknown operator {op}")

    def collop(self, e: A.CollOp) -> Type:
        st = self.expr(e.target)
        if st.kind != "seq":
            self.fail(e, f"->{e.op} expects a sequence, got {st}")
        arity = A.COLLECTION_OPS.get(e.op)
        if arity is None:
            self.fail(e, f"unknown collection operation {e.op}")
        if len(e.args) != arity:
            self.fail(e, f"->{e.op} expects {arity} arguments")
        if e.op == "size":
            return INT
        if e.op in ("isEmpty", "notEmpty"):
            return BOOL
        if e.op == "at":
            it = self.expr(e.args[0])
            if not it.is_numeric:
                self.fail(e, "->at expects a number")
            if st.elem is None:
                self.fail(e, "->at on an untyped empty sequence")
            return st.elem
        at = self.expr(e.args[0])
        if st.elem is not None and not comparable(self.m, at, st.elem):
            self.fail(e, f"->{e.op} element {at} does not match {st.elem}")
        if e.op == "includes":
            return BOOL
        if at.kind == "seq":
            self.fail(e, "nested sequences are not supported")
        elem = at if st.elem is None else join(self.m, st.elem, at)
        return seq_of(elem if elem is None or elem.kind != "null" else None)

    # statements
    def block(self, stmts, returns: Type) -> None:
        self.scopes.append({})
        try:
            for s in stmts:
                try:
                    self.stmt(s, returns)
                except _Abort:
                    pass
        finally:
            self.scopes.pop()

    def stmt(self, s: A.Stmt, returns: Type) -> None:
        if isinstance(s, A.Assign):
            vt = self.expr(s.value)
            if isinstance(s.target, A.Var):
                tt = self.lookup(s.target.name)
                if tt is None:
                    self.fail(s.target, f"assignment to undeclared variable {s.target.name}")
            elif isinstance(s.target, A.Nav):
                owner = self.receiver(s.target.target, s.target)
                res = find_member(self.m, owner, s.target.name, "attribute")
                if res is None:
                    self.fail(s.target, f"class {owner} has no attribute {s.target.name}")
                tt = res.member.type
            else:
                self.fail(s, "invalid assignment target")
            if not conforms(self.m, vt, tt):
                self.fail(s, f"cannot assign {vt} to {tt}")
        elif isinstance(s, A.StaticWrite):
            tt = self.static_type(s, s.cls, s.name)
            vt = self.expr(s.value)
            if not conforms(self.m, vt, tt):
                self.fail(s, f"cannot assign {vt} to static {s.cls}::{s.name} of type {tt}")
        elif isinstance(s, A.VarDecl):
            if self.lookup(s.name) is not None:
                self.fail(s, f"variable {s.name} already declared")
            from .model import type_exists
            if not type_exists(self.m, s.type):
                self.fail(s, f"unknown type {s.type}")
            vt = self.expr(s.value)
            if not conforms(self.m, vt, s.type):
                self.fail(s, f"cannot initialize {s.name}: {s.type} with {vt}")
            self.bind(s.name, s.type)
        elif isinstance(s, A.If):
            self.cond(s.cond)
            self.block(s.then, returns)
            self.block(s.orelse, returns)
        elif isinstance(s, A.While):
            self.cond(s.cond)
            self.block(s.body, returns)
        elif isinstance(s, A.ExprStmt):
            if not isinstance(s.expr, (A.Call, A.FactoryGet)):
                self.fail(s, "only calls may be used as statements")
            self.expr(s.expr, allow_void=True)
        elif isinstance(s, A.Return):
            if returns == VOID:
                if s.value is not None:
                    self.fail(s, "void method returns a value")
            elif s.value is None:
                self.fail(s, f"missing return value of type {returns}")
            else:
                vt = self.expr(s.value)
                if not conforms(self.m, vt, returns):
                    self.fail(s, f"cannot return {vt} from a method returning {returns}")
        else:
            raise TypeError(f"unknown statement {s!r}")

    def cond(self, e: A.Expr) -> None:
        t = self.expr(e)
        if t != BOOL:
            self.fail(e, f"condition must be Bool, got {t}")


def always_returns(stmts) -> bool:
    for s in stmts:
        if isinstance(s, A.Return):
            return True
        if isinstance(s, A.If) and always_returns(s.then) and always_returns(s.orelse):
            return True
    return False


def check_method_body(m: ClassModel, c: ClassDef, meth: MethodDef) -> list[Diagnostic]:
    if meth.body is None:
        return []
    ch = Checker(m, ocl=False, code="M009", self_cls=c.name)
    for p in meth.params:
        ch.bind(p.name, p.type)
    ch.block(meth.body, meth.returns)
    if meth.returns != VOID and not always_returns(meth.body):
        ch.diags.append(error(meth.span, "M008", f"{c.name}.{meth.name} may finish without returning a {meth.returns}"))
    return ch.diags


def typecheck_constraint(c: A.Constraint, m: ClassModel, env: Mapping[str, Type] | None = None) -> list[Diagnostic]:
    """Diagnostics for ``c``; empty iff well-typed. ``env`` binds free names such as fixture objects."""
    ch = Checker(m, ocl=True, code="O001")
    for name, t in (env or {}).items():
        ch.bind(name, t)
    try:
        if c.cls is not None:
            if m.get(c.cls) is None:
                ch.fail(c, f"unknown context class {c.cls}", "O004")
            if c.var is None:
                ch.self_cls = c.cls
            else:
                if ch.lookup(c.var) is not None:
                    ch.fail(c, f"context variable {c.var} collides with a bound name", "O005")
                ch.scopes.append({c.var: ref(c.cls)})
        t = ch.expr(c.body)
        if t != BOOL:
            ch.fail(c.body, f"constraint must be Bool, got {t}")
    except _Abort:
        pass
    return ch.diags


def check_invariant(m: ClassModel, inv: A.Constraint) -> list[Diagnostic]:
    return typecheck_constraint(inv, m)


def expr_type(m: ClassModel, e: A.Expr, env: Mapping[str, Type]) -> tuple[Optional[Type], list[Diagnostic]]:
    """Type of a free-standing expression (e.g. a driver argument) under ``env``."""
    ch = Checker(m, ocl=True, code="O001")
    for name, t in env.items():
        ch.bind(name, t)
    try:
        return ch.expr(e), ch.diags
    except _Abort:
        return None, ch.diags
