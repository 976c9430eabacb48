"""Canonical text for every notation; output reparses to an equal AST."""

from __future__ import annotations

import json

from .. import ast as A
from ..diagrams import Checkpoint, LocationSet, Message, ObjectDiagram, SequenceDiagram, TestSource, TimeStamp, Wildcard
from ..model import ClassModel, MethodDef

_PREC = {"implies": 1, "or": 2, "and": 3, "=": 5, "<>": 5, "<": 5, "<=": 5, "+": 6, "-": 6, "*": 7}
_NOT_PREC = 4
_NEG_PREC = 8


def print_type(t: A.Type) -> str:
    return str(t)


def _lit(e: A.Lit) -> str:
    if e.type.kind == "Bool":
        return "true" if e.value else "false"
    if e.type.kind == "null":
        return "null"
    if e.type.kind == "String":
        return json.dumps(e.value, ensure_ascii=False)
    if e.type.kind == "Time":
        return f"{e.value}t"
    return str(e.value)


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Unary):
        return _NOT_PREC if e.op == "not" else _NEG_PREC
    if isinstance(e, A.Lit) and e.type.is_numeric and e.value < 0:
        return _NEG_PREC
    return 10


def print_expr(e: A.Expr, min_prec: int = 0) -> str:
    text = _expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def _arg(a) -> str:
    return "_" if isinstance(a, Wildcard) else print_expr(a)


def _expr(e: A.Expr) -> str:
    if isinstance(e, A.Lit):
        return _lit(e)
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.SelfRef):
        return "self"
    if isinstance(e, A.Now):
        return "now()"
    if isinstance(e, A.Nav):
        return f"{print_expr(e.target, 10)}.{e.name}"
    if isinstance(e, A.Call):
        return f"{print_expr(e.target, 10)}.{e.method}({', '.join(_arg(a) for a in e.args)})"
    if isinstance(e, A.StaticRead):
        return f"{e.cls}::{e.name}"
    if isinstance(e, A.FactoryGet):
        return f"factory {e.cls}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, A.CollOp):
        return f"{print_expr(e.target, 10)}->{e.op}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, A.Iterate):
        return f"{print_expr(e.target, 10)}->{e.op}({e.var} | {print_expr(e.body)})"
    if isinstance(e, A.SeqLit):
        return "[" + ", ".join(print_expr(i) for i in e.items) + "]"
    if isinstance(e, A.Unary):
        if e.op == "not":
            return f"not {print_expr(e.operand, _NOT_PREC)}"
        return f"-{print_expr(e.operand, _NEG_PREC + 1)}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        if e.op == "implies":
            return f"{print_expr(e.left, p + 1)} implies {print_expr(e.right, p)}"
        if p == 5:
            return f"{print_expr(e.left, p + 1)} {e.op} {print_expr(e.right, p + 1)}"
        return f"{print_expr(e.left, p)} {e.op} {print_expr(e.right, p + 1)}"
    raise TypeError(f"cannot print {e!r}")


def print_constraint(c: A.Constraint) -> str:
    parts = []
    if c.location:
        parts.append(f"@{c.location}")
    if c.cls:
        parts.append(f"context {c.cls}" + (f" {c.var}:" if c.var else ":"))
    parts.append(print_expr(c.body))
    return " ".join(parts)


def _block(stmts, indent: int) -> list[str]:
    pad = "  " * indent
    out = []
    for s in stmts:
        if isinstance(s, A.Assign):
            out.append(f"{pad}{print_expr(s.target)} := {print_expr(s.value)}")
        elif isinstance(s, A.StaticWrite):
            out.append(f"{pad}{s.cls}::{s.name} := {print_expr(s.value)}")
        elif isinstance(s, A.VarDecl):
            out.append(f"{pad}var {s.name}: {s.type} := {print_expr(s.value)}")
        elif isinstance(s, A.ExprStmt):
            out.append(f"{pad}{print_expr(s.expr)}")
        elif isinstance(s, A.Return):
            out.append(f"{pad}return" + (f" {print_expr(s.value)}" if s.value is not None else ""))
        elif isinstance(s, A.While):
            out.append(f"{pad}while {print_expr(s.cond)} {{")
            out.extend(_block(s.body, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(s, A.If):
            out.append(f"{pad}if {print_expr(s.cond)} {{")
            out.extend(_block(s.then, indent + 1))
            if s.orelse:
                out.append(f"{pad}}} else {{")
                out.extend(_block(s.orelse, indent + 1))
            out.append(f"{pad}}}")
        else:
            raise TypeError(f"cannot print {s!r}")
    return out


def _method(meth: MethodDef) -> list[str]:
    params = ", ".join(f"{p.name}: {p.type}" for p in meth.params)
    ret = "" if meth.returns.kind == "void" else f": {meth.returns}"
    if meth.body is None:
        return [f"  abstract method {meth.name}({params}){ret}"]
    return [f"  method {meth.name}({params}){ret} {{", *_block(meth.body, 2), "  }"]


def print_model(m: ClassModel) -> str:
    out = [f"model {m.name}", ""]
    for c in m.classes:
        head = f"class {c.name}" + (f" extends {c.superclass}" if c.superclass else "")
        out.append(head + " {")
        for a in c.attributes:
            out.append(f"  attr {a.name}: {a.type}")
        for s in c.statics:
            out.append(f"  static {s.name}: {s.type}")
        for meth in c.methods:
            out.extend(_method(meth))
        out.append("}")
        out.append("")
    for a in m.associations:
        out.append(f"assoc {a.name}: {a.source} -> {a.target} [{'*' if a.many else '1'}]")
    for inv in m.invariants:
        out.append(f"inv {inv.name}: {print_constraint(inv.constraint)}")
    for cls, meth in sorted(m.published):
        out.append(f"publish {cls}.{meth}")
    return "\n".join(out).rstrip() + "\n"


def print_od(od: ObjectDiagram) -> str:
    out = [f"od {od.name}"]
    for o in od.objects:
        head = "object " + ("" if o.anonymous else o.name) + f": {o.cls}"
        if o.location:
            head += f" @{o.location}"
        if o.factory_for:
            head += f" factory for {o.factory_for}"
        if o.slots:
            head += " { " + ", ".join(f"{n} = {print_expr(v)}" for n, v in o.slots) + " }"
        out.append(head)
    for link in od.links:
        out.append(f"link {link.assoc}({link.source}, {link.target})")
    for s in od.statics:
        loc = f" @{s.location}" if s.location else ""
        out.append(f"static {s.cls}::{s.name}{loc} = {print_expr(s.value)}")
    return "\n".join(out) + "\n"


def _annot(time, loc) -> str:
    out = ""
    if time is not None:
        out += f" @time({time})"
    if loc is not None:
        out += f" @loc({loc})"
    return out


def print_message(msg: Message) -> str:
    text = f"{msg.source} -> {msg.target}.{msg.method}({', '.join(_arg(a) for a in msg.args)})"
    if msg.returns is not None:
        text += f" = {print_expr(msg.returns)}"
    return text + _annot(msg.time, msg.location)


def print_sd(sd: SequenceDiagram) -> str:
    out = [f"sd {sd.name}"]
    if sd.lifelines:
        out.append("lifelines " + ", ".join(sd.lifelines))
    for s in sd.steps:
        if isinstance(s, Message):
            out.append(print_message(s))
        elif isinstance(s, Checkpoint):
            out.append(f"check: {print_constraint(s.constraint)}")
        elif isinstance(s, TimeStamp):
            out.append(f"@time({s.time})")
        elif isinstance(s, LocationSet):
            out.append(f"@loc({s.location})")
    return "\n".join(out) + "\n"


def print_test(t: TestSource) -> str:
    out = [f"test {t.name}", f"kind {t.kind}"]
    if t.fixture:
        out.append("fixture " + " + ".join(t.fixture))
    if t.factories:
        out.append("factory " + ", ".join(t.factories))
    if isinstance(t.driver, SequenceDiagram):
        msg = t.driver.messages[0]
        text = print_message(msg).split(" -> ", 1)[1]
        out.append(f"driver call {text}")
    elif t.driver:
        out.append(f"driver {t.driver}")
    if t.oracle:
        out.append(f"oracle {t.oracle}")
    for c in t.constraints:
        out.append(f"ocl {print_constraint(c)}")
    for n in t.invariants:
        out.append(f"invariant {n}")
    out.append(f"mode {t.mode}")
    return "\n".join(out) + "\n"


def print_refactor(steps) -> str:
    names = {
        "pull-up-attribute": "pull-up-attr",
        "pull-up-method-override": "pull-up-method",
        "pull-up-signature": "pull-up-signature",
        "drop-statement": "drop-stmt",
    }
    lines = []
    for t in steps:
        line = f"{names[t.kind]} {t.cls}.{t.member}"
        if t.index is not None:
            line += f" {t.index}"
        lines.append(line)
    return "\n".join(lines) + "\n"
