"""Deterministic execution substrate for class models.

A :class:`Store` holds the objects of one test run together with links,
per-location statics, the simulated clock, factory queues and the
interaction trace. Method bodies are interpreted directly from the AST.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import ast as A
from .ast import Type
from .diagnostics import Diagnostic, error
from .diagrams import ObjectDiagram, ObjectSpec
from .model import ClassModel, MethodDef, all_attributes, find_member, subtype_of

DEFAULT_LOCATION = "default"
DEFAULT_BUDGET = 100_000
MAX_CALL_DEPTH = 100
DRIVER = "driver"


@dataclass(frozen=True, order=True)
class Ref:
    oid: int


class _Marker:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


UNSET = _Marker("unset")
VOID = _Marker("void")
ABORTED = _Marker("aborted")


class RunError(Exception):
    """A failure of the system under test during a run (never an engine bug)."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.message = message


class ScheduleAborted(RunError):
    def __init__(self, step: int, cause: RunError):
        super().__init__(cause.kind, f"step {step}: {cause.message}")
        self.step = step
        self.cause = cause


class FixtureError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics))


@dataclass
class StoredObject:
    oid: int
    name: str
    cls: str
    location: Optional[str]
    slots: dict[str, Any]
    dormant: bool = False


@dataclass
class ClockState:
    now: int = 0
    auto_advance: bool = True


@dataclass
class FactoryQueue:
    cls: str
    pending: list[int] = field(default_factory=list)
    consumed: list[int] = field(default_factory=list)
    requests: list[tuple] = field(default_factory=list)

    @property
    def consumed_count(self) -> int:
        return len(self.consumed)


@dataclass(frozen=True)
class InteractionEvent:
    seq: int
    time: int
    caller: str
    callee: str
    callee_id: int
    method: str
    args: tuple
    ret: Any
    location: str


def zero_value(t: Type) -> Any:
    if t.is_numeric:
        return 0
    if t.kind == "Bool":
        return False
    if t.kind == "String":
        return ""
    if t.kind == "seq":
        return ()
    return None


@dataclass(frozen=True)
class ScheduleStep:
    target: str
    method: str
    args: tuple = ()
    time: Optional[int] = None
    location: Optional[str] = None


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class Store:
    """Runtime snapshot of one test run. Single-threaded by contract."""

    def __init__(self, model: ClassModel, budget: int = DEFAULT_BUDGET):
        self.model = model
        self.objects: dict[int, StoredObject] = {}
        self.live: list[int] = []
        self.links: list[tuple[str, int, int]] = []
        self.statics: dict[tuple[str, str, str], Any] = {}
        self.clock = ClockState()
        self.factories: dict[str, FactoryQueue] = {}
        self.trace: list[Optional[InteractionEvent]] = []
        self.names: dict[str, int] = {}
        self.budget = budget
        self.location = DEFAULT_LOCATION
        self._query = 0
        self._depth = 0
        self._subtype_cache: dict[tuple[str, str], bool] = {}

    # -- objects -------------------------------------------------------------
    def obj(self, ref: Optional[Ref]) -> StoredObject:
        if ref is None:
            raise RunError("null-receiver", "null receiver")
        o = self.objects[ref.oid]
        if o.dormant:
            raise RunError("not-created", f"object {o.name} has not been created yet")
        return o

    def ref(self, name: str) -> Ref:
        return Ref(self.names[name])

    def name_of(self, ref: Optional[Ref]) -> str:
        return "null" if ref is None else self.objects[ref.oid].name

    def is_a(self, cls: str, sup: str) -> bool:
        key = (cls, sup)
        hit = self._subtype_cache.get(key)
        if hit is None:
            hit = self._subtype_cache[key] = subtype_of(self.model, cls, sup)
        return hit

    def instances(self, cls: str, location: Optional[str] = None) -> list[Ref]:
        """Live objects of ``cls`` (or a subclass) in creation order, optionally at one location."""
        return [Ref(oid) for oid in self.live
                if self.is_a(self.objects[oid].cls, cls)
                and (location is None or self.objects[oid].location == location)]

    def linked(self, assoc: str, source: int) -> list[Ref]:
        return [Ref(b) for (n, a, b) in self.links if n == assoc and a == source]

    # -- time ----------------------------------------------------------------
    def now(self) -> int:
        if self._query:
            raise RunError("side-effect", "now() queried during constraint evaluation")
        t = self.clock.now
        if self.clock.auto_advance:
            self.clock.now += 1
        return t

    def set_time(self, t: int) -> None:
        if t < self.clock.now:
            raise RunError("time-reversal", f"time reversal: stamp {t} is before current time {self.clock.now}")
        self.clock.now = t

    # -- factories -----------------------------------------------------------
    def factory_get(self, cls: str, args: Sequence[Any] = ()) -> Ref:
        if self._query:
            raise RunError("side-effect", "factory call during constraint evaluation")
        queue = self.factories.get(cls)
        if queue is None:
            for sup in self.model.ancestors(cls):
                queue = self.factories.get(sup.name)
                if queue is not None:
                    break
        if queue is None:
            raise RunError("no-factory", f"no factory script for {cls}")
        if not queue.pending:
            raise RunError("factory-exhausted", f"factory exhausted for {queue.cls}")
        oid = queue.pending[0]
        o = self.objects[oid]
        if not self.is_a(o.cls, cls):
            raise RunError("factory-type", f"factory object {o.name}: {o.cls} does not conform to {cls}")
        queue.pending.pop(0)
        queue.consumed.append(oid)
        queue.requests.append(tuple(args))
        o.dormant = False
        self.live.append(oid)
        return Ref(oid)

    # -- statics -------------------------------------------------------------
    def _static_key(self, cls: str, name: str, location: Optional[str]) -> tuple[tuple[str, str, str], Type]:
        res = find_member(self.model, cls, name, "static") if self.model.get(cls) else None
        if res is None:
            raise RunError("undeclared-static", f"undeclared static {cls}::{name}")
        return (res.defining_class, name, location or self.location), res.member.type

    def static_read(self, cls: str, name: str, location: Optional[str] = None) -> Any:
        key, t = self._static_key(cls, name, location)
        return self.statics.get(key, zero_value(t))

    def static_write(self, cls: str, name: str, value: Any, location: Optional[str] = None) -> None:
        if self._query:
            raise RunError("side-effect", f"static {cls}::{name} written during constraint evaluation")
        key, _ = self._static_key(cls, name, location)
        self.statics[key] = value

    # -- dispatch ------------------------------------------------------------
    def dispatch(self, caller: str, callee: Optional[Ref], method: str, args: Sequence[Any] = (),
                 location: Optional[str] = None) -> Any:
        """Dynamically bound call; records one trace event unless evaluating a query."""
        target = self.obj(callee)
        res = find_member(self.model, target.cls, method, "method")
        if res is None:
            raise RunError("unknown-method", f"{target.cls} has no method {method}")
        meth: MethodDef = res.member
        if meth.body is None:
            raise RunError("abstract-method", f"{res.defining_class}.{method} is abstract")
        if len(args) != len(meth.params):
            raise RunError("arity", f"{target.cls}.{method} expects {len(meth.params)} arguments")
        if self._depth >= MAX_CALL_DEPTH:
            raise RunError("call-depth", f"call depth exceeds {MAX_CALL_DEPTH}")
        saved = self.location
        if location is not None:
            self.location = location
        if target.location is not None:
            self.location = target.location
        slot = None
        started = self.clock.now
        if not self._query:
            slot = len(self.trace)
            self.trace.append(None)
        ret: Any = ABORTED
        self._depth += 1
        try:
            frame = {p.name: a for p, a in zip(meth.params, args)}
            try:
                Interpreter(self, callee, frame).block(meth.body)
                ret = VOID
            except _Return as r:
                ret = r.value if meth.returns.kind != "void" else VOID
            return ret
        finally:
            self._depth -= 1
            if slot is not None and ret is not ABORTED:  # aborted dispatches leave no event
                self.trace[slot] = InteractionEvent(
                    slot, started, caller, target.name, target.oid, method,
                    tuple(args), ret, self.location)
            self.location = saved

    def step(self) -> None:
        if self._query:
            self._query_budget -= 1
            if self._query_budget < 0:
                raise RunError("budget", "step budget exhausted during constraint evaluation")
            return
        self.budget -= 1
        if self.budget < 0:
            raise RunError("budget", "step budget exhausted")

    # -- query mode (constraint evaluation) ---------------------------------
    def enter_query(self) -> None:
        if self._query == 0:
            self._query_budget = DEFAULT_BUDGET
        self._query += 1

    def exit_query(self) -> None:
        self._query -= 1

    # -- serialization -------------------------------------------------------
    def canonical(self) -> tuple:
        objs = tuple(
            (o.oid, o.name, o.cls, o.location, o.dormant,
             tuple(sorted((k, _canon(v)) for k, v in o.slots.items())))
            for o in sorted(self.objects.values(), key=lambda o: o.oid))
        statics = tuple(sorted((k, _canon(v)) for k, v in self.statics.items()))
        factories = tuple(sorted((k, tuple(q.pending), tuple(q.consumed), _canon(q.requests))
                                 for k, q in self.factories.items()))
        return (objs, tuple(self.live), tuple(self.links), statics, (self.clock.now, self.clock.auto_advance),
                factories, tuple(self.format_trace()), tuple(sorted(self.names.items())), self.budget, self.location)

    def content_hash(self) -> str:
        return hashlib.sha256(repr(self.canonical()).encode()).hexdigest()

    def format_value(self, v: Any) -> str:
        if v is VOID:
            return "void"
        if v is ABORTED:
            return "<aborted>"
        if v is UNSET:
            return "<unset>"
        if v is None:
            return "null"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, int):
            return str(v)
        if isinstance(v, str):
            return json.dumps(v, ensure_ascii=False)
        if isinstance(v, Ref):
            return self.objects[v.oid].name
        if isinstance(v, tuple):
            return "[" + ", ".join(self.format_value(x) for x in v) + "]"
        return repr(v)

    def format_event(self, ev: InteractionEvent) -> str:
        args = ", ".join(self.format_value(a) for a in ev.args)
        return (f"#{ev.seq} t={ev.time} {ev.location} {ev.caller}->{ev.callee}.{ev.method}({args})"
                f" = {self.format_value(ev.ret)}")

    def format_trace(self) -> list[str]:
        return [self.format_event(ev) for ev in self.trace if ev is not None]

    def events(self) -> list[InteractionEvent]:
        return [ev for ev in self.trace if ev is not None]


def _canon(v: Any) -> Any:
    if isinstance(v, Ref):
        return ("ref", v.oid)
    if isinstance(v, (list, tuple)):
        return tuple(_canon(x) for x in v)
    if v is UNSET:
        return ("unset",)
    return v


class Interpreter:
    """Executes statements and evaluates expressions for one activation."""

    def __init__(self, store: Store, self_ref: Optional[Ref], frame: dict[str, Any]):
        self.s = store
        self.self_ref = self_ref
        self.frame = frame
        self.caller_name = store.objects[self_ref.oid].name if self_ref is not None else DRIVER

    # statements
    def block(self, stmts: Iterable[A.Stmt]) -> None:
        for st in stmts:
            self.stmt(st)

    def stmt(self, st: A.Stmt) -> None:
        self.s.step()
        if isinstance(st, A.Assign):
            value = self.eval(st.value)
            if isinstance(st.target, A.Var):
                self.frame[st.target.name] = value
            else:
                if self.s._query:
                    raise RunError("side-effect", f"attribute {st.target.name} written during constraint evaluation")
                o = self.s.obj(self.eval(st.target.target))
                o.slots[st.target.name] = value
        elif isinstance(st, A.VarDecl):
            self.frame[st.name] = self.eval(st.value)
        elif isinstance(st, A.StaticWrite):
            self.s.static_write(st.cls, st.name, self.eval(st.value))
        elif isinstance(st, A.If):
            if self.eval(st.cond):
                self.block(st.then)
            else:
                self.block(st.orelse)
        elif isinstance(st, A.While):
            while self.eval(st.cond):
                self.block(st.body)
                self.s.step()
        elif isinstance(st, A.ExprStmt):
            self.eval(st.expr)
        elif isinstance(st, A.Return):
            raise _Return(self.eval(st.value) if st.value is not None else VOID)
        else:
            raise TypeError(f"unknown statement {st!r}")

    # expressions
    def eval(self, e: A.Expr) -> Any:
        if isinstance(e, A.Lit):
            return e.value
        if isinstance(e, A.Var):
            try:
                return self.frame[e.name]
            except KeyError:
                raise RunError("unbound", f"unbound variable {e.name}") from None
        if isinstance(e, A.SelfRef):
            return self.self_ref
        if isinstance(e, A.Nav):
            return self.navigate(self.eval(e.target), e.name)
        if isinstance(e, A.Call):
            target = self.eval(e.target)
            args = tuple(self.eval(a) for a in e.args)
            return self.s.dispatch(self.caller_name, target, e.method, args)
        if isinstance(e, A.StaticRead):
            return self.s.static_read(e.cls, e.name)
        if isinstance(e, A.FactoryGet):
            args = tuple(self.eval(a) for a in e.args)
            return self.s.factory_get(e.cls, args)
        if isinstance(e, A.Now):
            return self.s.now()
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Unary):
            v = self.eval(e.operand)
            return (not v) if e.op == "not" else -v
        if isinstance(e, A.CollOp):
            return self.collop(e)
        if isinstance(e, A.Iterate):
            items = self.eval(e.target)
            saved = self.frame.get(e.var, _MISSING)
            try:
                if e.op == "select":
                    out = []
                    for x in items:
                        self.frame[e.var] = x
                        if self.eval(e.body):
                            out.append(x)
                    return tuple(out)
                want = e.op == "exists"
                for x in items:
                    self.frame[e.var] = x
                    if bool(self.eval(e.body)) == want:
                        return want
                return not want
            finally:
                if saved is _MISSING:
                    self.frame.pop(e.var, None)
                else:
                    self.frame[e.var] = saved
        if isinstance(e, A.SeqLit):
            return tuple(self.eval(i) for i in e.items)
        raise TypeError(f"unknown expression {e!r}")

    def navigate(self, target: Optional[Ref], name: str) -> Any:
        o = self.s.obj(target)
        if name in o.slots:
            v = o.slots[name]
            if v is UNSET:
                raise RunError("unset-slot", f"read of unset slot {o.name}.{name}")
            return v
        assoc = self.s.model.association(name)
        if assoc is None:
            raise RunError("unknown-member", f"{o.cls} has no attribute {name}")
        linked = self.s.linked(name, o.oid)
        if assoc.many:
            return tuple(linked)
        if not linked:
            raise RunError("unset-slot", f"no {name} link from {o.name}")
        return linked[0]

    def binary(self, e: A.Binary) -> Any:
        op = e.op
        if op == "and":
            return bool(self.eval(e.left)) and bool(self.eval(e.right))
        if op == "or":
            return bool(self.eval(e.left)) or bool(self.eval(e.right))
        if op == "implies":
            return (not self.eval(e.left)) or bool(self.eval(e.right))
        left = self.eval(e.left)
        right = self.eval(e.right)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "=":
            return values_equal(left, right)
        if op == "<>":
            return not values_equal(left, right)
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        raise TypeError(f"unknown operator {op}")

    def collop(self, e: A.CollOp) -> Any:
        items = self.eval(e.target)
        op = e.op
        if op == "size":
            return len(items)
        if op == "isEmpty":
            return len(items) == 0
        if op == "notEmpty":
            return len(items) > 0
        arg = self.eval(e.args[0])
        if op == "includes":
            return any(values_equal(x, arg) for x in items)
        if op == "including":
            return tuple(items) + (arg,)
        if op == "at":
            if not 1 <= arg <= len(items):
                raise RunError("index", f"->at({arg}) outside 1..{len(items)}")
            return items[arg - 1]
        raise TypeError(f"unknown collection operation {op}")


_MISSING = object()


def values_equal(a: Any, b: Any) -> bool:
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


# -- instantiation -----------------------------------------------------------

def check_fixture(m: ClassModel, od: ObjectDiagram, extra_names: Mapping[str, str] | None = None) -> list[Diagnostic]:
    """Type-check an object diagram against ``m``; ``extra_names`` maps outside object names to classes."""
    from .typecheck import conforms, expr_type

    diags: list[Diagnostic] = []
    env: dict[str, Type] = {n: A.ref(c) for n, c in (extra_names or {}).items()}
    seen: set[str] = set()
    for o in od.objects:
        if o.name in seen:
            diags.append(error(o.span, "F008", f"duplicate object name {o.name}"))
        seen.add(o.name)
        if m.get(o.cls) is None:
            diags.append(error(o.span, "F001", f"unknown class {o.cls} for object {o.name}"))
        else:
            env[o.name] = A.ref(o.cls)
        if o.factory_for is not None:
            if m.get(o.factory_for) is None:
                diags.append(error(o.span, "F001", f"unknown factory class {o.factory_for}"))
            elif m.get(o.cls) is not None and not subtype_of(m, o.cls, o.factory_for):
                diags.append(error(o.span, "F003", f"factory object {o.name}: {o.cls} is not a {o.factory_for}"))
    for o in od.objects:
        if m.get(o.cls) is None:
            continue
        for slot, value in o.slots:
            res = find_member(m, o.cls, slot, "attribute")
            if res is None:
                diags.append(error(A.span_of(value), "F002", f"class {o.cls} has no attribute {slot}"))
                continue
            vt, vdiags = expr_type(m, value, env)
            if vt is None:
                diags.append(error(A.span_of(value), "F004", vdiags[0].message if vdiags else f"bad value for {slot}"))
            elif not conforms(m, vt, res.member.type):
                diags.append(error(A.span_of(value), "F003",
                                   f"slot {o.name}.{slot} expects {res.member.type}, got {vt}"))
    for link in od.links:
        assoc = m.association(link.assoc)
        if assoc is None:
            diags.append(error(link.span, "F005", f"unknown association {link.assoc}"))
            continue
        for end, want in ((link.source, assoc.source), (link.target, assoc.target)):
            t = env.get(end)
            if t is None:
                diags.append(error(link.span, "F004", f"link {link.assoc} names missing object {end}"))
            elif not conforms(m, t, A.ref(want)):
                diags.append(error(link.span, "F003", f"link {link.assoc} end {end} is not a {want}"))
    for s in od.statics:
        if m.get(s.cls) is None:
            diags.append(error(s.span, "F001", f"unknown class {s.cls}"))
            continue
        res = find_member(m, s.cls, s.name, "static")
        if res is None:
            diags.append(error(s.span, "F007", f"undeclared static {s.cls}::{s.name}"))
            continue
        vt, vdiags = expr_type(m, s.value, env)
        if vt is None:
            diags.append(error(s.span, "F004", vdiags[0].message if vdiags else "bad static value"))
        elif not conforms(m, vt, res.member.type):
            diags.append(error(s.span, "F003", f"static {s.cls}::{s.name} expects {res.member.type}, got {vt}"))
    return diags


def _od_value(names: Mapping[str, int], e: A.Expr) -> Any:
    if isinstance(e, A.Lit):
        return e.value
    if isinstance(e, A.Var):
        return Ref(names[e.name])
    if isinstance(e, A.SeqLit):
        return tuple(_od_value(names, i) for i in e.items)
    raise TypeError(f"not a value: {e!r}")


def instantiate(m: ClassModel, fixture: ObjectDiagram, factory_ods: Sequence[ObjectDiagram] = (),
                budget: int = DEFAULT_BUDGET) -> Store:
    """Build a fresh store from a composed fixture plus any factory diagrams."""
    objects: list[ObjectSpec] = list(fixture.objects)
    links = list(fixture.links)
    statics = list(fixture.statics)
    for fod in factory_ods:
        for o in fod.objects:
            objects.append(o if o.factory_for is not None else
                           ObjectSpec(o.name, o.cls, o.location, o.slots, o.cls, o.anonymous, o.span))
        links.extend(fod.links)
        statics.extend(fod.statics)
    whole = ObjectDiagram(fixture.name, tuple(objects), tuple(links), tuple(statics))
    diags = check_fixture(m, whole)
    if diags:
        raise FixtureError(diags)

    s = Store(m, budget)
    for oid, o in enumerate(whole.objects):
        slots = {a.name: UNSET for a in all_attributes(m, o.cls)}
        s.objects[oid] = StoredObject(oid, o.name, o.cls, o.location, slots, dormant=o.factory_for is not None)
        s.names[o.name] = oid
        if o.factory_for is None:
            s.live.append(oid)
        else:
            s.factories.setdefault(o.factory_for, FactoryQueue(o.factory_for)).pending.append(oid)
    for oid, o in enumerate(whole.objects):
        for slot, value in o.slots:
            s.objects[oid].slots[slot] = _od_value(s.names, value)
    for link in whole.links:
        entry = (link.assoc, s.names[link.source], s.names[link.target])
        if entry not in s.links:
            s.links.append(entry)
    for st in whole.statics:
        s.static_write(st.cls, st.name, _od_value(s.names, st.value), st.location or DEFAULT_LOCATION)
    return s


def run_schedule(store: Store, steps: Sequence[ScheduleStep]) -> None:
    """Execute steps strictly in order; a failing step raises :class:`ScheduleAborted`."""
    for i, st in enumerate(steps, start=1):
        try:
            if st.time is not None:
                store.set_time(st.time)
            if st.location is not None:
                store.location = st.location
            if st.target not in store.names:
                raise RunError("unknown-object", f"unknown object {st.target}")
            store.dispatch(DRIVER, store.ref(st.target), st.method, st.args)
        except RunError as err:
            raise ScheduleAborted(i, err) from err
