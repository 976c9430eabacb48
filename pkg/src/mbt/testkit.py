"""Fixture composition, test execution, interaction checks, oracle matching and reports."""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import ast as A
from .ast import Constraint
from .diagnostics import Diagnostic, error, warning
from .diagrams import (
    Checkpoint, LocationSet, Message, ObjectDiagram, ObjectSpec, SequenceDiagram, TimeStamp, Wildcard,
)
from .dsl.printer import print_constraint, print_message
from .model import ClassModel, find_member, subtype_of
from .ocl import evaluate
from .runtime import (
    DEFAULT_LOCATION, DRIVER, ABORTED, InteractionEvent, Interpreter, Ref, RunError, Store,
    check_fixture, instantiate, values_equal,
)
from .typecheck import conforms, expr_type, typecheck_constraint

SEARCH_LIMIT = 10_000

REASON_KINDS = (
    "interaction-mismatch", "checkpoint-violated", "oracle-object-unmatched",
    "oracle-constraint-violated", "oracle-search-exhausted", "run-error",
)


class CompositionError(Exception):
    pass


@dataclass(frozen=True)
class TestCase:
    __test__ = False

    name: str
    fixture: tuple[ObjectDiagram, ...]
    driver: SequenceDiagram
    factories: tuple[ObjectDiagram, ...] = ()
    oracle: Optional[ObjectDiagram] = None
    constraints: tuple[Constraint, ...] = ()
    invariants: tuple[str, ...] = ()
    kind: str = "internal"
    mode: str = "subsequence"

    @property
    def composed(self) -> ObjectDiagram:
        return compose_fixture(self.fixture[0], self.fixture[1:]) if self.fixture else ObjectDiagram(self.name)

    def object_classes(self) -> dict[str, str]:
        names = {o.name: o.cls for o in self.composed.objects}
        for fod in self.factories:
            names.update({o.name: o.cls for o in fod.objects})
        return names


@dataclass(frozen=True)
class Reason:
    kind: str
    detail: str
    witness: tuple[tuple[str, str], ...] = ()

    def format(self) -> str:
        text = f"{self.kind}: {self.detail}"
        if self.witness:
            text += " [" + ", ".join(f"{k}={v}" for k, v in self.witness) + "]"
        return text


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    name: str
    verdict: str  # pass | fail
    reasons: tuple[Reason, ...] = ()
    trace: tuple[str, ...] = ()
    store: Optional[Store] = field(default=None, compare=False, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def format(self) -> list[str]:
        if self.passed:
            return [f"TEST {self.name} PASS"]
        return [f"TEST {self.name} FAIL reasons={len(self.reasons)}"] + [f"  {r.format()}" for r in self.reasons]


@dataclass(frozen=True)
class SuiteReport:
    results: tuple[TestResult, ...]

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    def verdicts(self) -> dict[str, str]:
        return {r.name: r.verdict for r in self.results}

    def text(self) -> str:
        lines: list[str] = []
        for r in self.results:
            lines.extend(r.format())
        lines.append(f"SUITE total={len(self.results)} pass={self.passed} fail={self.failed}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MatchResult:
    mapping: Optional[dict[str, int]]
    unmatched: Optional[str] = None
    partial: tuple[tuple[str, int], ...] = ()
    detail: str = ""
    exhausted: bool = False

    @property
    def ok(self) -> bool:
        return self.mapping is not None


# -- fixtures -----------------------------------------------------------------

def compose_fixture(base: ObjectDiagram, deltas: Sequence[ObjectDiagram] = ()) -> ObjectDiagram:
    """Later diagrams win slot-by-slot on same-named objects; objects, links and statics are unioned."""
    objects: dict[str, ObjectSpec] = {}
    order: list[str] = []
    links = list(base.links)
    statics = {(s.cls, s.name, s.location): s for s in base.statics}
    for o in base.objects:
        if o.name not in objects:
            order.append(o.name)
        objects[o.name] = o
    for d in deltas:
        for o in d.objects:
            old = objects.get(o.name)
            if old is None:
                objects[o.name] = o
                order.append(o.name)
                continue
            if old.cls != o.cls:
                raise CompositionError(f"object {o.name} is a {old.cls} in one diagram and a {o.cls} in {d.name}")
            slots = dict(old.slots)
            slots.update(o.slots)
            objects[o.name] = ObjectSpec(
                o.name, o.cls, o.location if o.location is not None else old.location,
                tuple(slots.items()), o.factory_for if o.factory_for is not None else old.factory_for,
                old.anonymous, old.span)
        for link in d.links:
            if all((link.assoc, link.source, link.target) != (x.assoc, x.source, x.target) for x in links):
                links.append(link)
        for s in d.statics:
            statics[(s.cls, s.name, s.location)] = s
    return ObjectDiagram(base.name, tuple(objects[n] for n in order), tuple(links), tuple(statics.values()))


# -- helpers -----------------------------------------------------------------

def eval_value(store: Store, e: A.Expr, env: Optional[Mapping[str, Any]] = None) -> Any:
    """Evaluate a side-effect-free driver/expectation expression against the store."""
    frame = {name: Ref(oid) for name, oid in store.names.items()}
    frame.update(env or {})
    store.enter_query()
    try:
        return Interpreter(store, None, frame).eval(e)
    finally:
        store.exit_query()


def _describe_event(store: Store, ev: InteractionEvent) -> str:
    args = ", ".join(store.format_value(a) for a in ev.args)
    return f"{ev.callee}.{ev.method}({args}) = {store.format_value(ev.ret)}"


def _matches(store: Store, msg: Message, ev: InteractionEvent) -> bool:
    if ev.callee != msg.target or ev.method != msg.method:
        return False
    if len(msg.args) > len(ev.args):
        return False
    for want, got in zip(msg.args, ev.args):
        if isinstance(want, Wildcard):
            continue
        if not values_equal(eval_value(store, want), got):
            return False
    return True


def _return_reason(store: Store, msg: Message, ev: InteractionEvent) -> Optional[Reason]:
    if msg.returns is None:
        return None
    want = eval_value(store, msg.returns)
    if values_equal(want, ev.ret):
        return None
    return Reason("interaction-mismatch", f"#{ev.seq} {msg.target}.{msg.method} returned unexpected value",
                  (("expected", store.format_value(want)), ("actual", store.format_value(ev.ret))))


def verify_interactions(expected: Sequence[Message], store: Store, mode: str = "subsequence",
                        events: Optional[Sequence[InteractionEvent]] = None) -> list[Reason]:
    """Check SD messages against the trace; triggers are matched only to driver-issued events."""
    events = list(store.events() if events is None else events)
    reasons: list[Reason] = []
    if mode == "exact":
        for i, (msg, ev) in enumerate(zip(expected, events)):
            if not _matches(store, msg, ev) or (msg.is_trigger != (ev.caller == DRIVER)):
                reasons.append(Reason("interaction-mismatch",
                                      f"at #{ev.seq} {ev.callee}.{ev.method}: expected {print_message(msg)}",
                                      (("actual", _describe_event(store, ev)),)))
                return reasons
            r = _return_reason(store, msg, ev)
            if r is not None:
                reasons.append(r)
                return reasons
        if len(expected) > len(events):
            reasons.append(Reason("interaction-mismatch",
                                  f"trace ended before expected {print_message(expected[len(events)])}"))
        elif len(events) > len(expected):
            ev = events[len(expected)]
            reasons.append(Reason("interaction-mismatch", f"at #{ev.seq} {ev.callee}.{ev.method}: unexpected extra event",
                                  (("actual", _describe_event(store, ev)),)))
        return reasons

    pos = 0
    for msg in expected:
        found = None
        for j in range(pos, len(events)):
            ev = events[j]
            if msg.is_trigger:
                if ev.caller == DRIVER and _matches(store, msg, ev):
                    found = j
                    break
            else:
                if ev.caller == DRIVER:
                    break
                if _matches(store, msg, ev):
                    found = j
                    break
        if found is None:
            reasons.append(Reason("interaction-mismatch", f"expected {print_message(msg)} was not observed"))
            continue
        r = _return_reason(store, msg, events[found])
        if r is not None:
            reasons.append(r)
        pos = found + 1
    return reasons


# -- oracle matching ---------------------------------------------------------

class _Matcher:
    def __init__(self, store: Store, oracle: ObjectDiagram, limit: int):
        self.s = store
        self.oracle = oracle
        self.limit = limit
        self.attempts = 0
        self.best: tuple[tuple[str, int], ...] = ()
        self.best_fail: Optional[str] = None
        self.best_detail = ""
        self.exhausted = False

    def ref_value(self, e: A.Expr, mapping: Mapping[str, int]) -> Any:
        if isinstance(e, A.Lit):
            return e.value
        if isinstance(e, A.Var):
            if self.oracle.get(e.name) is not None:
                oid = mapping.get(e.name)
                return _PENDING if oid is None else Ref(oid)
            if e.name in self.s.names:
                return Ref(self.s.names[e.name])
            raise KeyError(e.name)
        if isinstance(e, A.SeqLit):
            items = tuple(self.ref_value(i, mapping) for i in e.items)
            return _PENDING if any(i is _PENDING for i in items) else items
        raise TypeError(f"not an oracle value: {e!r}")

    def endpoint(self, name: str, mapping: Mapping[str, int]) -> Optional[int]:
        if self.oracle.get(name) is not None:
            return mapping.get(name, -1)
        return self.s.names.get(name)

    def object_ok(self, o: ObjectSpec, oid: int, mapping: Mapping[str, int]) -> Optional[str]:
        so = self.s.objects[oid]
        if so.dormant:
            return f"{so.name} was never created"
        if not self.s.is_a(so.cls, o.cls):
            return f"{so.name} is a {so.cls}, not a {o.cls}"
        for slot, expr in o.slots:
            want = self.ref_value(expr, mapping)
            if want is _PENDING:
                continue
            got = so.slots.get(slot, _PENDING)
            if got is _PENDING or not values_equal(want, got):
                return f"{so.name}.{slot} = {self.s.format_value(got)}, expected {self.s.format_value(want)}"
        return None

    def links_ok(self, mapping: Mapping[str, int], final: bool) -> Optional[str]:
        for link in self.oracle.links:
            a = self.endpoint(link.source, mapping)
            b = self.endpoint(link.target, mapping)
            if a == -1 or b == -1:
                if final:
                    return f"link {link.assoc}({link.source}, {link.target}) has an unmapped end"
                continue
            if a is None or b is None or (link.assoc, a, b) not in self.s.links:
                return f"missing link {link.assoc}({link.source}, {link.target})"
        return None

    def recheck(self, mapping: Mapping[str, int]) -> Optional[tuple[str, str]]:
        for o in self.oracle.objects:
            if o.name in mapping:
                why = self.object_ok(o, mapping[o.name], mapping)
                if why:
                    return o.name, why
        return None

    def run(self) -> MatchResult:
        mapping: dict[str, int] = {}
        searched: list[ObjectSpec] = []
        for o in self.oracle.objects:
            if not o.anonymous and o.name in self.s.names:
                mapping[o.name] = self.s.names[o.name]
            else:
                searched.append(o)
        for o in self.oracle.objects:
            if o.name in mapping:
                why = self.object_ok(o, mapping[o.name], mapping)
                if why:
                    return MatchResult(None, o.name, tuple(mapping.items()), why)
        why = self.links_ok(mapping, final=False)
        if why:
            return MatchResult(None, "link", tuple(mapping.items()), why)
        for st in self.oracle.statics:
            try:
                got = self.s.static_read(st.cls, st.name, st.location or DEFAULT_LOCATION)
            except RunError as err:
                return MatchResult(None, f"{st.cls}::{st.name}", tuple(mapping.items()), err.message)
            want = self.ref_value(st.value, mapping)
            if not values_equal(want, got):
                return MatchResult(None, f"{st.cls}::{st.name}", tuple(mapping.items()),
                                   f"static = {self.s.format_value(got)}, expected {self.s.format_value(want)}")
        self.best = tuple(mapping.items())
        result = self.search(searched, 0, mapping, set(mapping.values()))
        if result is not None:
            return MatchResult(dict(result))
        if self.exhausted:
            return MatchResult(None, self.best_fail, self.best, f"search ceiling of {self.limit} attempts exceeded",
                               exhausted=True)
        return MatchResult(None, self.best_fail, self.best, self.best_detail)

    def search(self, todo: list[ObjectSpec], k: int, mapping: dict[str, int], used: set[int]):
        if k == len(todo):
            bad = self.recheck(mapping) or (lambda w: ("link", w) if w else None)(self.links_ok(mapping, True))
            if bad:
                self.note(mapping, *bad)
                return None
            return mapping
        o = todo[k]
        candidates = [r.oid for r in self.s.instances(o.cls) if r.oid not in used]
        if not candidates:
            self.note(mapping, o.name, f"no unused {o.cls} object left")
        for oid in candidates:
            self.attempts += 1
            if self.attempts > self.limit:
                self.exhausted = True
                return None
            mapping[o.name] = oid
            why = self.object_ok(o, oid, mapping) or self.links_ok(mapping, final=False)
            if why is None:
                used.add(oid)
                found = self.search(todo, k + 1, mapping, used)
                if found is not None:
                    return found
                used.discard(oid)
                if self.exhausted:
                    return None
            else:
                self.note({n: v for n, v in mapping.items() if n != o.name}, o.name, why)
            del mapping[o.name]
        return None

    def note(self, mapping: Mapping[str, int], name: str, why: str) -> None:
        if self.best_fail is None or len(mapping) > len(self.best):
            self.best = tuple(mapping.items())
            self.best_fail = name
            self.best_detail = why


_PENDING = object()


def match_oracle(store: Store, oracle: ObjectDiagram, limit: int = SEARCH_LIMIT) -> MatchResult:
    """Partial match: listed slots must agree, unlisted slots are free, named objects bind rigidly."""
    return _Matcher(store, oracle, limit).run()


# -- running -----------------------------------------------------------------

def _remaining(steps, i: int) -> int:
    return sum(1 for s in steps[i + 1:] if isinstance(s, (Message, Checkpoint, TimeStamp, LocationSet))
               and not (isinstance(s, Message) and not s.is_trigger))


def run_test(m: ClassModel, t: TestCase) -> TestResult:
    """fixture -> driver with checkpoints -> interactions -> oracle OD -> oracle constraints."""
    store = instantiate(m, t.composed, t.factories)
    reasons: list[Reason] = []
    steps = t.driver.steps
    aborted = False
    for i, st in enumerate(steps):
        try:
            if isinstance(st, TimeStamp):
                store.set_time(st.time)
            elif isinstance(st, LocationSet):
                store.location = st.location
            elif isinstance(st, Checkpoint):
                out = evaluate(st.constraint, store)
                if not out.holds:
                    reasons.append(Reason("checkpoint-violated",
                                          f"{print_constraint(st.constraint)}: {out.status if out.status != 'error' else 'eval-error: ' + out.reason}",
                                          out.witness))
            elif isinstance(st, Message) and st.is_trigger:
                if st.time is not None:
                    store.set_time(st.time)
                if st.location is not None:
                    store.location = st.location
                if st.target not in store.names:
                    raise RunError("unknown-object", f"unknown object {st.target}")
                args = tuple(eval_value(store, a) for a in st.args)
                store.dispatch(DRIVER, store.ref(st.target), st.method, args)
        except RunError as err:
            left = _remaining(steps, i)
            reasons.append(Reason("run-error", f"step {i + 1}: {err.message}; {left} remaining steps not executed",
                                  (("error", err.kind),)))
            aborted = True
            break
        except RecursionError:
            reasons.append(Reason("run-error", f"step {i + 1}: call nesting too deep"))
            aborted = True
            break

    if not aborted:
        reasons.extend(verify_interactions(t.driver.messages, store, t.mode))
        if t.oracle is not None:
            res = match_oracle(store, t.oracle)
            if not res.ok:
                kind = "oracle-search-exhausted" if res.exhausted else "oracle-object-unmatched"
                partial = tuple((n, store.objects[oid].name) for n, oid in res.partial if not n.startswith("_"))
                reasons.append(Reason(kind, f"{res.unmatched}: {res.detail}", partial))
        constraints = list(t.constraints)
        invs = {inv.name: inv.constraint for inv in m.invariants}
        constraints.extend(invs[n] for n in t.invariants if n in invs)
        for c in constraints:
            out = evaluate(c, store)
            if not out.holds:
                what = out.status if out.status != "error" else "eval-error: " + out.reason
                reasons.append(Reason("oracle-constraint-violated", f"{print_constraint(c)}: {what}", out.witness))

    verdict = "pass" if not reasons else "fail"
    return TestResult(t.name, verdict, tuple(reasons), tuple(store.format_trace()), store)


def select_tests(tests: Iterable[TestCase], filter: str = "all") -> list[TestCase]:
    if filter == "all":
        return list(tests)
    if filter in ("external", "internal"):
        return [t for t in tests if t.kind == filter]
    return [t for t in tests if fnmatch.fnmatchcase(t.name, filter)]


def run_suite(m: ClassModel, tests: Iterable[TestCase], filter: str = "all") -> SuiteReport:
    """Run the selected tests in the given order, each on its own store."""
    return SuiteReport(tuple(run_test(m, t) for t in select_tests(tests, filter)))


def project_published(m: ClassModel, store: Store, trace: Optional[Sequence[InteractionEvent]] = None,
                      border_only: bool = True) -> list[tuple]:
    """Trace events on published methods, stripped of caller identity and sequence numbers.

    With ``border_only`` only events issued by the driver are kept, i.e. the
    observations made at the system border.
    """
    out = []
    for ev in (store.events() if trace is None else trace):
        if border_only and ev.caller != DRIVER:
            continue
        if is_published(m, store.objects[ev.callee_id].cls, ev.method):
            out.append((ev.time, ev.location, ev.callee, ev.method,
                        tuple(store.format_value(a) for a in ev.args), store.format_value(ev.ret)))
    return out


def is_published(m: ClassModel, cls: str, method: str) -> bool:
    return any(meth == method and m.get(c) is not None and subtype_of(m, cls, c) for c, meth in m.published)


# -- static checks -----------------------------------------------------------

def check_test(m: ClassModel, t: TestCase) -> list[tuple[str, Diagnostic]]:
    """Typecheck fixture, driver, oracle and constraints; each diagnostic tagged with its part."""
    out: list[tuple[str, Diagnostic]] = []
    try:
        fixture = t.composed
    except CompositionError as err:
        return [("fixture", error(A.NO_SPAN, "F006", str(err)))]
    objects = list(fixture.objects)
    for fod in t.factories:
        objects.extend(o if o.factory_for else ObjectSpec(o.name, o.cls, o.location, o.slots, o.cls, o.anonymous, o.span)
                       for o in fod.objects)
    whole = ObjectDiagram(fixture.name, tuple(objects), fixture.links + tuple(l for f in t.factories for l in f.links),
                          fixture.statics + tuple(s for f in t.factories for s in f.statics))
    out.extend(("fixture", d) for d in check_fixture(m, whole))
    classes = {o.name: o.cls for o in whole.objects if m.get(o.cls) is not None}
    env = {n: A.ref(c) for n, c in classes.items()}

    for msg in t.driver.messages:
        for who in (msg.source, msg.target):
            if who not in classes and who not in ("driver", "test"):
                out.append(("driver", error(msg.span, "T001", f"lifeline {who} is not a fixture object")))
        if msg.target not in classes:
            continue
        res = find_member(m, classes[msg.target], msg.method, "method")
        if res is None:
            out.append(("driver", error(msg.span, "T002", f"{classes[msg.target]} has no method {msg.method}")))
            continue
        meth = res.member
        if len(msg.args) > len(meth.params) or (msg.is_trigger and len(msg.args) != len(meth.params)):
            out.append(("driver", error(msg.span, "T002",
                                        f"{msg.target}.{msg.method} expects {len(meth.params)} arguments")))
            continue
        for p, a in zip(meth.params, msg.args):
            if isinstance(a, Wildcard):
                if msg.is_trigger:
                    out.append(("driver", error(msg.span, "T003", "wildcards are only allowed in expectations")))
                continue
            at, diags = expr_type(m, a, env)
            if at is None:
                out.extend(("driver", d) for d in diags)
            elif not conforms(m, at, p.type):
                out.append(("driver", error(A.span_of(a), "T003",
                                            f"argument {p.name} of {msg.method} expects {p.type}, got {at}")))
        if msg.returns is not None:
            rt, diags = expr_type(m, msg.returns, env)
            if rt is None:
                out.extend(("driver", d) for d in diags)
            elif meth.returns.kind == "void" or not conforms(m, rt, meth.returns):
                out.append(("driver", error(A.span_of(msg.returns), "T003",
                                            f"{msg.method} returns {meth.returns}, expectation gives {rt}")))
    for st in t.driver.steps:
        if isinstance(st, Checkpoint):
            out.extend(("driver", d) for d in typecheck_constraint(st.constraint, m, env))
    if t.oracle is not None:
        out.extend(("oracle", d) for d in check_fixture(m, t.oracle, classes))
    for c in t.constraints:
        out.extend(("test", d) for d in typecheck_constraint(c, m, env))
    inv_names = {inv.name for inv in m.invariants}
    for n in t.invariants:
        if n not in inv_names:
            out.append(("test", error(A.NO_SPAN, "T004", f"unknown invariant {n}")))
    return out


def _name_stem(name: str) -> str:
    for prefix in ("get", "is"):
        if name.startswith(prefix) and len(name) > len(prefix) and name[len(prefix)].isupper():
            name = name[len(prefix):]
            break
    return name.lower()


def lint_acceptance(t: TestCase, m: ClassModel) -> list[Diagnostic]:
    """Warnings for external tests that observe more than the published interface."""
    if t.kind != "external":
        return []
    diags: list[Diagnostic] = []
    classes = t.object_classes()
    if t.mode == "exact":
        diags.append(warning(A.NO_SPAN, "L001", f"over-specified interactions: external test {t.name} uses exact mode"))
    for msg in t.driver.messages:
        cls = classes.get(msg.target)
        if cls is None or m.get(cls) is None:
            continue
        if msg.is_trigger and not is_published(m, cls, msg.method):
            diags.append(warning(msg.span, "L002", f"driver calls unpublished method {cls}.{msg.method}"))
        if not msg.is_trigger and not is_published(m, cls, msg.method):
            diags.append(warning(msg.span, "L004",
                                 f"expectation {msg.source} -> {msg.target}.{msg.method} observes an internal interaction"))
    for c in t.constraints:
        env = dict(classes)
        if c.cls and c.var:
            env[c.var] = c.cls
        for nav in _navs(c.body):
            owner = None
            if isinstance(nav.target, A.Var):
                owner = env.get(nav.target.name)
            elif isinstance(nav.target, A.SelfRef) and c.cls and not c.var:
                owner = c.cls
            if owner is None or m.get(owner) is None:
                continue
            if find_member(m, owner, nav.name, "attribute") is None:
                continue
            stem = _name_stem(nav.name)
            query = next((meth for cls, meth in sorted(m.published)
                          if meth != nav.name and _name_stem(meth) == stem and m.get(cls) is not None
                          and subtype_of(m, owner, cls)), None)
            if query is not None:
                diags.append(warning(nav.span, "L003",
                                     f"oracle reads attribute {owner}.{nav.name} directly; use published query {query}()"))
    return diags


def _navs(e: A.Expr):
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, A.Nav):
            yield x
            stack.append(x.target)
        elif isinstance(x, A.Call):
            stack.extend([x.target, *x.args])
        elif isinstance(x, A.Binary):
            stack.extend([x.left, x.right])
        elif isinstance(x, A.Unary):
            stack.append(x.operand)
        elif isinstance(x, A.CollOp):
            stack.extend([x.target, *x.args])
        elif isinstance(x, A.Iterate):
            stack.extend([x.target, x.body])
        elif isinstance(x, A.SeqLit):
            stack.extend(x.items)
