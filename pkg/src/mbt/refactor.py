"""Pull-up transformations with context conditions, and invariance checks over external tests."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .ast import flatten_block
from .diagnostics import NO_SPAN, Diagnostic, Span
from .model import ClassDef, ClassModel, MemberNotFound, check_model
from .testkit import SuiteReport, TestCase, check_test, project_published, run_suite

KINDS = ("pull-up-attribute", "pull-up-method-override", "pull-up-signature", "drop-statement")


class RefactorError(Exception):
    """Unknown class/member, or applying a transformation whose conditions fail."""


@dataclass(frozen=True)
class Transformation:
    kind: str
    cls: str
    member: str
    index: Optional[int] = None  # drop-statement only, 1-based
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    def describe(self) -> str:
        text = f"{self.kind} {self.cls}.{self.member}"
        return text if self.index is None else f"{text} {self.index}"


def target_class(m: ClassModel, t: Transformation) -> Optional[str]:
    """The superclass a pull-up moves into (None for drop-statement)."""
    if t.kind == "drop-statement":
        return None
    return m.cls(t.cls).superclass


def _descendants(m: ClassModel, name: str) -> list[ClassDef]:
    out, todo = [], [name]
    while todo:
        for c in m.subclasses(todo.pop(0)):
            out.append(c)
            todo.append(c.name)
    return out


def _require_member(c: ClassDef, t: Transformation):
    found = c.attribute(t.member) if t.kind == "pull-up-attribute" else c.method(t.member)
    if found is None:
        raise MemberNotFound(c.name, t.member)
    return found


def check_conditions(m: ClassModel, t: Transformation) -> list[str]:
    """Context conditions of ``t`` on ``m``; an empty list means applicable."""
    if t.kind not in KINDS:
        raise RefactorError(f"unknown transformation {t.kind}")
    c = m.cls(t.cls)
    member = _require_member(c, t)
    if t.kind == "drop-statement":
        if member.body is None or not 1 <= (t.index or 0) <= len(member.body):
            return [f"{t.cls}.{t.member} has no statement {t.index}"]
        return []
    if c.superclass is None or m.get(c.superclass) is None:
        return [f"{t.cls} has no superclass"]
    sup = m.cls(c.superclass)
    others = [d for d in _descendants(m, sup.name) if d.name != c.name]
    failures: list[str] = []
    if t.kind == "pull-up-attribute":
        if sup.attribute(t.member) is not None:
            failures.append(f"superclass {sup.name} already declares attribute {t.member}")
        for d in others:
            if d.attribute(t.member) is not None:
                failures.append(f"{d.name} already declares attribute {t.member}")
        return failures

    if sup.method(t.member) is not None:
        failures.append(f"superclass {sup.name} already declares method {t.member}")
    for d in others:
        theirs = d.method(t.member)
        if theirs is not None and theirs.signature != member.signature:
            failures.append(f"{d.name}.{t.member} has a different signature")
    if failures:
        return failures
    if t.kind == "pull-up-method-override":
        # the moved body must make sense with the superclass as its self type
        new_errors = _new_errors(m, _apply_unchecked(m, t))
        failures.extend(f"body of {t.member} is not valid in {sup.name}: {d.message}" for d in new_errors)
    return failures


def _new_errors(before: ClassModel, after: ClassModel) -> list[Diagnostic]:
    old = {(d.code, d.message) for d in check_model(before) if d.is_error}
    return [d for d in check_model(after) if d.is_error and (d.code, d.message) not in old]


def apply(m: ClassModel, t: Transformation) -> ClassModel:
    """Return the transformed model; ``m`` itself is never modified."""
    failures = check_conditions(m, t)
    if failures:
        raise RefactorError("; ".join(failures))
    return _apply_unchecked(m, t)


def _apply_unchecked(m: ClassModel, t: Transformation) -> ClassModel:
    c = m.cls(t.cls)
    if t.kind == "drop-statement":
        meth = c.method(t.member)
        body = meth.body[:t.index - 1] + meth.body[t.index:]
        return m.replace_class(replace(c, methods=tuple(replace(x, body=body) if x is meth else x
                                                           for x in c.methods)))
    sup = m.cls(c.superclass)
    if t.kind == "pull-up-attribute":
        attr = c.attribute(t.member)
        m = m.replace_class(replace(c, attributes=tuple(a for a in c.attributes if a is not attr)))
        return m.replace_class(replace(sup, attributes=sup.attributes + (attr,)))

    meth = c.method(t.member)
    if t.kind == "pull-up-signature":
        return m.replace_class(replace(sup, methods=sup.methods + (replace(meth, body=None),)))

    body = flatten_block(meth.body) if meth.body is not None else None
    for sib in m.subclasses(sup.name):
        theirs = sib.method(t.member)
        if theirs is None:
            continue
        same = theirs.signature == meth.signature and (
            (theirs.body is None and body is None)
            or (theirs.body is not None and body is not None and flatten_block(theirs.body) == body))
        if sib.name == c.name or same:
            m = m.replace_class(replace(sib, methods=tuple(x for x in sib.methods if x.name != t.member)))
    sup = m.cls(sup.name)
    return m.replace_class(replace(sup, methods=sup.methods + (meth,)))


# -- invariance ----------------------------------------------------------------

@dataclass(frozen=True)
class InvarianceResult:
    invariant: bool
    changed: tuple[tuple[str, str, str], ...]  # (test, verdict before, verdict after)
    before: SuiteReport
    after: SuiteReport
    diagnostics: tuple[tuple[str, Diagnostic], ...] = ()  # internal tests broken by the change
    warnings: tuple[str, ...] = ()


def verify_invariance(m: ClassModel, m2: ClassModel, external: Sequence[TestCase],
                      internal: Sequence[TestCase] = (), strict: bool = False) -> InvarianceResult:
    """Run the same external suite on both models and compare per-test verdicts."""
    before = run_suite(m, external)
    after = run_suite(m2, external)
    changed = []
    for b, a in zip(before.results, after.results):
        if b.verdict != a.verdict:
            changed.append((b.name, b.verdict, a.verdict))
        elif strict and project_published(m, b.store) != project_published(m2, a.store):
            changed.append((b.name, b.verdict + " (trace)", a.verdict + " (trace)"))
    warnings = () if external else ("no observations: the external suite is empty",)
    diags = []
    for t in internal:
        diags.extend((t.name, d) for _, d in check_test(m2, t) if d.is_error)
    return InvarianceResult(not changed, tuple(changed), before, after, tuple(diags), warnings)


@dataclass(frozen=True)
class StepResult:
    step: Transformation
    applied: bool
    failures: tuple[str, ...] = ()


@dataclass(frozen=True)
class RefactorReport:
    steps: tuple[StepResult, ...]
    model: Optional[ClassModel]  # the transformed model when every step applied
    invariance: Optional[InvarianceResult] = None

    @property
    def applied(self) -> bool:
        return self.model is not None

    @property
    def exit_code(self) -> int:
        if not self.applied:
            return 3
        if self.invariance is not None and not self.invariance.invariant:
            return 4
        return 0

    def text(self) -> str:
        lines = []
        for k, r in enumerate(self.steps, start=1):
            lines.append(f"STEP {k} {'APPLIED' if r.applied else 'REJECTED'} {r.step.describe()}")
            lines.extend(f"  condition failed: {f}" for f in r.failures)
        inv = self.invariance
        if inv is not None:
            lines.append(f"INVARIANCE {'invariant' if inv.invariant else 'broken'}")
            lines.extend(f"  CHANGED {name} {b} -> {a}" for name, b, a in inv.changed)
            lines.extend(f"  warning: {w}" for w in inv.warnings)
            lines.extend(f"  internal {name}: {d.severity}[{d.code}]: {d.message}" for name, d in inv.diagnostics)
        return "\n".join(lines) + "\n"


def run_script(m: ClassModel, steps: Sequence[Transformation], external: Sequence[TestCase] = (),
               internal: Sequence[TestCase] = (), verify: bool = True, strict: bool = False) -> RefactorReport:
    """Apply steps in order, stopping at the first rejection; optionally verify invariance."""
    results: list[StepResult] = []
    current = m
    for t in steps:
        try:
            failures = check_conditions(current, t)
        except LookupError as err:
            failures = [str(err)]
        if failures:
            results.append(StepResult(t, False, tuple(failures)))
            return RefactorReport(tuple(results), None)
        nxt = _apply_unchecked(current, t)
        broken = _new_errors(current, nxt)
        if broken:
            results.append(StepResult(t, False, tuple(f"result is ill-formed: {d.message}" for d in broken)))
            return RefactorReport(tuple(results), None)
        current = nxt
        results.append(StepResult(t, True))
    inv = verify_invariance(m, current, external, internal, strict) if verify else None
    return RefactorReport(tuple(results), current, inv)


__all__ = [
    "Transformation", "RefactorError", "check_conditions", "apply", "target_class", "verify_invariance",
    "InvarianceResult", "RefactorReport", "StepResult", "run_script",
]
