"""Class models: domain types, well-formedness checking and inheritance lookup."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .ast import BUILTIN_TYPES, Constraint, Stmt, Type
from .diagnostics import NO_SPAN, Diagnostic, Span, error


@dataclass(frozen=True)
class Attribute:
    name: str
    type: Type
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Param:
    name: str
    type: Type


@dataclass(frozen=True)
class MethodDef:
    name: str
    params: tuple[Param, ...]
    returns: Type
    body: Optional[tuple[Stmt, ...]]  # None marks an abstract method
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def is_abstract(self) -> bool:
        return self.body is None

    @property
    def signature(self) -> tuple:
        return (self.name, tuple(p.type for p in self.params), self.returns)


@dataclass(frozen=True)
class ClassDef:
    name: str
    superclass: Optional[str] = None
    attributes: tuple[Attribute, ...] = ()
    statics: tuple[Attribute, ...] = ()
    methods: tuple[MethodDef, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    def attribute(self, name: str) -> Optional[Attribute]:
        return next((a for a in self.attributes if a.name == name), None)

    def static(self, name: str) -> Optional[Attribute]:
        return next((a for a in self.statics if a.name == name), None)

    def method(self, name: str) -> Optional[MethodDef]:
        return next((m for m in self.methods if m.name == name), None)


@dataclass(frozen=True)
class Association:
    """Directed link type ``name: source -> target``; ``many`` navigates to a sequence."""

    name: str
    source: str
    target: str
    many: bool = True
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Invariant:
    name: str
    constraint: Constraint
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ClassModel:
    name: str = "model"
    classes: tuple[ClassDef, ...] = ()
    associations: tuple[Association, ...] = ()
    invariants: tuple[Invariant, ...] = ()
    published: frozenset[tuple[str, str]] = frozenset()

    def get(self, name: str) -> Optional[ClassDef]:
        for c in self.classes:
            if c.name == name:
                return c
        return None

    def cls(self, name: str) -> ClassDef:
        c = self.get(name)
        if c is None:
            raise UnknownClass(name)
        return c

    def association(self, name: str) -> Optional[Association]:
        return next((a for a in self.associations if a.name == name), None)

    def ancestors(self, name: str) -> Iterator[ClassDef]:
        """Yield the class and its superclasses bottom-up (cycle-safe)."""
        seen = set()
        c = self.get(name)
        while c is not None and c.name not in seen:
            seen.add(c.name)
            yield c
            c = self.get(c.superclass) if c.superclass else None

    def subclasses(self, name: str) -> list[ClassDef]:
        return [c for c in self.classes if c.superclass == name]

    def replace_class(self, new: ClassDef) -> "ClassModel":
        classes = tuple(new if c.name == new.name else c for c in self.classes)
        return ClassModel(self.name, classes, self.associations, self.invariants, self.published)


class UnknownClass(LookupError):
    def __init__(self, name: str):
        super().__init__(f"unknown class {name}")
        self.name = name


class MemberNotFound(LookupError):
    def __init__(self, cls: str, member: str):
        super().__init__(f"class {cls} has no member {member}")
        self.cls = cls
        self.member = member


@dataclass(frozen=True)
class MemberResolution:
    defining_class: str
    member: Union[Attribute, MethodDef]
    kind: str  # "attribute" | "method" | "static"


def lookup_member(m: ClassModel, cls: str, member: str) -> MemberResolution:
    """Resolve an attribute, method or static by walking the inheritance chain bottom-up."""
    m.cls(cls)
    for c in m.ancestors(cls):
        a = c.attribute(member)
        if a is not None:
            return MemberResolution(c.name, a, "attribute")
        meth = c.method(member)
        if meth is not None:
            return MemberResolution(c.name, meth, "method")
        s = c.static(member)
        if s is not None:
            return MemberResolution(c.name, s, "static")
    raise MemberNotFound(cls, member)


def find_member(m: ClassModel, cls: str, member: str, kind: str) -> Optional[MemberResolution]:
    for c in m.ancestors(cls):
        found = {"attribute": c.attribute, "method": c.method, "static": c.static}[kind](member)
        if found is not None:
            return MemberResolution(c.name, found, kind)
    return None


def subtype_of(m: ClassModel, a: str, b: str) -> bool:
    m.cls(a)
    m.cls(b)
    return any(c.name == b for c in m.ancestors(a))


def all_attributes(m: ClassModel, cls: str) -> list[Attribute]:
    """Attributes visible on ``cls``, superclass attributes first."""
    chain = list(m.ancestors(cls))
    out: list[Attribute] = []
    for c in reversed(chain):
        out.extend(c.attributes)
    return out


def type_exists(m: ClassModel, t: Type) -> bool:
    if t.kind == "ref":
        return m.get(t.name) is not None
    if t.kind == "seq":
        return t.elem is not None and t.elem.kind != "seq" and type_exists(m, t.elem)
    return t.kind in BUILTIN_TYPES or t.kind == "void"


def _has_cycle(m: ClassModel, name: str) -> bool:
    seen = set()
    c = m.get(name)
    while c is not None:
        if c.name in seen:
            return True
        seen.add(c.name)
        c = m.get(c.superclass) if c.superclass else None
    return False


def check_model(m: ClassModel) -> list[Diagnostic]:
    """All well-formedness violations, ordered by class name then member name."""
    from .typecheck import check_method_body, check_invariant

    found: list[tuple[str, str, Diagnostic]] = []

    def report(cls: str, member: str, span: Span, code: str, msg: str) -> None:
        found.append((cls, member, error(span, code, msg)))

    names: dict[str, ClassDef] = {}
    for c in m.classes:
        if c.name in names:
            report(c.name, "", c.span, "M005", f"duplicate class {c.name}")
        names.setdefault(c.name, c)
        if c.name in BUILTIN_TYPES:
            report(c.name, "", c.span, "M005", f"class name {c.name} clashes with a builtin type")

    cyclic = set()
    for c in m.classes:
        if c.superclass is not None and m.get(c.superclass) is None:
            report(c.name, "", c.span, "M010", f"unknown superclass {c.superclass} of {c.name}")
        elif _has_cycle(m, c.name):
            cyclic.add(c.name)
    if cyclic:
        first = min(cyclic)
        report(first, "", m.cls(first).span, "M001", "inheritance cycle through " + ", ".join(sorted(cyclic)))

    for c in m.classes:
        seen_attr: set[str] = set()
        for a in c.attributes + c.statics:
            if a.name in seen_attr:
                report(c.name, a.name, a.span, "M006", f"duplicate attribute {c.name}.{a.name}")
            seen_attr.add(a.name)
            if not type_exists(m, a.type):
                report(c.name, a.name, a.span, "M004", f"unknown type {a.type} for {c.name}.{a.name}")
        seen_meth: set[str] = set()
        for meth in c.methods:
            if meth.name in seen_meth:
                report(c.name, meth.name, meth.span, "M007", f"duplicate method {c.name}.{meth.name}")
            if meth.name in seen_attr:
                report(c.name, meth.name, meth.span, "M007", f"method {c.name}.{meth.name} clashes with an attribute")
            seen_meth.add(meth.name)
            for t in [p.type for p in meth.params] + ([meth.returns] if meth.returns.kind != "void" else []):
                if not type_exists(m, t):
                    report(c.name, meth.name, meth.span, "M004", f"unknown type {t} in signature of {c.name}.{meth.name}")
        if c.name in cyclic or not c.superclass or m.get(c.superclass) is None:
            continue
        inherited = list(m.ancestors(c.superclass))
        for a in c.attributes + c.statics:
            for sup in inherited:
                if sup.attribute(a.name) is not None or sup.static(a.name) is not None:
                    report(c.name, a.name, a.span, "M002",
                           f"attribute shadowing: {c.name}.{a.name} hides {sup.name}.{a.name}")
                    break
        for meth in c.methods:
            for sup in inherited:
                base = sup.method(meth.name)
                if base is not None:
                    if base.signature != meth.signature:
                        report(c.name, meth.name, meth.span, "M003",
                               f"override {c.name}.{meth.name} does not match the signature of {sup.name}.{meth.name}")
                    break

    for a in m.associations:
        for end in (a.source, a.target):
            if m.get(end) is None:
                report(a.source, a.name, a.span, "M004", f"unknown class {end} in association {a.name}")
        if m.get(a.source) is not None and not cyclic:
            for c in m.ancestors(a.source):
                if c.attribute(a.name) is not None or c.method(a.name) is not None:
                    report(a.source, a.name, a.span, "M013",
                           f"association {a.name} clashes with member {c.name}.{a.name}")
                    break
    assoc_names: set[str] = set()
    for a in m.associations:
        if a.name in assoc_names:
            report(a.source, a.name, a.span, "M013", f"duplicate association {a.name}")
        assoc_names.add(a.name)

    for cls, meth in sorted(m.published):
        c = m.get(cls)
        res = find_member(m, cls, meth, "method") if c is not None and cls not in cyclic else None
        if res is None:
            report(cls, meth, NO_SPAN, "M012", f"published member {cls}.{meth} does not resolve to a method")

    if not cyclic and not any(d.code in ("M004", "M005", "M010") for _, _, d in found):
        for c in m.classes:
            for meth in c.methods:
                for d in check_method_body(m, c, meth):
                    found.append((c.name, meth.name, d))
        for inv in m.invariants:
            for d in check_invariant(m, inv.constraint):
                found.append(("", inv.name, d))

    found.sort(key=lambda t: (t[0], t[1], t[2].span.line, t[2].span.column, t[2].code, t[2].message))
    return [d for _, _, d in found]
