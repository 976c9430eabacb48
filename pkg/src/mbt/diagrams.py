"""Object diagrams, sequence diagrams and test sources as parsed from text."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .ast import Constraint, Expr
from .diagnostics import NO_SPAN, Span

DRIVER_NAMES = ("driver", "test")


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    cls: str
    location: Optional[str] = None
    slots: tuple[tuple[str, Expr], ...] = ()
    factory_for: Optional[str] = None  # set: a template consumed by factory calls for that class
    anonymous: bool = False
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    def slot(self, name: str) -> Optional[Expr]:
        return next((v for n, v in self.slots if n == name), None)


@dataclass(frozen=True)
class LinkSpec:
    assoc: str
    source: str
    target: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class StaticSpec:
    cls: str
    name: str
    location: Optional[str]
    value: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ObjectDiagram:
    name: str = "od"
    objects: tuple[ObjectSpec, ...] = ()
    links: tuple[LinkSpec, ...] = ()
    statics: tuple[StaticSpec, ...] = ()

    def get(self, name: str) -> Optional[ObjectSpec]:
        return next((o for o in self.objects if o.name == name), None)

    @property
    def factory_objects(self) -> list[ObjectSpec]:
        return [o for o in self.objects if o.factory_for is not None]


@dataclass(frozen=True)
class Wildcard:
    """Unconstrained argument position in an expected message."""

    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Message:
    source: str
    target: str
    method: str
    args: tuple[Union[Expr, Wildcard], ...] = ()
    returns: Optional[Expr] = None
    time: Optional[int] = None
    location: Optional[str] = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def is_trigger(self) -> bool:
        return self.source in DRIVER_NAMES


@dataclass(frozen=True)
class Checkpoint:
    constraint: Constraint
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class TimeStamp:
    time: int
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class LocationSet:
    location: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


Step = Union[Message, Checkpoint, TimeStamp, LocationSet]


@dataclass(frozen=True)
class SequenceDiagram:
    name: str = "sd"
    lifelines: tuple[str, ...] = ()
    steps: tuple[Step, ...] = ()

    @property
    def messages(self) -> list[Message]:
        return [s for s in self.steps if isinstance(s, Message)]

    @property
    def triggers(self) -> list[Message]:
        return [m for m in self.messages if m.is_trigger]

    @property
    def expectations(self) -> list[Message]:
        return [m for m in self.messages if not m.is_trigger]


@dataclass(frozen=True)
class TestSource:
    """A parsed ``.test`` unit; fixture/driver/oracle are still file references."""

    __test__ = False

    name: str
    kind: str = "internal"  # internal | external
    fixture: tuple[str, ...] = ()
    factories: tuple[str, ...] = ()
    driver: Union[str, SequenceDiagram, None] = None  # file name or an inline single-call driver
    oracle: Optional[str] = None
    constraints: tuple[Constraint, ...] = ()
    mode: str = "subsequence"
    span: Span = field(default=NO_SPAN, compare=False, repr=False)
    invariants: tuple[str, ...] = ()  # names of model invariants used as oracle constraints

    @property
    def references(self) -> list[str]:
        refs = list(self.fixture) + list(self.factories)
        if isinstance(self.driver, str):
            refs.append(self.driver)
        if self.oracle:
            refs.append(self.oracle)
        return refs
