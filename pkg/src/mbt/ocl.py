"""Evaluation of OCL-subset constraints against a store.

Evaluation is two-valued: a constraint either holds, is violated (with a
witness), or fails with an explicit evaluation error. The store is never
modified; query-method calls run in a read-only mode that records no trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Optional

from . import ast as A
from .ast import Constraint
from .diagnostics import NO_SPAN, Span
from .dsl.printer import print_expr
from .runtime import Interpreter, Ref, RunError, Store
from .typecheck import typecheck_constraint

__all__ = ["Constraint", "EvalOutcome", "evaluate", "typecheck_constraint", "fixture_env"]


@dataclass(frozen=True)
class EvalOutcome:
    status: str  # holds | violated | error
    witness: tuple[tuple[str, str], ...] = ()
    reason: str = ""
    where: Span = NO_SPAN

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    def describe(self) -> str:
        if self.status == "holds":
            return "holds"
        if self.status == "error":
            return f"eval-error: {self.reason}"
        return "violated: " + ", ".join(f"{k}={v}" for k, v in self.witness)


HOLDS = EvalOutcome("holds")


def fixture_env(store: Store) -> dict[str, Any]:
    """Bindings for every named object in the store (fixture and factory names)."""
    return {name: Ref(oid) for name, oid in store.names.items()}


def evaluate(c: Constraint, store: Store, env: Optional[Mapping[str, Any]] = None) -> EvalOutcome:
    """Evaluate ``c``; class contexts quantify over live objects in creation order."""
    frame = dict(fixture_env(store) if env is None else env)
    saved_location = store.location
    store.enter_query()
    try:
        if c.location is not None:
            store.location = c.location
        if c.cls is None:
            return _check(store, c, frame, None, ())
        for r in store.instances(c.cls, c.location):
            if c.var is None:
                binding: tuple[tuple[str, str], ...] = (("self", store.format_value(r)),)
                outcome = _check(store, c, frame, r, binding)
            else:
                frame[c.var] = r
                outcome = _check(store, c, frame, None, ((c.var, store.format_value(r)),))
            if not outcome.holds:
                return outcome
        return HOLDS
    finally:
        store.exit_query()
        store.location = saved_location


def _check(store: Store, c: Constraint, frame: dict, self_ref: Optional[Ref],
           binding: tuple[tuple[str, str], ...]) -> EvalOutcome:
    interp = Interpreter(store, self_ref, frame)
    try:
        if interp.eval(c.body):
            return HOLDS
        return EvalOutcome("violated", binding + tuple(_explain(interp, c.body)))
    except RunError as err:
        return EvalOutcome("error", binding, err.message, c.span)
    except RecursionError:
        return EvalOutcome("error", binding, "evaluation too deep", c.span)


def _explain(interp: Interpreter, e: A.Expr) -> list[tuple[str, str]]:
    """Name the sub-terms responsible for ``e`` being false."""
    fmt = interp.s.format_value
    if isinstance(e, A.Binary):
        if e.op == "and":
            first_false = e.left if not interp.eval(e.left) else e.right
            return _explain(interp, first_false)
        if e.op == "implies":
            return _explain(interp, e.right)
        if e.op == "or":
            return _explain(interp, e.left) + _explain(interp, e.right)
        if e.op in ("=", "<>", "<", "<="):
            out = []
            for side in (e.left, e.right):
                if not isinstance(side, A.Lit):
                    out.append((print_expr(side), fmt(interp.eval(side))))
            return out
    if isinstance(e, A.Iterate) and e.op == "forAll":
        items = interp.eval(e.target)
        saved = interp.frame.get(e.var, _MISSING)
        try:
            for x in items:
                interp.frame[e.var] = x
                if not interp.eval(e.body):
                    return [(e.var, fmt(x))] + _explain(interp, e.body)
        finally:
            if saved is _MISSING:
                interp.frame.pop(e.var, None)
            else:
                interp.frame[e.var] = saved
    return []


_MISSING = object()
