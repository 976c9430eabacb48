"""Model-based testing engine for executable class models.

Tests are fixture/driver/oracle triples written as object diagrams,
sequence diagrams and OCL constraints, executed against an in-memory
runtime with simulated time, factories and locations.
"""

from .model import ClassModel, check_model, lookup_member, subtype_of
from .ocl import EvalOutcome, evaluate, typecheck_constraint
from .runtime import Store, instantiate, run_schedule
from .testkit import TestCase, TestResult, compose_fixture, match_oracle, run_suite, run_test

__version__ = "0.1.0"

__all__ = [
    "ClassModel", "check_model", "lookup_member", "subtype_of",
    "EvalOutcome", "evaluate", "typecheck_constraint",
    "Store", "instantiate", "run_schedule",
    "TestCase", "TestResult", "compose_fixture", "match_oracle", "run_suite", "run_test",
]
