"""Textual notations: parsing and pretty-printing."""

from .parser import (
    parse_constraint, parse_expr, parse_model, parse_od, parse_refactor, parse_sd, parse_test,
)
from .printer import (
    print_constraint, print_expr, print_model, print_od, print_refactor, print_sd, print_test,
)

__all__ = [
    "parse_constraint", "parse_expr", "parse_model", "parse_od", "parse_refactor", "parse_sd",
    "parse_test", "print_constraint", "print_expr", "print_model", "print_od", "print_refactor",
    "print_sd", "print_test",
]
