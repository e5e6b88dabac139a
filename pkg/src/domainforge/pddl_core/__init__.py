"""PDDL 1.0 subset (STRIPS + :typing + :negative-preconditions): AST, parser, printer, validator."""

from .errors import (
    ArityError,
    Diagnostic,
    DomainMismatch,
    PddlError,
    PddlSyntaxError,
    UndeclaredSymbol,
    UnsupportedFeature,
)
from .parser import parse_domain, parse_problem
from .printer import print_domain, print_problem
from .types import Domain, Literal, OperatorSchema, Plan, PlanStep, PredicateSchema, Problem
from .validator import validate_domain, validate_problem

__all__ = [
    "ArityError",
    "Diagnostic",
    "Domain",
    "DomainMismatch",
    "Literal",
    "OperatorSchema",
    "parse_domain",
    "parse_problem",
    "PddlError",
    "PddlSyntaxError",
    "Plan",
    "PlanStep",
    "PredicateSchema",
    "print_domain",
    "print_problem",
    "Problem",
    "UndeclaredSymbol",
    "UnsupportedFeature",
    "validate_domain",
    "validate_problem",
]
