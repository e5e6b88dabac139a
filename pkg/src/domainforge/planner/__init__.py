"""Grounding, heuristic search, and plan validation for the PDDL subset."""

from .grounding import GroundedAction, GroundedTask, GroundingExplosion, GroundLimit, ground
from .search import (
    SearchLimit,
    SolveResult,
    UNKNOWN,
    UNSOLVABLE,
    optimal_cost,
    solve,
)
from .validation import PlanCheck, UnknownOperator, validate_plan

__all__ = [
    "ground",
    "GroundedAction",
    "GroundedTask",
    "GroundingExplosion",
    "GroundLimit",
    "optimal_cost",
    "PlanCheck",
    "SearchLimit",
    "solve",
    "SolveResult",
    "UNKNOWN",
    "UNSOLVABLE",
    "UnknownOperator",
    "validate_plan",
]
