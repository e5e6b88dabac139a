"""Step-by-step plan validation against a (Domain, Problem) pair."""

from __future__ import annotations

from dataclasses import dataclass

from ..pddl_core import ArityError, Domain, Literal, PddlError, Plan, Problem


class UnknownOperator(PddlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"plan step names unknown operator {name!r}")


@dataclass(frozen=True)
class PlanCheck:
    """Outcome of validate_plan: Valid or FailureAt(step, unmet literal)."""

    valid: bool
    failure_step: int | None = None  # goal failures use step index == plan length
    unmet: Literal | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


VALID = PlanCheck(True)


def _failure(step: int, unmet: Literal | None, reason: str) -> PlanCheck:
    return PlanCheck(False, step, unmet, reason)


def validate_plan(dom: Domain, prob: Problem, plan: Plan) -> PlanCheck:
    """Simulate ``plan`` from the initial state and check goal satisfaction.

    Raises UnknownOperator when a step names no schema and ArityError when a
    step's argument count differs from its schema. Type mismatches and unmet
    preconditions are reported as FailureAt, not raised.
    """
    state = set(prob.init)
    obj_types = prob.object_types
    for i, step in enumerate(plan):
        op = dom.operators_by_name.get(step.name)
        if op is None:
            raise UnknownOperator(step.name)
        if len(step.args) != op.arity:
            raise ArityError(step.name, op.arity, len(step.args))
        binding = {}
        for (var, want), arg in zip(op.params, step.args):
            got = obj_types.get(arg)
            if got is None or not dom.is_subtype(got, want):
                return _failure(i, None, f"argument {arg!r} is not a {want}")
            binding[var] = arg
        for lit in sorted(op.preconditions, key=str):
            atom = lit.atom().substitute(binding)
            holds = atom in state
            if holds != lit.positive:
                return _failure(i, lit.substitute(binding), "unmet precondition")
        adds = {l.atom().substitute(binding) for l in op.effects if l.positive}
        dels = {l.atom().substitute(binding) for l in op.effects if not l.positive}
        state = (state - dels) | adds
    for lit in sorted(prob.goal, key=str):
        holds = lit.atom() in state
        if holds != lit.positive:
            return _failure(len(plan), lit, "goal not satisfied")
    return VALID
