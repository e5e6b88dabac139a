"""Canonical PDDL printing: deterministic, sorted, two-space indented.

parse(print(x)) is structurally equal to x, and equal values print
byte-identical text.
"""

from __future__ import annotations

from .types import Domain, Literal, OperatorSchema, Param, PredicateSchema, Problem


def _literal_key(lit: Literal) -> tuple:
    return (lit.predicate, lit.args, 0 if lit.positive else 1)


def _params_text(params: tuple[Param, ...]) -> str:
    return " ".join(f"{v} - {t}" for v, t in params)


def _predicate_decl(schema: PredicateSchema) -> str:
    if not schema.params:
        return f"({schema.name})"
    return f"({schema.name} {_params_text(schema.params)})"


def _block(header: str, entries: list[str]) -> list[str]:
    """Indented block ``header ... entries)`` closing on the last line."""
    if not entries:
        return [header + ")"]
    lines = [header]
    lines.extend(f"    {e}" for e in entries)
    lines[-1] += ")"
    return lines


def _condition_text(literals: frozenset[Literal]) -> str:
    ordered = sorted(literals, key=_literal_key)
    return f"(and {' '.join(str(l) for l in ordered)})" if ordered else "(and)"


def _action_text(op: OperatorSchema) -> str:
    return "\n".join(
        [
            f"  (:action {op.name}",
            f"    :parameters ({_params_text(op.params)})",
            f"    :precondition {_condition_text(op.preconditions)}",
            f"    :effect {_condition_text(op.effects)})",
        ]
    )


def print_domain(dom: Domain) -> str:
    """Render ``dom`` in canonical form (sorted declarations, lowercase)."""
    lines = [f"(define (domain {dom.name})"]
    lines.append("  (:requirements :strips :typing :negative-preconditions)")
    if dom.types:
        lines.extend(_block("  (:types", [f"{t} - {p}" for t, p in sorted(dom.types)]))
    decls = [_predicate_decl(p) for p in sorted(dom.predicates, key=lambda p: p.name)]
    lines.extend(_block("  (:predicates", decls))
    for op in sorted(dom.operators, key=lambda o: o.name):
        lines.append(_action_text(op))
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def print_problem(prob: Problem) -> str:
    """Render ``prob`` in canonical form."""
    lines = [f"(define (problem {prob.name})"]
    lines.append(f"  (:domain {prob.domain_name})")
    lines.extend(_block("  (:objects", [f"{o} - {t}" for o, t in prob.objects]))
    lines.extend(_block("  (:init", [str(a) for a in sorted(prob.init, key=_literal_key)]))
    lines.append(f"  (:goal {_condition_text(prob.goal)}))")
    return "\n".join(lines) + "\n"
