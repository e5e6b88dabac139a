"""Structural validation for Domain and Problem values.

Every invariant violation becomes a Diagnostic; an empty list means the value
is well-formed. Parsing guarantees most of these for file input, so the
validator mainly guards LLM-constructed or programmatically built values.
"""

from __future__ import annotations

from collections import Counter

from .errors import Diagnostic
from .types import Domain, Literal, OperatorSchema, Problem, ROOT_TYPE


def _err(message: str) -> Diagnostic:
    return Diagnostic("error", message)


def _warn(message: str) -> Diagnostic:
    return Diagnostic("warning", message)


def _check_literals(
    dom: Domain,
    op: OperatorSchema,
    literals: frozenset[Literal],
    where: str,
    out: list[Diagnostic],
) -> None:
    variables = op.variables()
    for lit in sorted(literals, key=str):
        schema = dom.predicates_by_name.get(lit.predicate)
        if schema is None:
            out.append(_err(f"operator {op.name}: {where} uses undeclared predicate {lit.predicate!r}"))
            continue
        if lit.arity != schema.arity:
            out.append(
                _err(
                    f"operator {op.name}: {where} literal {lit} has arity "
                    f"{lit.arity}, schema expects {schema.arity}"
                )
            )
        for arg in lit.args:
            if arg.startswith("?") and arg not in variables:
                out.append(_err(f"operator {op.name}: variable {arg} not in parameters"))
            if not arg.startswith("?"):
                out.append(_err(f"operator {op.name}: constant {arg!r} not supported in {where}"))


def validate_domain(dom: Domain) -> list[Diagnostic]:
    """Return all invariant violations in ``dom`` (empty list when valid)."""
    out: list[Diagnostic] = []
    if not dom.name:
        out.append(_err("domain name is empty"))

    declared = dom.declared_types()
    # Acyclicity of the single-parent type hierarchy.
    for t, _ in dom.types:
        seen: set[str] = set()
        cur: str | None = t
        while cur is not None and cur != ROOT_TYPE:
            if cur in seen:
                out.append(_err(f"type hierarchy cycle through {t!r}"))
                break
            seen.add(cur)
            cur = dom.type_parents.get(cur)

    pred_names = Counter(p.name for p in dom.predicates)
    for name, count in sorted(pred_names.items()):
        if count > 1:
            out.append(_err(f"predicate {name!r} declared {count} times"))
    for p in sorted(dom.predicates, key=lambda p: p.name):
        if not p.name:
            out.append(_err("predicate with empty name"))
        vars_seen = Counter(v for v, _ in p.params)
        for v, count in sorted(vars_seen.items()):
            if count > 1:
                out.append(_err(f"predicate {p.name!r}: duplicate parameter {v}"))
        for _, t in p.params:
            if t not in declared:
                out.append(_err(f"predicate {p.name!r}: undeclared type {t!r}"))

    op_names = Counter(o.name for o in dom.operators)
    for name, count in sorted(op_names.items()):
        if count > 1:
            out.append(_err(f"operator {name!r} declared {count} times"))
    for op in sorted(dom.operators, key=lambda o: o.name):
        vars_seen = Counter(v for v, _ in op.params)
        for v, count in sorted(vars_seen.items()):
            if count > 1:
                out.append(_err(f"operator {op.name!r}: duplicate parameter {v}"))
        for _, t in op.params:
            if t not in declared:
                out.append(_err(f"operator {op.name!r}: undeclared type {t!r}"))
        _check_literals(dom, op, op.preconditions, "precondition", out)
        _check_literals(dom, op, op.effects, "effect", out)
        if not op.effects:
            out.append(_err(f"operator {op.name!r} has no effects"))
        atoms = {l.atom() for l in op.effects}
        for atom in sorted(atoms, key=str):
            if atom in op.effects and atom.negated() in op.effects:
                out.append(_err(f"operator {op.name!r}: contradictory effect {atom}"))
    return out


def validate_problem(prob: Problem, dom: Domain) -> list[Diagnostic]:
    """Return all invariant violations in ``prob`` against ``dom``."""
    out: list[Diagnostic] = []
    if prob.domain_name != dom.name:
        out.append(_err(f"problem targets domain {prob.domain_name!r}, not {dom.name!r}"))
    declared = dom.declared_types()
    obj_names = Counter(o for o, _ in prob.objects)
    for name, count in sorted(obj_names.items()):
        if count > 1:
            out.append(_err(f"object {name!r} declared {count} times"))
    for obj, typ in prob.objects:
        if typ not in declared:
            out.append(_err(f"object {obj!r}: undeclared type {typ!r}"))

    def check_ground(lit: Literal, where: str) -> None:
        schema = dom.predicates_by_name.get(lit.predicate)
        if schema is None:
            out.append(_err(f"{where}: undeclared predicate {lit.predicate!r}"))
            return
        if lit.arity != schema.arity:
            out.append(
                _err(f"{where}: {lit} has arity {lit.arity}, schema expects {schema.arity}")
            )
            return
        for arg, (_, want) in zip(lit.args, schema.params):
            if arg.startswith("?"):
                out.append(_err(f"{where}: unbound variable {arg} in {lit}"))
                continue
            got = prob.object_types.get(arg)
            if got is None:
                out.append(_err(f"{where}: undeclared object {arg!r} in {lit}"))
            elif not dom.is_subtype(got, want):
                out.append(_err(f"{where}: object {arg!r} has type {got!r}, expected {want!r}"))

    for atom in sorted(prob.init, key=str):
        if not atom.positive:
            out.append(_err(f":init contains negative literal {atom}"))
        check_ground(atom.atom(), ":init")
    if not prob.goal:
        out.append(_err("goal is empty"))
    for lit in sorted(prob.goal, key=str):
        check_ground(lit, ":goal")
    return out
