"""Recursive-descent parser for the supported PDDL subset.

Two-phase design: a tokenizer/s-expression reader that tracks line and column,
followed by interpretation of the generic tree into Domain/Problem values.
Identifiers are lowercased; untyped parameters and objects default to type
``object``. Arity and declaration errors raise immediately; structural
invariants (contradictory effects, empty goals, ...) are left to the validator
so that malformed-but-grammatical input can still be inspected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    ArityError,
    DomainMismatch,
    PddlSyntaxError,
    UndeclaredSymbol,
    UnsupportedFeature,
)
from .types import Domain, Literal, OperatorSchema, Param, PredicateSchema, Problem, ROOT_TYPE

SUPPORTED_REQUIREMENTS = {":strips", ":typing", ":negative-preconditions"}

_ID_RE = re.compile(r"[a-zA-Z0-9_\-=.]+")


@dataclass(frozen=True)
class _Atom:
    text: str
    line: int
    col: int


class _Node(list):
    """An s-expression list node; carries the position of its opening paren."""

    def __init__(self, line: int, col: int):
        super().__init__()
        self.line = line
        self.col = col


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield (ch, ch, line, col)
            col += 1
            i += 1
            continue
        if ch in "?:":
            m = _ID_RE.match(text, i + 1)
            if not m:
                raise PddlSyntaxError(f"dangling {ch!r}", line, col, "identifier")
            tok = ch + m.group(0)
            yield ("id", tok.lower(), line, col)
            col += len(tok)
            i = m.end()
            continue
        m = _ID_RE.match(text, i)
        if m:
            tok = m.group(0)
            yield ("id", tok.lower(), line, col)
            col += len(tok)
            i = m.end()
            continue
        raise PddlSyntaxError(f"unexpected character {ch!r}", line, col)


def _read_sexpr(text: str) -> _Node:
    """Read the single top-level s-expression of a PDDL file."""
    stack: list[_Node] = []
    top: _Node | None = None
    last_line, last_col = 1, 1
    for kind, value, line, col in _tokenize(text):
        last_line, last_col = line, col
        if kind == "(":
            node = _Node(line, col)
            if stack:
                stack[-1].append(node)
            stack.append(node)
        elif kind == ")":
            if not stack:
                raise PddlSyntaxError("unbalanced ')'", line, col)
            node = stack.pop()
            if not stack:
                if top is not None:
                    raise PddlSyntaxError("multiple top-level expressions", line, col)
                top = node
        else:
            if not stack:
                raise PddlSyntaxError(f"token {value!r} outside parentheses", line, col)
            stack[-1].append(_Atom(value, line, col))
    if stack:
        raise PddlSyntaxError("unbalanced '('", stack[-1].line, stack[-1].col, "')'")
    if top is None:
        raise PddlSyntaxError("empty input", last_line, last_col, "'(define ...)'")
    return top


def _expect_atom(item, what: str) -> _Atom:
    if not isinstance(item, _Atom):
        pos = (item.line, item.col) if isinstance(item, _Node) else (0, 0)
        raise PddlSyntaxError(f"expected {what}", *pos, expected=what)
    return item


def _parse_typed_list(items: list, what: str) -> list[tuple[str, str, int, int]]:
    """Parse ``a b - t c`` style lists; untyped entries default to ``object``.

    Returns (name, type, line, col) tuples in declaration order.
    """
    out: list[tuple[str, str, int, int]] = []
    pending: list[_Atom] = []
    i = 0
    while i < len(items):
        atom = _expect_atom(items[i], what)
        if atom.text == "-":
            if not pending:
                raise PddlSyntaxError("type separator without names", atom.line, atom.col)
            if i + 1 >= len(items):
                raise PddlSyntaxError("missing type after '-'", atom.line, atom.col, "type name")
            typ = _expect_atom(items[i + 1], "type name")
            out.extend((p.text, typ.text, p.line, p.col) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(atom)
        i += 1
    out.extend((p.text, ROOT_TYPE, p.line, p.col) for p in pending)
    return out


def _parse_literal(node, preds: dict[str, PredicateSchema], where: str) -> Literal:
    if not isinstance(node, _Node) or not node:
        pos = (node.line, node.col) if isinstance(node, _Node) else (0, 0)
        raise PddlSyntaxError(f"expected literal in {where}", *pos, expected="(predicate ...)")
    head = _expect_atom(node[0], "predicate name")
    if head.text == "not":
        if len(node) != 2:
            raise PddlSyntaxError("'not' takes exactly one literal", node.line, node.col)
        return _parse_literal(node[1], preds, where).negated()
    args = [_expect_atom(a, "term").text for a in node[1:]]
    schema = preds.get(head.text)
    if schema is None:
        raise UndeclaredSymbol(head.text, head.line, head.col)
    if len(args) != schema.arity:
        raise ArityError(head.text, schema.arity, len(args), head.line, head.col)
    return Literal(head.text, tuple(args))


def _parse_condition(node, preds: dict[str, PredicateSchema], where: str) -> frozenset[Literal]:
    """A condition is ``()``, a single literal, or ``(and literal*)``."""
    if not isinstance(node, _Node):
        raise PddlSyntaxError(f"expected condition in {where}", 0, 0)
    if not node:
        return frozenset()
    head = node[0]
    if isinstance(head, _Atom) and head.text == "and":
        return frozenset(_parse_literal(child, preds, where) for child in node[1:])
    return frozenset({_parse_literal(node, preds, where)})


def _check_requirements(node: _Node) -> None:
    for item in node[1:]:
        flag = _expect_atom(item, "requirement flag")
        if flag.text not in SUPPORTED_REQUIREMENTS:
            raise UnsupportedFeature(flag.text, flag.line, flag.col)


def parse_domain(text: str) -> Domain:
    """Parse PDDL domain text into a Domain value.

    Raises PddlSyntaxError, UnsupportedFeature, ArityError or UndeclaredSymbol.
    """
    root = _read_sexpr(text)
    if not root or _expect_atom(root[0], "'define'").text != "define":
        raise PddlSyntaxError("not a define form", root.line, root.col, "'define'")
    if len(root) < 2 or not isinstance(root[1], _Node) or len(root[1]) != 2:
        raise PddlSyntaxError("expected (domain <name>)", root.line, root.col)
    kind, name = root[1]
    if _expect_atom(kind, "'domain'").text != "domain":
        raise PddlSyntaxError("expected (domain <name>)", root[1].line, root[1].col)
    domain_name = _expect_atom(name, "domain name").text

    types: list[tuple[str, str]] = []
    predicates: dict[str, PredicateSchema] = {}
    pred_order: list[PredicateSchema] = []
    actions: list[_Node] = []

    # First sweep: sections that declare symbols; actions interpreted afterwards
    # so declaration order in the file does not matter.
    for section in root[2:]:
        if not isinstance(section, _Node) or not section:
            raise PddlSyntaxError("expected a (:section ...)", root.line, root.col)
        head = _expect_atom(section[0], "section keyword")
        if head.text == ":requirements":
            _check_requirements(section)
        elif head.text == ":types":
            for t, parent, _, _ in _parse_typed_list(section[1:], "type name"):
                if t != ROOT_TYPE:
                    types.append((t, parent))
        elif head.text == ":predicates":
            for decl in section[1:]:
                if not isinstance(decl, _Node) or not decl:
                    raise PddlSyntaxError(
                        "expected (name ?v - type ...)", section.line, section.col
                    )
                pname = _expect_atom(decl[0], "predicate name")
                params = tuple(
                    (v, t) for v, t, _, _ in _parse_typed_list(decl[1:], "parameter")
                )
                schema = PredicateSchema(pname.text, params)
                if schema.name not in predicates:
                    predicates[schema.name] = schema
                pred_order.append(schema)
        elif head.text == ":action":
            actions.append(section)
        else:
            raise UnsupportedFeature(head.text, head.line, head.col)

    operators = []
    for section in actions:
        operators.append(_parse_action(section, predicates))

    return Domain(
        name=domain_name,
        types=tuple(types),
        predicates=frozenset(pred_order),
        operators=frozenset(operators),
    )


def _parse_action(section: _Node, preds: dict[str, PredicateSchema]) -> OperatorSchema:
    if len(section) < 2:
        raise PddlSyntaxError("action missing name", section.line, section.col)
    name = _expect_atom(section[1], "action name")
    params: tuple[Param, ...] = ()
    pre: frozenset[Literal] = frozenset()
    eff: frozenset[Literal] = frozenset()
    i = 2
    while i < len(section):
        key = _expect_atom(section[i], "action keyword")
        if i + 1 >= len(section):
            raise PddlSyntaxError(f"missing value for {key.text}", key.line, key.col)
        value = section[i + 1]
        if key.text == ":parameters":
            if not isinstance(value, _Node):
                raise PddlSyntaxError("expected parameter list", key.line, key.col)
            params = tuple((v, t) for v, t, _, _ in _parse_typed_list(list(value), "parameter"))
        elif key.text == ":precondition":
            pre = _parse_condition(value, preds, f"precondition of {name.text}")
        elif key.text == ":effect":
            eff = _parse_condition(value, preds, f"effect of {name.text}")
        else:
            raise UnsupportedFeature(key.text, key.line, key.col)
        i += 2
    return OperatorSchema(name.text, params, pre, eff)


def parse_problem(text: str, dom: Domain) -> Problem:
    """Parse PDDL problem text and type-check it against ``dom``.

    Raises DomainMismatch when the problem names a different domain, and the
    same errors as parse_domain for undeclared symbols or arity violations.
    """
    root = _read_sexpr(text)
    if not root or _expect_atom(root[0], "'define'").text != "define":
        raise PddlSyntaxError("not a define form", root.line, root.col, "'define'")
    if len(root) < 2 or not isinstance(root[1], _Node) or len(root[1]) != 2:
        raise PddlSyntaxError("expected (problem <name>)", root.line, root.col)
    kind, name = root[1]
    if _expect_atom(kind, "'problem'").text != "problem":
        raise PddlSyntaxError("expected (problem <name>)", root[1].line, root[1].col)
    problem_name = _expect_atom(name, "problem name").text

    declared_types = dom.declared_types()
    preds = dom.predicates_by_name
    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: set[Literal] = set()
    goal: frozenset[Literal] = frozenset()

    for section in root[2:]:
        if not isinstance(section, _Node) or not section:
            raise PddlSyntaxError("expected a (:section ...)", root.line, root.col)
        head = _expect_atom(section[0], "section keyword")
        if head.text == ":domain":
            domain_name = _expect_atom(section[1], "domain name").text
        elif head.text == ":requirements":
            _check_requirements(section)
        elif head.text == ":objects":
            for obj, typ, line, col in _parse_typed_list(section[1:], "object name"):
                if typ not in declared_types:
                    raise UndeclaredSymbol(typ, line, col)
                objects.append((obj, typ))
        elif head.text == ":init":
            for atom_node in section[1:]:
                lit = _parse_literal(atom_node, preds, ":init")
                if not lit.positive:
                    raise PddlSyntaxError(
                        "negative literal in :init (closed world assumed)",
                        atom_node.line,
                        atom_node.col,
                    )
                init.add(lit)
        elif head.text == ":goal":
            if len(section) != 2:
                raise PddlSyntaxError("goal takes one condition", head.line, head.col)
            goal = _parse_condition(section[1], preds, ":goal")
        else:
            raise UnsupportedFeature(head.text, head.line, head.col)

    if domain_name is None:
        raise PddlSyntaxError("problem missing (:domain ...)", root.line, root.col)
    if domain_name != dom.name:
        raise DomainMismatch(domain_name, dom.name)

    prob = Problem(
        name=problem_name,
        domain_name=domain_name,
        objects=tuple(objects),
        init=frozenset(init),
        goal=goal,
    )
    _typecheck_problem(prob, dom)
    return prob


def _typecheck_problem(prob: Problem, dom: Domain) -> None:
    obj_types = prob.object_types
    preds = dom.predicates_by_name
    for lit in sorted(prob.init | prob.goal, key=str):
        schema = preds[lit.predicate]  # declaration checked during parsing
        for arg, (_, want) in zip(lit.args, schema.params):
            got = obj_types.get(arg)
            if got is None:
                raise UndeclaredSymbol(arg)
            if not dom.is_subtype(got, want):
                raise UndeclaredSymbol(
                    f"{arg} (type {got}, incompatible with {want} in {lit.predicate})"
                )
