"""Immutable value types for the PDDL subset used across the pipeline.

All identifiers are normalized to lowercase on construction so that equality
and hashing are case-insensitive. Collections are stored as frozensets or
tuples, making every value hashable and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

Param = tuple[str, str]  # ("?var", "type-name")

ROOT_TYPE = "object"


def _norm(name: str) -> str:
    return name.lower()


def _norm_params(params: Iterable[Param]) -> tuple[Param, ...]:
    out = []
    for var, typ in params:
        var = var.lower()
        if not var.startswith("?"):
            var = "?" + var
        out.append((var, typ.lower()))
    return tuple(out)


@dataclass(frozen=True)
class PredicateSchema:
    """A named Boolean relation over typed parameters."""

    name: str
    params: tuple[Param, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "name", _norm(self.name))
        object.__setattr__(self, "params", _norm_params(self.params))

    @property
    def arity(self) -> int:
        return len(self.params)

    def render(self) -> str:
        """Compact schema string, e.g. ``holding(?o)``."""
        return f"{self.name}({', '.join(v for v, _ in self.params)})"


@dataclass(frozen=True)
class Literal:
    """A possibly negated predicate application over variables or objects."""

    predicate: str
    args: tuple[str, ...] = ()
    positive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "predicate", _norm(self.predicate))
        object.__setattr__(self, "args", tuple(a.lower() for a in self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def negated(self) -> "Literal":
        return Literal(self.predicate, self.args, not self.positive)

    def atom(self) -> "Literal":
        """The positive form of this literal."""
        return self if self.positive else Literal(self.predicate, self.args, True)

    def substitute(self, binding: dict[str, str]) -> "Literal":
        return Literal(
            self.predicate,
            tuple(binding.get(a, a) for a in self.args),
            self.positive,
        )

    def __str__(self) -> str:
        inner = f"({self.predicate}{''.join(' ' + a for a in self.args)})"
        return inner if self.positive else f"(not {inner})"


@dataclass(frozen=True)
class OperatorSchema:
    """A STRIPS operator: typed parameters, precondition and effect literal sets."""

    name: str
    params: tuple[Param, ...] = ()
    preconditions: frozenset[Literal] = frozenset()
    effects: frozenset[Literal] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "name", _norm(self.name))
        object.__setattr__(self, "params", _norm_params(self.params))
        object.__setattr__(self, "preconditions", frozenset(self.preconditions))
        object.__setattr__(self, "effects", frozenset(self.effects))

    @property
    def arity(self) -> int:
        return len(self.params)

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.params)


@dataclass(frozen=True)
class Domain:
    """A PDDL domain: type hierarchy, predicate schemas and operators."""

    name: str
    types: tuple[tuple[str, str], ...] = ()  # (type, parent), "object" implicit
    predicates: frozenset[PredicateSchema] = frozenset()
    operators: frozenset[OperatorSchema] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "name", _norm(self.name))
        norm = sorted(
            (t.lower(), (p or ROOT_TYPE).lower())
            for t, p in self.types
            if t.lower() != ROOT_TYPE
        )
        object.__setattr__(self, "types", tuple(norm))
        object.__setattr__(self, "predicates", frozenset(self.predicates))
        object.__setattr__(self, "operators", frozenset(self.operators))

    @cached_property
    def type_parents(self) -> dict[str, str | None]:
        parents: dict[str, str | None] = {ROOT_TYPE: None}
        parents.update({t: p for t, p in self.types})
        return parents

    @cached_property
    def predicates_by_name(self) -> dict[str, PredicateSchema]:
        return {p.name: p for p in sorted(self.predicates, key=lambda p: p.name)}

    @cached_property
    def operators_by_name(self) -> dict[str, OperatorSchema]:
        return {o.name: o for o in sorted(self.operators, key=lambda o: o.name)}

    def is_subtype(self, typ: str, ancestor: str) -> bool:
        """True when ``typ`` equals or descends from ``ancestor``."""
        if ancestor == ROOT_TYPE:
            return True
        seen = set()
        cur: str | None = typ
        while cur is not None and cur not in seen:
            if cur == ancestor:
                return True
            seen.add(cur)
            cur = self.type_parents.get(cur)
        return False

    def declared_types(self) -> frozenset[str]:
        return frozenset({ROOT_TYPE, *(t for t, _ in self.types), *(p for _, p in self.types)})


@dataclass(frozen=True)
class Problem:
    """A PDDL problem: typed objects, initial ground atoms, goal conjunction."""

    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()  # (object, type)
    init: frozenset[Literal] = frozenset()
    goal: frozenset[Literal] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "name", _norm(self.name))
        object.__setattr__(self, "domain_name", _norm(self.domain_name))
        objs = sorted((o.lower(), t.lower()) for o, t in self.objects)
        object.__setattr__(self, "objects", tuple(objs))
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))

    @cached_property
    def object_types(self) -> dict[str, str]:
        return dict(self.objects)


@dataclass(frozen=True)
class PlanStep:
    """One ground action: operator name plus object arguments."""

    name: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "name", _norm(self.name))
        object.__setattr__(self, "args", tuple(a.lower() for a in self.args))

    def __str__(self) -> str:
        return f"({self.name}{''.join(' ' + a for a in self.args)})"


@dataclass(frozen=True)
class Plan:
    """An ordered action sequence with unit costs (cost = step count)."""

    steps: tuple[PlanStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def cost(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def render(self) -> str:
        """One step per line: ``(op-name arg1 arg2)``."""
        return "\n".join(str(s) for s in self.steps)

    @staticmethod
    def parse(text: str) -> "Plan":
        """Parse the one-step-per-line plan format (blank lines and ; comments skipped)."""
        steps = []
        for raw in text.splitlines():
            line = raw.split(";")[0].strip()
            if not line:
                continue
            if not (line.startswith("(") and line.endswith(")")):
                raise ValueError(f"malformed plan step: {raw!r}")
            parts = line[1:-1].split()
            if not parts:
                raise ValueError(f"empty plan step: {raw!r}")
            steps.append(PlanStep(parts[0], tuple(parts[1:])))
        return Plan(tuple(steps))
