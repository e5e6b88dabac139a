"""Grounding a (Domain, Problem) pair into a propositional STRIPS task.

Operators are instantiated over all type-respecting substitutions, then atoms
and actions are pruned to the delete-relaxation reachable set from the initial
state (negative preconditions are ignored during reachability, which keeps the
pruning sound). Goal atoms are always kept indexed so unsolvable goals remain
representable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..pddl_core import Domain, Literal, PddlError, PlanStep, Problem


class GroundingExplosion(PddlError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"grounding produced more than {limit} actions ({count}+)")


@dataclass(frozen=True)
class GroundLimit:
    max_actions: int = 200_000


@dataclass(frozen=True)
class GroundedAction:
    """A propositional action over atom indices."""

    name: str
    args: tuple[str, ...]
    pre_pos: frozenset[int]
    pre_neg: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]

    def step(self) -> PlanStep:
        return PlanStep(self.name, self.args)

    def applicable(self, state: frozenset[int]) -> bool:
        return self.pre_pos <= state and not (self.pre_neg & state)


@dataclass(frozen=True)
class GroundedTask:
    atoms: tuple[Literal, ...]
    actions: tuple[GroundedAction, ...]
    init: frozenset[int]
    goal_pos: frozenset[int]
    goal_neg: frozenset[int]
    unreachable_goal: frozenset[int] = frozenset()

    def atom_index(self) -> dict[Literal, int]:
        return {a: i for i, a in enumerate(self.atoms)}

    def goal_satisfied(self, state: frozenset[int]) -> bool:
        return self.goal_pos <= state and not (self.goal_neg & state)


def _objects_by_type(dom: Domain, prob: Problem) -> dict[str, list[str]]:
    """Candidate objects per declared type, honoring the subtype relation."""
    table: dict[str, list[str]] = {t: [] for t in sorted(dom.declared_types())}
    for obj, typ in prob.objects:
        for t in table:
            if dom.is_subtype(typ, t):
                table[t].append(obj)
    return table


def ground(
    dom: Domain,
    prob: Problem,
    limits: GroundLimit | None = None,
    prune: bool = True,
) -> GroundedTask:
    """Enumerate ground actions and prune to the delete-relaxation reachable set.

    ``prune=False`` keeps every type-correct instantiation (used to check that
    pruning never changes solve outcomes).
    """
    limits = limits or GroundLimit()
    candidates_by_type = _objects_by_type(dom, prob)

    atom_ids: dict[Literal, int] = {}
    atoms: list[Literal] = []

    def intern(atom: Literal) -> int:
        idx = atom_ids.get(atom)
        if idx is None:
            idx = len(atoms)
            atom_ids[atom] = idx
            atoms.append(atom)
        return idx

    init_ids = frozenset(intern(a) for a in sorted(prob.init, key=str))

    actions: list[GroundedAction] = []
    count = 0
    for op in sorted(dom.operators, key=lambda o: o.name):
        pools = [candidates_by_type.get(t, []) for _, t in op.params]
        for combo in itertools.product(*pools):
            count += 1
            if count > limits.max_actions:
                raise GroundingExplosion(count, limits.max_actions)
            binding = {v: obj for (v, _), obj in zip(op.params, combo)}
            pre_pos, pre_neg, add, delete = set(), set(), set(), set()
            for lit in op.preconditions:
                idx = intern(lit.atom().substitute(binding))
                (pre_pos if lit.positive else pre_neg).add(idx)
            for lit in op.effects:
                idx = intern(lit.atom().substitute(binding))
                (add if lit.positive else delete).add(idx)
            delete -= add  # (s \ del) ∪ add semantics: add wins, keep the sets disjoint
            actions.append(
                GroundedAction(
                    op.name,
                    tuple(combo),
                    frozenset(pre_pos),
                    frozenset(pre_neg),
                    frozenset(add),
                    frozenset(delete),
                )
            )

    goal_pos = frozenset(intern(l.atom()) for l in sorted(prob.goal, key=str) if l.positive)
    goal_neg = frozenset(intern(l.atom()) for l in sorted(prob.goal, key=str) if not l.positive)

    if not prune:
        return GroundedTask(
            atoms=tuple(atoms),
            actions=tuple(actions),
            init=init_ids,
            goal_pos=goal_pos,
            goal_neg=goal_neg,
        )

    # Delete-relaxation reachability fixpoint over positive preconditions.
    reached = set(init_ids)
    kept: list[GroundedAction] = []
    pending = actions
    changed = True
    while changed:
        changed = False
        remaining = []
        for act in pending:
            if act.pre_pos <= reached:
                kept.append(act)
                before = len(reached)
                reached |= act.add
                if len(reached) != before:
                    changed = True
            else:
                remaining.append(act)
        pending = remaining

    keep_atoms = reached | set(goal_pos)
    old_to_new = {old: new for new, old in enumerate(sorted(keep_atoms))}
    new_atoms = tuple(atoms[old] for old in sorted(keep_atoms))

    def remap(ids: frozenset[int]) -> frozenset[int]:
        return frozenset(old_to_new[i] for i in ids if i in old_to_new)

    new_actions = tuple(
        GroundedAction(
            a.name,
            a.args,
            remap(a.pre_pos),
            remap(a.pre_neg),
            remap(a.add),
            remap(a.delete),
        )
        for a in kept
    )
    reachable_new = {old_to_new[i] for i in reached}
    unreachable_goal = frozenset(
        old_to_new[g] for g in goal_pos if old_to_new[g] not in reachable_new
    )
    return GroundedTask(
        atoms=new_atoms,
        actions=new_actions,
        init=remap(init_ids),
        goal_pos=remap(goal_pos),
        goal_neg=remap(goal_neg),
        unreachable_goal=unreachable_goal,
    )
