"""Delete-relaxation heuristics h_max (admissible) and h_add (informative).

Both run the generalized-Dijkstra sweep over atoms: an action fires once all
its positive preconditions are costed; negative preconditions and negative
goal literals are ignored (optimistic, preserves admissibility of h_max).
"""

from __future__ import annotations

import heapq

from .grounding import GroundedTask

INF = float("inf")


def _relaxation_costs(task: GroundedTask, state: frozenset[int], combine) -> list[float]:
    """Cost-to-achieve per atom from ``state``; combine is max (h_max) or sum (h_add)."""
    n = len(task.atoms)
    cost = [INF] * n
    waiting: dict[int, list[int]] = {}
    free_actions = []
    for ai, act in enumerate(task.actions):
        if act.pre_pos:
            for p in act.pre_pos:
                waiting.setdefault(p, []).append(ai)
        else:
            free_actions.append(ai)
    unsat = {ai: len(act.pre_pos) for ai, act in enumerate(task.actions)}
    pre_cost = [0.0] * len(task.actions)

    heap: list[tuple[float, int]] = []
    for a in state:
        cost[a] = 0.0
        heapq.heappush(heap, (0.0, a))

    def fire(ai: int) -> None:
        acted = combine(pre_cost[ai], 0.0) if task.actions[ai].pre_pos else 0.0
        new_cost = acted + 1.0
        for added in task.actions[ai].add:
            if new_cost < cost[added]:
                cost[added] = new_cost
                heapq.heappush(heap, (new_cost, added))

    for ai in free_actions:
        fire(ai)

    done = [False] * n
    while heap:
        c, atom = heapq.heappop(heap)
        if done[atom] or c > cost[atom]:
            continue
        done[atom] = True
        for ai in waiting.get(atom, ()):
            pre_cost[ai] = combine(pre_cost[ai], c)
            unsat[ai] -= 1
            if unsat[ai] == 0:
                fire(ai)
    return cost


def h_max(task: GroundedTask, state: frozenset[int]) -> float:
    if not task.goal_pos:
        return 0.0
    cost = _relaxation_costs(task, state, max)
    return max(cost[g] for g in task.goal_pos)


def h_add(task: GroundedTask, state: frozenset[int]) -> float:
    if not task.goal_pos:
        return 0.0
    cost = _relaxation_costs(task, state, lambda a, b: a + b)
    total = 0.0
    for g in task.goal_pos:
        if cost[g] == INF:
            return INF
        total += cost[g]
    return total


def h_blind(task: GroundedTask, state: frozenset[int]) -> float:
    return 0.0 if task.goal_satisfied(state) else 1.0
