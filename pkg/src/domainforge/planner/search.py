"""Heuristic state-space search over grounded tasks.

Optimal mode is A* with h_max (admissible); satisficing mode is greedy
best-first with h_add. Tie-breaking is deterministic: lower g first, then
insertion order (FIFO), so repeated runs return identical plans.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from ..pddl_core import Domain, Plan, Problem
from .grounding import GroundedTask, GroundLimit, ground
from .heuristics import INF, h_add, h_blind, h_max


@dataclass(frozen=True)
class SearchLimit:
    max_expansions: int = 1_000_000
    max_seconds: float = 60.0


@dataclass(frozen=True)
class SolveResult:
    outcome: str  # "solved" | "unsolvable" | "resource-limit"
    plan: Plan | None
    expanded: int
    elapsed: float

    @property
    def solved(self) -> bool:
        return self.outcome == "solved"


class _Sentinel:
    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


UNKNOWN = _Sentinel("UNKNOWN")
UNSOLVABLE = _Sentinel("UNSOLVABLE")

_HEURISTICS = {"hmax": h_max, "hadd": h_add, "blind": h_blind}


def solve(
    task: GroundedTask,
    mode: str = "optimal",
    limits: SearchLimit | None = None,
    heuristic: str | None = None,
) -> SolveResult:
    """Search ``task`` for a plan.

    mode="optimal" runs A* (minimum-length plan guaranteed); mode="satisficing"
    runs greedy best-first search. ``heuristic`` overrides the default per-mode
    choice ("hmax"/"hadd"/"blind").
    """
    if mode not in ("optimal", "satisficing"):
        raise ValueError(f"unknown mode {mode!r}")
    limits = limits or SearchLimit()
    h_name = heuristic or ("hmax" if mode == "optimal" else "hadd")
    h_fun = _HEURISTICS[h_name]
    start = time.monotonic()

    init = task.init
    h0 = h_fun(task, init)
    counter = 0
    expanded = 0
    # state interning keeps heap entries comparable and small
    state_ids: dict[frozenset[int], int] = {init: 0}
    states = [init]
    g_best = {0: 0}
    parent: dict[int, tuple[int, int]] = {}  # state -> (parent state, action index)
    heap: list[tuple[float, int, int, int]] = []
    if h0 < INF:
        heap.append((h0, 0, counter, 0))
    closed: set[int] = set()

    def reconstruct(sid: int) -> Plan:
        steps = []
        while sid in parent:
            sid, ai = parent[sid]
            steps.append(task.actions[ai].step())
        steps.reverse()
        return Plan(tuple(steps))

    while heap:
        _, g, _, sid = heapq.heappop(heap)
        if sid in closed or g > g_best.get(sid, 1 << 60):
            continue
        state = states[sid]
        if task.goal_satisfied(state):
            return SolveResult("solved", reconstruct(sid), expanded, time.monotonic() - start)
        closed.add(sid)
        expanded += 1
        if expanded > limits.max_expansions or time.monotonic() - start > limits.max_seconds:
            return SolveResult("resource-limit", None, expanded, time.monotonic() - start)
        for ai, act in enumerate(task.actions):
            if not act.applicable(state):
                continue
            succ = frozenset((state - act.delete) | act.add)
            tid = state_ids.get(succ)
            if tid is None:
                tid = len(states)
                state_ids[succ] = tid
                states.append(succ)
            if tid in closed:
                continue
            ng = g + 1
            if ng < g_best.get(tid, 1 << 60):
                g_best[tid] = ng
                parent[tid] = (sid, ai)
                hv = h_fun(task, succ)
                if hv >= INF:
                    continue
                counter += 1
                if mode == "optimal":
                    heapq.heappush(heap, (ng + hv, ng, counter, tid))
                else:
                    heapq.heappush(heap, (hv, ng, counter, tid))
    return SolveResult("unsolvable", None, expanded, time.monotonic() - start)


def optimal_cost(
    dom: Domain,
    prob: Problem,
    search_limits: SearchLimit | None = None,
    ground_limits: GroundLimit | None = None,
):
    """Certified minimum plan length: int, UNSOLVABLE, or UNKNOWN on resource limit."""
    try:
        task = ground(dom, prob, ground_limits)
    except Exception:
        return UNKNOWN
    result = solve(task, "optimal", search_limits)
    if result.solved:
        return result.plan.cost
    if result.outcome == "unsolvable":
        return UNSOLVABLE
    return UNKNOWN
