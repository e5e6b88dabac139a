"""Online planning: grounded problem generation, domain filtering, solving.

Two-pass problem construction: an initial problem is generated against the
full fused domain (predicates listed by semantic group), its init+goal
predicates select the task-relevant operator subset, and a refined problem is
generated against that compact domain. The final solve always runs against the
full fused domain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import domain_graph, prompts
from .oracle_client import OracleClient, OracleFailure
from .pddl_core import (
    Domain,
    PddlError,
    Plan,
    Problem,
    parse_problem,
    print_domain,
    print_problem,
    validate_domain,
    validate_problem,
)
from .domain_learn import UnparseableAfterRetries, _request_parsed
from .planner import GroundLimit, SearchLimit, ground, solve

GROUP_KEYS = ("object-category", "state-attribute", "spatial-relation", "affordance")
DEFAULT_GROUP = "state-attribute"


class StageError(Exception):
    """An online-planning failure tagged with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: Exception | str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass(frozen=True)
class PredicateGroups:
    """Four-way semantic partition of a domain's predicate names."""

    object_category: tuple[str, ...] = ()
    state_attribute: tuple[str, ...] = ()
    spatial_relation: tuple[str, ...] = ()
    affordance: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return {
            "object-category": self.object_category,
            "state-attribute": self.state_attribute,
            "spatial-relation": self.spatial_relation,
            "affordance": self.affordance,
        }

    def all_names(self) -> frozenset[str]:
        return frozenset().union(*(set(v) for v in self.as_dict().values()))

    def check_partition(self, predicates: frozenset[str]) -> None:
        names = [n for v in self.as_dict().values() for n in v]
        if len(names) != len(set(names)):
            raise ValueError("predicate groups overlap")
        if set(names) != set(predicates):
            raise ValueError("predicate groups do not cover the domain")


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    instruction: str
    scene_image: str | None = None
    gt_problem: Problem | None = None
    group: str = "default"  # evaluation breakdown label

    def __post_init__(self):
        if not self.instruction:
            raise ValueError("task instruction must be nonempty")

    @staticmethod
    def from_json(doc: dict, dom: Domain | None = None) -> "TaskSpec":
        gt = None
        if doc.get("gt_problem") and dom is not None:
            gt = parse_problem(doc["gt_problem"], dom)
        return TaskSpec(
            task_id=doc["id"],
            instruction=doc["instruction"],
            scene_image=doc.get("image"),
            gt_problem=gt,
            group=doc.get("domain", "default"),
        )


@dataclass(frozen=True)
class FilterResult:
    p0: frozenset[str]            # task-relevant predicate names
    o_pre: frozenset[str]
    o_eff: frozenset[str]
    o_reduced: frozenset[str]     # o_pre | o_eff
    compact: Domain


@dataclass
class TaskTrace:
    """Every stage of one plan_task run, with its oracle calls and artifacts."""

    task_id: str
    stages: list[dict] = field(default_factory=list)
    fallback_used: bool = False
    outcome: str = "pending"

    def record(self, stage: str, oracle: OracleClient | None = None,
               calls_before: int = 0, **artifacts) -> None:
        entry = {"stage": stage, **artifacts}
        if oracle is not None:
            entry["oracle_calls"] = [
                {"kind": c.kind, "digest": c.digest}
                for c in oracle.calls[calls_before:]
            ]
        self.stages.append(entry)

    def to_json(self) -> str:
        doc = {
            "task_id": self.task_id,
            "outcome": self.outcome,
            "fallback_used": self.fallback_used,
            "stages": self.stages,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def group_predicates(oracle: OracleClient, dom: Domain) -> PredicateGroups:
    """One chat call partitioning the domain's predicates into four groups.

    Omitted predicates land in the default bucket; duplicates keep their first
    assignment. The result is always a valid partition.
    """
    names = sorted(p.name for p in dom.predicates)
    if not names:
        return PredicateGroups()
    prompt = prompts.GROUP_PREDICATES.format(predicates="\n".join(names))
    response = oracle.chat_text(prompt)
    raw = _parse_grouping(response)
    assigned: dict[str, str] = {}
    for key in GROUP_KEYS:
        for name in raw.get(key, ()):
            if name in names and name not in assigned:
                assigned[name] = key
    buckets: dict[str, list[str]] = {k: [] for k in GROUP_KEYS}
    for name in names:
        buckets[assigned.get(name, DEFAULT_GROUP)].append(name)
    groups = PredicateGroups(
        object_category=tuple(buckets["object-category"]),
        state_attribute=tuple(buckets["state-attribute"]),
        spatial_relation=tuple(buckets["spatial-relation"]),
        affordance=tuple(buckets["affordance"]),
    )
    groups.check_partition(frozenset(names))
    return groups


def _parse_grouping(response: str) -> dict:
    """Parse the grouping response: JSON object, possibly inside a code fence."""
    text = response.strip()
    start = text.find("{")
    end = text.rfind("}")
    if start < 0 or end <= start:
        return {}
    try:
        doc = json.loads(text[start : end + 1])
    except json.JSONDecodeError:
        return {}
    return doc if isinstance(doc, dict) else {}


def _render_groups(dom: Domain, groups: PredicateGroups | None) -> str:
    schemas = {p.name: p for p in dom.predicates}

    def decls(names) -> str:
        return "\n".join(
            f"  ({n}{''.join(f' {v} - {t}' for v, t in schemas[n].params)})" for n in names
        )

    if groups is None:  # w/o grouping ablation: flat list
        return "all predicates:\n" + decls(sorted(schemas))
    parts = []
    for key, names in groups.as_dict().items():
        parts.append(f"{key}:")
        parts.append(decls(names) if names else "  (none)")
    return "\n".join(parts)


def gen_initial_problem(
    oracle: OracleClient,
    dom: Domain,
    groups: PredicateGroups | None,
    task: TaskSpec,
    r_parse: int = 3,
) -> Problem:
    """First-pass grounded problem from scene image + instruction + predicate groups."""
    prompt = prompts.GEN_INITIAL_PROBLEM.format(
        instruction=task.instruction,
        groups=_render_groups(dom, groups),
        types="\n".join(f"{t} - {p}" for t, p in sorted(dom.types)) or "object",
        problem_name=f"{task.task_id}_initial",
        domain_name=dom.name,
    )

    def parse_prob(body: str):
        prob = parse_problem(body, dom)
        return prob, validate_problem(prob, dom)

    images = [task.scene_image] if task.scene_image else None
    return _request_parsed(oracle, prompt, parse_prob, r_parse,
                           what="initial problem", images=images)


def filter_domain(dom: Domain, p0_problem: Problem) -> FilterResult:
    """Reduce the domain to operators touching the problem's predicate set.

    P0 = predicates in init or goal (polarity ignored); O' = operators with a
    precondition or effect naming some p in P0. The compact domain closes over
    every predicate O' references so it validates on its own.
    """
    p0 = frozenset(l.predicate for l in p0_problem.init) | frozenset(
        l.predicate for l in p0_problem.goal
    )
    graph = domain_graph.to_graph(dom)
    o_pre = frozenset(o for (p, _a), o, _pos in graph.pre_edges if p in p0)
    o_eff = frozenset(o for o, (p, _a), _pos in graph.eff_edges if p in p0)
    o_reduced = o_pre | o_eff
    ops = frozenset(o for o in dom.operators if o.name in o_reduced)
    referenced = {l.predicate for o in ops for l in o.preconditions | o.effects}
    keep = p0 | referenced
    preds = frozenset(p for p in dom.predicates if p.name in keep)
    compact = Domain(dom.name, dom.types, preds, ops)
    diags = [d for d in validate_domain(compact) if d.severity == "error"]
    if diags:
        raise StageError("filter", "; ".join(str(d) for d in diags))
    return FilterResult(p0, o_pre, o_eff, o_reduced, compact)


def gen_refined_problem(
    oracle: OracleClient,
    compact: Domain,
    full_dom: Domain,
    task: TaskSpec,
    r_parse: int = 3,
) -> Problem:
    """Second-pass problem against the compact domain; must also type-check
    against the full domain, which is what gets solved."""
    prompt = prompts.GEN_REFINED_PROBLEM.format(
        instruction=task.instruction,
        domain=print_domain(compact),
        problem_name=task.task_id,
        domain_name=compact.name,
    )

    def parse_prob(body: str):
        prob = parse_problem(body, full_dom)
        return prob, validate_problem(prob, full_dom)

    images = [task.scene_image] if task.scene_image else None
    return _request_parsed(oracle, prompt, parse_prob, r_parse,
                           what="refined problem", images=images)


@dataclass(frozen=True)
class PlanTaskResult:
    plan: Plan | None
    outcome: str  # "solved" | "unsolvable" | "resource-limit"
    trace: TaskTrace
    problem: Problem | None = None


def plan_task(
    oracle: OracleClient,
    fused: Domain,
    task: TaskSpec,
    search_limits: SearchLimit | None = None,
    ground_limits: GroundLimit | None = None,
    groups: PredicateGroups | None = None,
    use_grouping: bool = True,
    use_filtering: bool = True,
    r_parse: int = 3,
) -> PlanTaskResult:
    """Full online pipeline for one task; every stage lands in the trace.

    ``use_grouping=False`` prompts with a flat predicate list; with
    ``use_filtering=False`` the initial problem is solved directly (single-pass
    generation against the full domain).
    """
    trace = TaskTrace(task.task_id)

    def run_stage(stage: str, fn, **artifacts):
        before = len(oracle.calls)
        try:
            value = fn()
        except (OracleFailure, PddlError, ValueError) as exc:
            trace.record(stage, oracle, before, error=str(exc))
            trace.outcome = f"failed:{stage}"
            raise StageError(stage, exc) from exc
        trace.record(stage, oracle, before, **artifacts)
        return value

    if use_grouping and groups is None:
        groups = run_stage("group-predicates", lambda: group_predicates(oracle, fused))
    if not use_grouping:
        groups = None

    p0_problem = run_stage(
        "initial-problem",
        lambda: gen_initial_problem(oracle, fused, groups, task, r_parse),
    )
    trace.stages[-1]["problem"] = print_problem(p0_problem)

    if use_filtering:
        filtered = run_stage("filter", lambda: filter_domain(fused, p0_problem))
        trace.stages[-1]["p0"] = sorted(filtered.p0)
        trace.stages[-1]["o_reduced"] = sorted(filtered.o_reduced)
        final_problem = run_stage(
            "refined-problem",
            lambda: gen_refined_problem(oracle, filtered.compact, fused, task, r_parse),
        )
        trace.stages[-1]["problem"] = print_problem(final_problem)
    else:
        final_problem = p0_problem

    task_grounded = run_stage(
        "ground", lambda: ground(fused, final_problem, ground_limits)
    )
    before = len(oracle.calls)
    result = solve(task_grounded, "optimal", search_limits)
    if result.outcome == "resource-limit":
        trace.fallback_used = True
        result = solve(task_grounded, "satisficing", search_limits)
    trace.record(
        "solve",
        oracle,
        before,
        outcome=result.outcome,
        expanded=result.expanded,
        plan=result.plan.render() if result.plan else None,
    )
    trace.outcome = result.outcome
    return PlanTaskResult(result.plan, result.outcome, trace, final_problem)


def write_trace(trace: TaskTrace, outdir: str | Path) -> Path:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{trace.task_id}_trace.json"
    path.write_text(trace.to_json() + "\n")
    return path
