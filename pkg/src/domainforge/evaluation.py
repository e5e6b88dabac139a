"""Evaluation metrics (SR, SPL, OR(K)) and the suite runner.

SPL = (1/N) Σ 1_succ · c*/c and OR(K) = (1/N) Σ 1[0 < c ≤ c* + K], with failed
episodes encoded as c = 0 so the 0 < c guard removes them. Episodes whose
optimal cost is unknown contribute 0 to both metrics and are flagged.
"""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .oracle_client import OracleClient
from .pddl_core import Domain
from .planner import GroundLimit, SearchLimit, optimal_cost, validate_plan
from .task_plan import PlanTaskResult, StageError, TaskSpec, TaskTrace, plan_task


@dataclass(frozen=True)
class Episode:
    """One task outcome: success flag, plan cost, certified optimum, overhead."""

    task_id: str
    success: bool
    cost: int                      # 0 when failed
    optimal: int | None            # None = unknown (planner resource limit)
    thinking_time: float = 0.0
    llm_calls: int = 0
    group: str = "default"
    note: str = ""

    def __post_init__(self):
        if self.cost < 0:
            raise ValueError("cost must be nonnegative")
        if not self.success and self.cost != 0:
            raise ValueError("failed episodes must encode cost = 0")
        if self.success and self.cost == 0 and self.optimal not in (None, 0):
            raise ValueError("successful episodes need the actual plan cost")
        if (
            self.success
            and self.optimal is not None
            and self.cost < self.optimal
        ):
            raise ValueError("a valid plan cannot beat the certified optimum")


def spl(episodes: list[Episode]) -> float:
    """Success-weighted relative path length; unknown optima contribute 0."""
    if not episodes:
        raise ValueError("no episodes")
    total = 0.0
    for ep in episodes:
        if ep.success and ep.optimal is not None and ep.cost > 0:
            total += ep.optimal / ep.cost
    return total / len(episodes)


def or_k(episodes: list[Episode], k: int) -> float:
    """Fraction of plans with 0 < cost <= optimal + k; unknown optima contribute 0."""
    if not episodes:
        raise ValueError("no episodes")
    hits = 0
    for ep in episodes:
        if ep.optimal is None:
            continue
        if 0 < ep.cost <= ep.optimal + k:
            hits += 1
    return hits / len(episodes)


def success_rate(episodes: list[Episode]) -> float:
    if not episodes:
        raise ValueError("no episodes")
    return sum(1 for ep in episodes if ep.success) / len(episodes)


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    return mean, statistics.stdev(values) / len(values) ** 0.5


@dataclass(frozen=True)
class Report:
    n: int
    sr: float
    spl: float
    or2: float
    or1: float
    or0: float
    thinking_mean: float
    thinking_stderr: float
    calls_mean: float
    calls_stderr: float
    ablation: str = "full"
    unknown_optimal: int = 0
    per_group: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("sr", "spl", "or2", "or1", "or0"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} out of [0, 1]: {value}")
        if not (self.or0 <= self.or1 <= self.or2):
            raise ValueError("optimality rates must be monotone in K")
        if self.spl > self.sr + 1e-12:
            raise ValueError("SPL cannot exceed SR")


def _scope_stats(episodes: list[Episode]) -> dict:
    think = [ep.thinking_time for ep in episodes]
    calls = [float(ep.llm_calls) for ep in episodes]
    tmean, tse = _mean_stderr(think)
    cmean, cse = _mean_stderr(calls)
    return {
        "n": len(episodes),
        "sr": success_rate(episodes),
        "spl": spl(episodes),
        "or2": or_k(episodes, 2),
        "or1": or_k(episodes, 1),
        "or0": or_k(episodes, 0),
        "thinking_mean": tmean,
        "thinking_stderr": tse,
        "calls_mean": cmean,
        "calls_stderr": cse,
    }


def aggregate(episodes: list[Episode], ablation: str = "full") -> Report:
    """Aggregate episodes into a Report with a per-group breakdown."""
    if not episodes:
        raise ValueError("no episodes")
    overall = _scope_stats(episodes)
    groups = sorted({ep.group for ep in episodes})
    per_group = {
        g: _scope_stats([ep for ep in episodes if ep.group == g]) for g in groups
    }
    return Report(
        ablation=ablation,
        unknown_optimal=sum(1 for ep in episodes if ep.optimal is None),
        per_group=per_group,
        **overall,
    )


@dataclass
class SuiteResult:
    report: Report
    episodes: list[Episode]
    traces: list[TaskTrace]


def run_episode(
    oracle: OracleClient,
    fused: Domain,
    task: TaskSpec,
    search_limits: SearchLimit | None = None,
    ground_limits: GroundLimit | None = None,
    use_grouping: bool = True,
    use_filtering: bool = True,
) -> tuple[Episode, TaskTrace]:
    """Run one task end to end and judge it against its ground-truth problem."""
    note = ""
    try:
        result: PlanTaskResult = plan_task(
            oracle,
            fused,
            task,
            search_limits=search_limits,
            ground_limits=ground_limits,
            use_grouping=use_grouping,
            use_filtering=use_filtering,
        )
        trace = result.trace
        plan = result.plan if result.outcome == "solved" else None
    except StageError as exc:
        trace = TaskTrace(task.task_id)
        trace.outcome = f"failed:{exc.stage}"
        plan = None
        note = str(exc)

    success = False
    cost = 0
    if plan is not None and task.gt_problem is not None:
        check = validate_plan(fused, task.gt_problem, plan)
        success = check.valid
        cost = plan.cost if success else 0
        if not success:
            note = f"plan rejected by ground truth: {check.reason}"
    elif plan is not None and task.gt_problem is None:
        note = "no ground-truth problem; episode counted as failed"

    c_star: int | None = None
    if task.gt_problem is not None:
        opt = optimal_cost(fused, task.gt_problem, search_limits, ground_limits)
        c_star = opt if isinstance(opt, int) else None  # UNKNOWN/UNSOLVABLE -> flagged

    _, _, _, thinking = oracle.counters.snapshot()
    episode = Episode(
        task_id=task.task_id,
        success=success,
        cost=cost,
        optimal=c_star,
        thinking_time=thinking,
        llm_calls=oracle.counters.n_calls,
        group=task.group,
        note=note,
    )
    return episode, trace


def run_suite(
    tasks: list[TaskSpec],
    fused: Domain,
    oracle_factory,
    search_limits: SearchLimit | None = None,
    ground_limits: GroundLimit | None = None,
    use_grouping: bool = True,
    use_filtering: bool = True,
    max_workers: int = 4,
    ablation: str | None = None,
) -> SuiteResult:
    """Evaluate every task (concurrently, bounded); per-task failures never abort.

    ``oracle_factory`` builds one OracleClient per task so usage counters stay
    isolated. Results aggregate in task order, keeping reports deterministic.
    """
    if not tasks:
        raise ValueError("no tasks in suite")
    if ablation is None:
        parts = []
        if not use_grouping:
            parts.append("no-grouping")
        if not use_filtering:
            parts.append("no-filtering")
        ablation = "+".join(parts) or "full"

    def one(task: TaskSpec) -> tuple[Episode, TaskTrace]:
        oracle = oracle_factory()
        try:
            return run_episode(
                oracle,
                fused,
                task,
                search_limits,
                ground_limits,
                use_grouping,
                use_filtering,
            )
        except Exception as exc:  # robustness: any crash becomes a failed episode
            trace = TaskTrace(task.task_id)
            trace.outcome = "failed:crash"
            return (
                Episode(
                    task_id=task.task_id,
                    success=False,
                    cost=0,
                    optimal=None,
                    group=task.group,
                    note=f"crashed: {exc}",
                ),
                trace,
            )

    if max_workers <= 1:
        pairs = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            pairs = list(pool.map(one, tasks))
    episodes = [ep for ep, _ in pairs]
    traces = [tr for _, tr in pairs]
    return SuiteResult(aggregate(episodes, ablation), episodes, traces)


_CSV_COLUMNS = [
    "scope",
    "n",
    "sr",
    "spl",
    "or2",
    "or1",
    "or0",
    "thinking_mean",
    "thinking_stderr",
    "calls_mean",
    "calls_stderr",
]


def _report_rows(report: Report) -> list[dict]:
    overall = {c: getattr(report, c) for c in _CSV_COLUMNS if c != "scope"}
    rows = [{"scope": "overall", **overall}]
    for group, stats in sorted(report.per_group.items()):
        rows.append({"scope": group, **stats})
    return rows


def emit_report(report: Report, fmt: str = "json") -> str:
    """Serialize a report as json, csv or a markdown table (deterministic)."""
    if fmt == "json":
        doc = {
            "ablation": report.ablation,
            "unknown_optimal": report.unknown_optimal,
            "overall": {c: getattr(report, c) for c in _CSV_COLUMNS if c != "scope"},
            "per_group": {g: s for g, s in sorted(report.per_group.items())},
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    if fmt == "csv":
        lines = [",".join(_CSV_COLUMNS)]
        for row in _report_rows(report):
            cells = []
            for col in _CSV_COLUMNS:
                value = row[col]
                cells.append(f"{value:.6f}" if isinstance(value, float) else str(value))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        header = "| scope | n | SR | SPL | OR(2) | OR(1) | OR(0) | think (s) | #calls |"
        sep = "|---|---|---|---|---|---|---|---|---|"
        lines = [header, sep]
        for row in _report_rows(report):
            lines.append(
                "| {scope} | {n} | {sr:.3f} | {spl:.3f} | {or2:.3f} | {or1:.3f} "
                "| {or0:.3f} | {thinking_mean:.3f} +/- {thinking_stderr:.3f} "
                "| {calls_mean:.1f} +/- {calls_stderr:.1f} |".format(**row)
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
