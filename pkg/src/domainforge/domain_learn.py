"""Closed-loop learning of an atomic PDDL domain from one demonstration.

Pipeline: per-transition operator proposal (VLM with keyframe pairs) →
holistic revision → test-problem generation from the predicate set only →
solvability gate against the planner → solution verification → bounded
refinement, with one full restart before giving up.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

from . import prompts
from .oracle_client import OracleClient, OracleFailure
from .pddl_core import (
    Domain,
    OperatorSchema,
    PddlError,
    Plan,
    Problem,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
    validate_domain,
    validate_problem,
)
from .planner import (
    SearchLimit,
    UNKNOWN,
    UNSOLVABLE,
    ground,
    optimal_cost,
    solve,
)


class UnparseableAfterRetries(OracleFailure):
    def __init__(self, what: str, diagnostics: str):
        self.what = what
        self.diagnostics = diagnostics
        super().__init__(f"{what} unparseable after retries: {diagnostics}")


class UnparseableVerdict(OracleFailure):
    def __init__(self, response: str):
        self.response = response
        super().__init__(f"no PASS/FAIL verdict in response: {response[:120]!r}")


class LearnFailed(Exception):
    """Both learning passes exhausted without a verified domain."""

    def __init__(self, record: "AtomicDomainRecord"):
        self.record = record
        super().__init__(f"domain learning failed for {record.demo_id!r} after restart")


@dataclass(frozen=True)
class DemoManifest:
    demo_id: str
    instruction: str
    keyframes: tuple[str, ...]

    def __post_init__(self):
        if len(self.keyframes) < 2:
            raise ValueError("a demonstration needs at least 2 keyframes")

    @staticmethod
    def from_json(text: str) -> "DemoManifest":
        doc = json.loads(text)
        return DemoManifest(doc["demo_id"], doc["instruction"], tuple(doc["keyframes"]))


@dataclass(frozen=True)
class LearnConfig:
    k_test: int = 5
    theta: float = 0.6
    l_max: int = 5
    r_parse: int = 3
    # ablation switches
    skip_revision: bool = False       # w/o R
    skip_solvability: bool = False    # w/o SC
    skip_verification: bool = False   # w/o SV
    single_pass: bool = False         # w/o CL

    def __post_init__(self):
        if not (0 < self.theta <= 1):
            raise ValueError("theta must be in (0, 1]")
        if self.k_test < 1 or self.l_max < 1:
            raise ValueError("k_test and l_max must be >= 1")


@dataclass(frozen=True)
class AtomicDomainRecord:
    domain: Domain
    demo_id: str
    iterations_used: int
    solvability_score: float | None
    test_problems: tuple[Problem, ...]
    verified: bool
    restarts: int = 0


@dataclass(frozen=True)
class VerificationResult:
    passed: bool
    feedback: str = ""


_DEFINE_RE = re.compile(r"\(\s*define\b", re.IGNORECASE)


def extract_pddl(text: str) -> str:
    """Pull the first balanced ``(define ...)`` form out of a chat response."""
    m = _DEFINE_RE.search(text)
    if not m:
        raise PddlError("response contains no (define ...) form")
    start = m.start()
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    raise PddlError("unbalanced (define ...) form in response")


def _request_parsed(oracle, prompt, parse_and_validate, r_parse, what, images=None):
    """Chat, parse, validate; on failure feed diagnostics back up to r_parse times."""
    current = prompt
    diagnostics = ""
    for _ in range(1 + r_parse):
        response = oracle.chat_text(current, images=images)
        try:
            body = extract_pddl(response)
            value, diags = parse_and_validate(body)
        except PddlError as exc:
            diagnostics = str(exc)
            current = prompts.REPAIR_PDDL.format(diagnostics=diagnostics, previous=response)
            continue
        if diags:
            diagnostics = "\n".join(str(d) for d in diags)
            current = prompts.REPAIR_PDDL.format(diagnostics=diagnostics, previous=response)
            continue
        return value
    raise UnparseableAfterRetries(what, diagnostics)


def _render_predicates(predicates) -> str:
    decls = sorted(f"({p.name}{''.join(f' {v} - {t}' for v, t in p.params)})" for p in predicates)
    return "\n".join(decls) if decls else "(none yet)"


def _render_types(dom: Domain) -> str:
    if not dom.types:
        return "object"
    return "\n".join(f"{t} - {p}" for t, p in sorted(dom.types)) or "object"


def _merge_fragment(base: Domain | None, fragment: Domain, demo_id: str) -> Domain:
    """Fold one transition's mini-domain into the accumulating proposal."""
    if base is None:
        return Domain(demo_id, fragment.types, fragment.predicates, fragment.operators)
    types = dict(base.types)
    for t, p in fragment.types:
        types.setdefault(t, p)
    preds = {p.name: p for p in base.predicates}
    for p in fragment.predicates:
        preds.setdefault(p.name, p)
    ops = {o.name: o for o in base.operators}
    for op in fragment.operators:
        name = op.name
        k = 2
        while name in ops and ops[name] != op:
            name = f"{op.name}_{k}"
            k += 1
        if name != op.name:
            op = OperatorSchema(name, op.params, op.preconditions, op.effects)
        ops[name] = op
    return Domain(
        demo_id,
        tuple(types.items()),
        frozenset(preds.values()),
        frozenset(ops.values()),
    )


def propose_domain(oracle: OracleClient, manifest: DemoManifest, cfg: LearnConfig) -> Domain:
    """One chat call per keyframe transition, threading accumulated predicates."""
    accumulated: Domain | None = None
    n = len(manifest.keyframes)
    for i in range(n - 1):
        known = accumulated.predicates if accumulated else frozenset()
        prompt = prompts.PROPOSE_OPERATOR.format(
            instruction=manifest.instruction,
            index=i + 1,
            next_index=i + 2,
            n_keyframes=n,
            known_predicates=_render_predicates(known),
            domain_name=manifest.demo_id,
        )

        def parse_fragment(body: str):
            dom = parse_domain(body)
            return dom, validate_domain(dom)

        fragment = _request_parsed(
            oracle,
            prompt,
            parse_fragment,
            cfg.r_parse,
            what=f"transition {i + 1} proposal",
            images=[manifest.keyframes[i], manifest.keyframes[i + 1]],
        )
        accumulated = _merge_fragment(accumulated, fragment, manifest.demo_id)
    return accumulated


def revise_domain(oracle: OracleClient, d0: Domain, instruction: str, cfg: LearnConfig) -> Domain:
    """Single holistic revision pass; output re-validated with repair feedback."""
    prompt = prompts.REVISE_DOMAIN.format(instruction=instruction, domain=print_domain(d0))

    def parse_revised(body: str):
        dom = parse_domain(body)
        dom = Domain(d0.name, dom.types, dom.predicates, dom.operators)
        return dom, validate_domain(dom)

    return _request_parsed(oracle, prompt, parse_revised, cfg.r_parse, what="revision")


def gen_test_problems(
    oracle: OracleClient, dom: Domain, instruction: str, cfg: LearnConfig
) -> list[Problem]:
    """Generate k_test problems of increasing difficulty from predicates only.

    The prompt never contains operator names (anti-compensation rule); parsing
    and typing still use the full domain.
    """
    if not dom.predicates:
        raise ValueError("cannot generate test problems without predicates")
    problems = []
    for k in range(1, cfg.k_test + 1):
        prompt = prompts.GEN_TEST_PROBLEM.format(
            instruction=instruction,
            level=k,
            levels=cfg.k_test,
            types=_render_types(dom),
            predicates=_render_predicates(dom.predicates),
            problem_name=f"{dom.name}_test_{k}",
            domain_name=dom.name,
        )

        def parse_prob(body: str):
            prob = parse_problem(body, dom)
            return prob, validate_problem(prob, dom)

        try:
            problems.append(
                _request_parsed(oracle, prompt, parse_prob, cfg.r_parse, what=f"test problem {k}")
            )
        except UnparseableAfterRetries as exc:
            raise UnparseableAfterRetries(f"test problem {k}", exc.diagnostics) from exc
    return order_by_difficulty(dom, problems)


def order_by_difficulty(
    dom: Domain, problems: list[Problem], limits: SearchLimit | None = None
) -> list[Problem]:
    """Stable sort by certified optimal cost; uncomputable costs sort last."""
    limits = limits or SearchLimit(max_expansions=200_000, max_seconds=10.0)

    def cost_key(prob: Problem) -> float:
        c = optimal_cost(dom, prob, limits)
        return float(c) if isinstance(c, int) else float("inf")

    return sorted(problems, key=cost_key)


def solvability_score(
    dom: Domain, problems: list[Problem], limits: SearchLimit | None = None
) -> tuple[float, list[str]]:
    """Fraction of problems solved by satisficing search; ill-typed counts unsolved.

    Returns (score, per-problem outcome strings for refinement feedback).
    """
    outcomes: list[str] = []
    solved = 0
    for i, prob in enumerate(problems, start=1):
        diags = validate_problem(prob, dom)
        if diags:
            outcomes.append(f"problem {i}: ill-typed ({diags[0].message})")
            continue
        try:
            task = ground(dom, prob)
        except PddlError as exc:
            outcomes.append(f"problem {i}: grounding failed ({exc})")
            continue
        result = solve(task, "satisficing", limits)
        if result.solved:
            solved += 1
            outcomes.append(f"problem {i}: solved with a {result.plan.cost}-step plan")
        elif result.outcome == "unsolvable":
            outcomes.append(f"problem {i}: unsolvable for the planner")
        else:
            outcomes.append(f"problem {i}: planner hit its resource limit")
    return (solved / len(problems) if problems else 0.0), outcomes


_VERDICT_RE = re.compile(r"\b(PASS|FAIL)\b", re.IGNORECASE)


def verify_solution(
    oracle: OracleClient, dom: Domain, problem: Problem, plan: Plan, instruction: str
) -> VerificationResult:
    """LLM check of the plan against physical/commonsense constraints."""
    prompt = prompts.VERIFY_SOLUTION.format(
        instruction=instruction,
        domain=print_domain(dom),
        problem=print_problem(problem),
        plan=plan.render() or "(empty plan)",
    )
    response = oracle.chat_text(prompt)
    m = _VERDICT_RE.search(response)
    if not m:
        raise UnparseableVerdict(response)
    if m.group(1).upper() == "PASS":
        return VerificationResult(True)
    feedback = response[m.end():].lstrip(" :\n") or response.strip()
    return VerificationResult(False, feedback)


def _refine(oracle, dom, instruction, template, feedback, cfg, what):
    prompt = template.format(
        instruction=instruction, feedback=feedback, domain=print_domain(dom)
    )

    def parse_refined(body: str):
        refined = parse_domain(body)
        refined = Domain(dom.name, refined.types, refined.predicates, refined.operators)
        return refined, validate_domain(refined)

    return _request_parsed(oracle, prompt, parse_refined, cfg.r_parse, what=what)


def _hardest_solvable(
    dom: Domain, problems: list[Problem], limits: SearchLimit | None
) -> tuple[Problem, Plan] | None:
    """Highest-difficulty problem the satisficing planner solves, with its plan."""
    for prob in reversed(problems):
        if validate_problem(prob, dom):
            continue
        try:
            task = ground(dom, prob)
        except PddlError:
            continue
        result = solve(task, "satisficing", limits)
        if result.solved:
            return prob, result.plan
    return None


def learn_atomic_domain(
    oracle: OracleClient,
    manifest: DemoManifest,
    cfg: LearnConfig | None = None,
    limits: SearchLimit | None = None,
) -> AtomicDomainRecord:
    """Full closed loop with one restart; raises LearnFailed when both passes fail."""
    cfg = cfg or LearnConfig()

    def single_pass() -> AtomicDomainRecord:
        dom = propose_domain(oracle, manifest, cfg)
        if not cfg.skip_revision:
            dom = revise_domain(oracle, dom, manifest.instruction, cfg)
        if cfg.single_pass:
            return AtomicDomainRecord(dom, manifest.demo_id, 0, None, (), False)
        problems = gen_test_problems(oracle, dom, manifest.instruction, cfg)
        iterations = 0
        score: float | None = None
        for round_idx in range(cfg.l_max):
            last_round = round_idx == cfg.l_max - 1
            score, outcomes = solvability_score(dom, problems, limits)
            if not cfg.skip_solvability and score < cfg.theta:
                if last_round:
                    break
                dom = _refine(
                    oracle,
                    dom,
                    manifest.instruction,
                    prompts.REFINE_FROM_SOLVABILITY,
                    "\n".join(outcomes),
                    cfg,
                    what="solvability refinement",
                )
                iterations += 1
                continue
            if not cfg.skip_verification:
                hardest = _hardest_solvable(dom, problems, limits)
                if hardest is not None:
                    prob, plan = hardest
                    verdict = verify_solution(oracle, dom, prob, plan, manifest.instruction)
                    if not verdict.passed:
                        if last_round:
                            break
                        dom = _refine(
                            oracle,
                            dom,
                            manifest.instruction,
                            prompts.REFINE_FROM_VERIFICATION,
                            verdict.feedback,
                            cfg,
                            what="verification refinement",
                        )
                        iterations += 1
                        continue
            return AtomicDomainRecord(
                dom, manifest.demo_id, iterations, score, tuple(problems), True
            )
        return AtomicDomainRecord(
            dom, manifest.demo_id, iterations, score, tuple(problems), False
        )

    record = single_pass()
    if record.verified or cfg.single_pass:
        return record
    restarted = replace(single_pass(), restarts=1)
    if restarted.verified:
        return restarted
    raise LearnFailed(restarted)


def write_atomic_record(record: AtomicDomainRecord, outdir: str | Path) -> None:
    """Write domain.pddl, meta.json and tests/problem_k.pddl under ``outdir``."""
    out = Path(outdir)
    (out / "tests").mkdir(parents=True, exist_ok=True)
    (out / "domain.pddl").write_text(print_domain(record.domain))
    meta = {
        "demo_id": record.demo_id,
        "verified": record.verified,
        "iterations_used": record.iterations_used,
        "solvability_score": record.solvability_score,
        "restarts": record.restarts,
        "n_test_problems": len(record.test_problems),
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for k, prob in enumerate(record.test_problems, start=1):
        (out / "tests" / f"problem_{k}.pddl").write_text(print_problem(prob))
