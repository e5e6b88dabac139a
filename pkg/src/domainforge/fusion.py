"""Hierarchical fusion of atomic domains along a binary tree.

Each pairwise fuse aligns predicates first (embedding-similarity candidates,
sequential equivalence verdicts, first-domain canonical names), mechanically
rewrites the second domain's operators through the rename map, then aligns
operators the same way, merged operators inheriting the union of preconditions
and effects. Every intermediate domain must validate cleanly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import prompts
from .oracle_client import OracleClient, cosine
from .pddl_core import (
    Domain,
    Literal,
    OperatorSchema,
    PddlError,
    PredicateSchema,
    print_domain,
    validate_domain,
)


class FusionValidationFailed(PddlError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msgs = "; ".join(str(d) for d in self.diagnostics[:5])
        super().__init__(f"fused domain failed validation: {msgs}")


@dataclass(frozen=True)
class FusionConfig:
    tau_p: float = 0.3
    tau_o: float = 0.3
    oracle_mode: str = "llm"  # "llm" | "exact-name" (test mode, no oracle calls)

    def __post_init__(self):
        for tau in (self.tau_p, self.tau_o):
            if not (-1.0 <= tau <= 1.0):
                raise ValueError("similarity thresholds must lie in [-1, 1]")
        if self.oracle_mode not in ("llm", "exact-name"):
            raise ValueError(f"unknown equivalence oracle mode {self.oracle_mode!r}")


@dataclass
class MergeLog:
    """Provenance of fusion decisions. Per-event records are authoritative;
    the top-level rename maps are the chronological composition of all events,
    resolving every absorbed name to the canonical name that survived at the
    root (a name may flip canonicality between branches mid-tree).
    """

    levels: list[dict] = field(default_factory=list)

    def record_event(self, level: int, left: str, right: str, event: dict) -> None:
        self.levels.append({"level": level, "left": left, "right": right, **event})

    def is_empty(self) -> bool:
        return not any(
            ev["predicate_renames"]
            or ev["predicate_merges"]
            or ev["operator_merges"]
            or ev["operator_renames"]
            for ev in self.levels
        )

    def _resolve(self, name: str, key: str) -> str:
        for ev in self.levels:
            name = ev[key].get(name, name)
        return name

    def resolve_predicate(self, name: str) -> str:
        """The final canonical name for ``name`` after every recorded merge."""
        return self._resolve(name, "predicate_renames")

    @property
    def predicate_renames(self) -> dict[str, str]:
        olds = {o for ev in self.levels for o in ev["predicate_renames"]}
        return {o: self.resolve_predicate(o) for o in sorted(olds)}

    @property
    def operator_renames(self) -> dict[str, str]:
        olds = {o for ev in self.levels for o in ev["operator_renames"]}
        return {o: self._resolve(o, "operator_renames") for o in sorted(olds)}

    @property
    def predicate_merges(self) -> list[tuple[str, str]]:
        return [tuple(m) for ev in self.levels for m in ev["predicate_merges"]]

    @property
    def operator_merges(self) -> list[tuple[str, str]]:
        return [tuple(m) for ev in self.levels for m in ev["operator_merges"]]

    def to_json(self) -> str:
        doc = {
            "predicate_renames": self.predicate_renames,
            "predicate_merges": [list(m) for m in self.predicate_merges],
            "operator_merges": [list(m) for m in self.operator_merges],
            "operator_renames": self.operator_renames,
            "levels": self.levels,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def build_fusion_tree(n: int) -> list[list[tuple[int, ...]]]:
    """Merge schedule for ``n`` leaves: levels of (left, right) index pairs.

    Indices refer to the previous level's node list; a trailing odd node is
    promoted unchanged, recorded as a 1-tuple.
    """
    if n < 1:
        raise ValueError("fusion needs at least one domain")
    levels: list[list[tuple[int, ...]]] = []
    width = n
    while width > 1:
        level: list[tuple[int, ...]] = []
        for i in range(0, width - 1, 2):
            level.append((i, i + 1))
        if width % 2 == 1:
            level.append((width - 1,))
        levels.append(level)
        width = len(level)
    return levels


def _render_operator(op: OperatorSchema) -> str:
    pre = " ".join(sorted(str(l) for l in op.preconditions)) or "(and)"
    eff = " ".join(sorted(str(l) for l in op.effects)) or "(and)"
    params = " ".join(f"{v} - {t}" for v, t in op.params)
    return f"name: {op.name}\nparameters: ({params})\npreconditions: {pre}\neffects: {eff}"


_YES_PREFIXES = ("yes", "equivalent", "same")


def _affirmative(response: str) -> bool:
    return response.strip().lower().startswith(_YES_PREFIXES)


def _ranked_pairs(left: list, right: list, vec_left, vec_right, tau, keyer):
    """Equal-arity cross pairs at or above the similarity threshold, ranked."""
    scored = []
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            if a.arity != b.arity:
                continue
            phi = cosine(vec_left[i], vec_right[j])
            if phi < tau:
                continue
            scored.append((-phi, keyer(a), keyer(b), i, j))
    scored.sort()
    return [(i, j, -s) for s, _, _, i, j in scored]


def merge_predicates(
    p1: frozenset[PredicateSchema],
    p2: frozenset[PredicateSchema],
    cfg: FusionConfig,
    oracle: OracleClient | None = None,
) -> tuple[frozenset[PredicateSchema], dict[str, str]]:
    """Align the second predicate set onto the first.

    Returns the merged set and the rename map to apply to the second domain's
    operators (canonical names always come from the first set).
    """
    merged, renames, _ = _merge_predicates_full(p1, p2, cfg, oracle)
    return merged, renames


def _merge_predicates_full(
    p1: frozenset[PredicateSchema],
    p2: frozenset[PredicateSchema],
    cfg: FusionConfig,
    oracle: OracleClient | None = None,
) -> tuple[frozenset[PredicateSchema], dict[str, str], list[tuple[str, str]]]:
    left = sorted(p1, key=lambda p: (p.name, p.arity))
    right = sorted(p2, key=lambda p: (p.name, p.arity))
    absorbed: set[int] = set()
    renames: dict[str, str] = {}
    merges: list[tuple[str, str]] = []

    if cfg.oracle_mode == "exact-name":
        by_name = {(p.name, p.arity) for p in left}
        for j, q in enumerate(right):
            if (q.name, q.arity) in by_name:
                absorbed.add(j)  # canonical schema is the left one
                merges.append((q.name, q.name))
    else:
        if oracle is None:
            raise ValueError("llm oracle mode requires an oracle client")
        renders = [p.render() for p in left] + [q.render() for q in right]
        vectors = oracle.embed(renders) if renders else []
        vl, vr = vectors[: len(left)], vectors[len(left):]
        for i, j, _phi in _ranked_pairs(left, right, vl, vr, cfg.tau_p, lambda p: p.name):
            if j in absorbed:
                continue
            p, q = left[i], right[j]
            if p.name == q.name and p.params == q.params:
                absorbed.add(j)
                merges.append((p.name, q.name))
                continue
            answer = oracle.chat_text(
                prompts.EQUIV_PREDICATE.format(first=p.render(), second=q.render())
            )
            if _affirmative(answer):
                absorbed.add(j)
                merges.append((p.name, q.name))
                if q.name != p.name:
                    renames[q.name] = p.name

    merged: dict[str, PredicateSchema] = {p.name: p for p in left}
    for j, q in enumerate(right):
        if j in absorbed:
            continue
        if q.name not in merged:
            merged[q.name] = q
            continue
        if merged[q.name] == q:
            continue  # structurally identical declaration
        # name collision with a different schema: keep both under a new name
        k = 2
        while f"{q.name}_{k}" in merged:
            k += 1
        fresh = f"{q.name}_{k}"
        merged[fresh] = PredicateSchema(fresh, q.params)
        renames[q.name] = fresh
    return frozenset(merged.values()), renames, merges


def _rewrite_operator(op: OperatorSchema, renames: dict[str, str]) -> OperatorSchema:
    if not renames:
        return op

    def rw(lits: frozenset[Literal]) -> frozenset[Literal]:
        return frozenset(
            Literal(renames.get(l.predicate, l.predicate), l.args, l.positive) for l in lits
        )

    return OperatorSchema(op.name, op.params, rw(op.preconditions), rw(op.effects))


def _remap_literals(op: OperatorSchema, target: OperatorSchema) -> tuple[frozenset, frozenset]:
    """Rewrite op's literals into target's positional parameter names."""
    mapping = {v: tv for (v, _), (tv, _) in zip(op.params, target.params)}

    def rm(lits):
        return frozenset(l.substitute(mapping) for l in lits)

    return rm(op.preconditions), rm(op.effects)


def _conflicting(effects: frozenset[Literal]) -> bool:
    atoms = {l.atom() for l in effects}
    return any(a in effects and a.negated() in effects for a in atoms)


def merge_operators(
    o1: frozenset[OperatorSchema],
    o2: frozenset[OperatorSchema],
    cfg: FusionConfig,
    oracle: OracleClient | None = None,
) -> tuple[frozenset[OperatorSchema], list[tuple[str, str]], dict[str, str]]:
    """Align the second operator set onto the first (after predicate rewrite).

    Confirmed pairs merge into the first operator's name and parameter names
    with unioned preconditions/effects; a union that contains a literal and its
    negation rejects the merge and keeps both operators.
    """
    left = sorted(o1, key=lambda o: o.name)
    right = sorted(o2, key=lambda o: o.name)
    kept: dict[str, OperatorSchema] = {o.name: o for o in left}
    absorbed: set[int] = set()
    merges: list[tuple[str, str]] = []

    def try_merge(target_name: str, candidate: OperatorSchema) -> bool:
        target = kept[target_name]
        pre2, eff2 = _remap_literals(candidate, target)
        eff = target.effects | eff2
        if _conflicting(eff):
            return False
        kept[target_name] = OperatorSchema(
            target.name, target.params, target.preconditions | pre2, eff
        )
        return True

    if cfg.oracle_mode == "exact-name":
        for j, q in enumerate(right):
            if q.name in kept and q.arity == kept[q.name].arity:
                if try_merge(q.name, q):
                    absorbed.add(j)
                    merges.append((q.name, q.name))
    else:
        if oracle is None:
            raise ValueError("llm oracle mode requires an oracle client")
        names = [o.name for o in left] + [o.name for o in right]
        vectors = oracle.embed(names) if names else []
        vl, vr = vectors[: len(left)], vectors[len(left):]
        for i, j, _phi in _ranked_pairs(left, right, vl, vr, cfg.tau_o, lambda o: o.name):
            if j in absorbed:
                continue
            p, q = left[i], right[j]
            if p.name == q.name and p == q:
                absorbed.add(j)
                merges.append((p.name, q.name))
                continue
            answer = oracle.chat_text(
                prompts.EQUIV_OPERATOR.format(
                    first=_render_operator(kept[p.name]), second=_render_operator(q)
                )
            )
            if _affirmative(answer) and try_merge(p.name, q):
                absorbed.add(j)
                merges.append((p.name, q.name))

    op_renames: dict[str, str] = {}
    for j, q in enumerate(right):
        if j in absorbed:
            continue
        if q.name not in kept:
            kept[q.name] = q
            continue
        if kept[q.name] == q:
            continue
        k = 2
        while f"{q.name}_{k}" in kept:
            k += 1
        fresh = f"{q.name}_{k}"
        kept[fresh] = OperatorSchema(fresh, q.params, q.preconditions, q.effects)
        op_renames[q.name] = fresh
    return frozenset(kept.values()), merges, op_renames


def fuse(
    d1: Domain,
    d2: Domain,
    cfg: FusionConfig,
    oracle: OracleClient | None = None,
) -> tuple[Domain, dict]:
    """Fuse two domains; returns the fused domain and this event's log record."""
    preds, renames, pred_merges = _merge_predicates_full(
        d1.predicates, d2.predicates, cfg, oracle
    )
    rewritten = frozenset(_rewrite_operator(o, renames) for o in d2.operators)
    ops, merges, op_renames = merge_operators(d1.operators, rewritten, cfg, oracle)
    types = dict(d2.types)
    types.update(dict(d1.types))  # first-domain precedence on parent conflicts
    fused = Domain(d1.name, tuple(types.items()), preds, ops)
    diags = [d for d in validate_domain(fused) if d.severity == "error"]
    if diags:
        raise FusionValidationFailed(diags)
    event = {
        "predicate_renames": renames,
        "predicate_merges": pred_merges,
        "operator_merges": merges,
        "operator_renames": op_renames,
    }
    return fused, event


def fuse_all(
    domains: list[Domain],
    cfg: FusionConfig,
    oracle: OracleClient | None = None,
    on_node=None,
) -> tuple[Domain, MergeLog]:
    """Execute the binary fusion tree bottom-up; leaves keep caller order.

    ``on_node(level, index, domain)`` is invoked for every intermediate fused
    domain (used to persist per-level snapshots).
    """
    if not domains:
        raise ValueError("fusion needs at least one domain")
    log = MergeLog()
    level_nodes = list(domains)
    for level_idx, level in enumerate(build_fusion_tree(len(domains)), start=1):
        next_nodes = []
        for node_idx, pair in enumerate(level):
            if len(pair) == 1:
                next_nodes.append(level_nodes[pair[0]])  # odd leaf promoted
                continue
            left, right = level_nodes[pair[0]], level_nodes[pair[1]]
            fused, event = fuse(left, right, cfg, oracle)
            log.record_event(level_idx, left.name, right.name, event)
            if on_node is not None:
                on_node(level_idx, node_idx, fused)
            next_nodes.append(fused)
        level_nodes = next_nodes
    return level_nodes[0], log
