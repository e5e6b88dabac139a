"""Domains as symbolic knowledge graphs: predicate/operator nodes, pre/eff edges.

Nodes are keyed by (name, arity) for predicates and by name for operators.
Edges are sets labeled with polarity, so the predicate-level signature of each
operator (which predicates appear in its preconditions/effects, and how) can be
reconstructed exactly. Graphs are immutable snapshots; union builds new graphs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .pddl_core import Domain

PredKey = tuple[str, int]
# pre edge: (predicate key, operator name, positive)
PreEdge = tuple[PredKey, str, bool]
# eff edge: (operator name, predicate key, positive)
EffEdge = tuple[str, PredKey, bool]

_SUFFIX_RE = re.compile(r"#\d+$")
_TRAILING_DIGITS_RE = re.compile(r"[0-9]+$")


@dataclass(frozen=True)
class GraphStats:
    n_operators: int
    n_predicates: int
    n_edges: int
    n_categories: int


@dataclass(frozen=True)
class DomainGraph:
    predicate_nodes: frozenset[PredKey] = frozenset()
    operator_nodes: frozenset[str] = frozenset()
    pre_edges: frozenset[PreEdge] = frozenset()
    eff_edges: frozenset[EffEdge] = frozenset()
    # provenance: node -> source atomic-domain ids
    pred_sources: tuple[tuple[PredKey, frozenset[str]], ...] = ()
    op_sources: tuple[tuple[str, frozenset[str]], ...] = ()

    def pred_provenance(self) -> dict[PredKey, frozenset[str]]:
        return dict(self.pred_sources)

    def op_provenance(self) -> dict[str, frozenset[str]]:
        return dict(self.op_sources)

    def operator_signature(self, op: str) -> tuple[frozenset, frozenset]:
        """(pre, eff) predicate-level signature of one operator node."""
        pre = frozenset((p, pos) for p, o, pos in self.pre_edges if o == op)
        eff = frozenset((p, pos) for o, p, pos in self.eff_edges if o == op)
        return pre, eff


def _freeze_sources(d: dict) -> tuple:
    return tuple(sorted((k, frozenset(v)) for k, v in d.items()))


def to_graph(dom: Domain, source_id: str = "") -> DomainGraph:
    """Interpret ``dom`` as a graph; edge sets mirror pre/eff literal sets."""
    source = frozenset({source_id}) if source_id else frozenset()
    pred_nodes = {(p.name, p.arity) for p in dom.predicates}
    op_nodes = {o.name for o in dom.operators}
    pre_edges: set[PreEdge] = set()
    eff_edges: set[EffEdge] = set()
    for op in dom.operators:
        for lit in op.preconditions:
            pre_edges.add(((lit.predicate, lit.arity), op.name, lit.positive))
        for lit in op.effects:
            eff_edges.add((op.name, (lit.predicate, lit.arity), lit.positive))
    return DomainGraph(
        predicate_nodes=frozenset(pred_nodes),
        operator_nodes=frozenset(op_nodes),
        pre_edges=frozenset(pre_edges),
        eff_edges=frozenset(eff_edges),
        pred_sources=_freeze_sources({p: source for p in pred_nodes}),
        op_sources=_freeze_sources({o: source for o in op_nodes}),
    )


def _op_body(g: DomainGraph, op: str) -> tuple:
    return g.operator_signature(op)


def union(graphs: list[DomainGraph]) -> DomainGraph:
    """Union of graphs: exact-key node merging with provenance accumulation.

    Operator-name collisions with differing pre/eff signatures keep both nodes,
    the later one under a suffixed name (``name#2``, ``name#3``, ...).
    """
    pred_nodes: set[PredKey] = set()
    pred_prov: dict[PredKey, set[str]] = {}
    op_bodies: dict[str, tuple] = {}  # final node name -> signature
    op_prov: dict[str, set[str]] = {}
    pre_edges: set[PreEdge] = set()
    eff_edges: set[EffEdge] = set()

    for g in graphs:
        g_pred_prov = g.pred_provenance()
        g_op_prov = g.op_provenance()
        for p in sorted(g.predicate_nodes):
            pred_nodes.add(p)
            pred_prov.setdefault(p, set()).update(g_pred_prov.get(p, ()))
        renames: dict[str, str] = {}
        for o in sorted(g.operator_nodes):
            body = _op_body(g, o)
            base = _SUFFIX_RE.sub("", o)
            # find an existing node with this base name and identical body
            target = None
            k = 1
            while True:
                candidate = base if k == 1 else f"{base}#{k}"
                if candidate not in op_bodies:
                    break
                if op_bodies[candidate] == body:
                    target = candidate
                    break
                k += 1
            if target is None:
                target = base if k == 1 else f"{base}#{k}"
                op_bodies[target] = body
            if target != o:
                renames[o] = target
            op_prov.setdefault(target, set()).update(g_op_prov.get(o, ()))
        for p, o, pos in g.pre_edges:
            pre_edges.add((p, renames.get(o, o), pos))
        for o, p, pos in g.eff_edges:
            eff_edges.add((renames.get(o, o), p, pos))

    return DomainGraph(
        predicate_nodes=frozenset(pred_nodes),
        operator_nodes=frozenset(op_bodies),
        pre_edges=frozenset(pre_edges),
        eff_edges=frozenset(eff_edges),
        pred_sources=_freeze_sources(pred_prov),
        op_sources=_freeze_sources(op_prov),
    )


def normalize_category(name: str) -> str:
    """Lexical operator-name normalization: drop #k suffixes and trailing digits."""
    out = _SUFFIX_RE.sub("", name.lower())
    out = _TRAILING_DIGITS_RE.sub("", out)
    return out.rstrip("_-")


def stats(g: DomainGraph) -> GraphStats:
    return GraphStats(
        n_operators=len(g.operator_nodes),
        n_predicates=len(g.predicate_nodes),
        n_edges=len(g.pre_edges) + len(g.eff_edges),
        n_categories=len({normalize_category(o) for o in g.operator_nodes}),
    )


def _pred_id(p: PredKey) -> str:
    return f"pred:{p[0]}/{p[1]}"


def export_dot(g: DomainGraph) -> str:
    """Deterministic DOT rendering; predicates are ellipses, operators boxes."""
    lines = ["digraph domain {"]
    for p in sorted(g.predicate_nodes):
        lines.append(f'  "{_pred_id(p)}" [shape=ellipse label="{p[0]}/{p[1]}"];')
    for o in sorted(g.operator_nodes):
        lines.append(f'  "op:{o}" [shape=box label="{o}"];')
    for p, o, pos in sorted(g.pre_edges):
        style = "solid" if pos else "dashed"
        lines.append(f'  "{_pred_id(p)}" -> "op:{o}" [style={style}];')
    for o, p, pos in sorted(g.eff_edges):
        style = "solid" if pos else "dashed"
        lines.append(f'  "op:{o}" -> "{_pred_id(p)}" [style={style}];')
    lines.append("}")
    return "\n".join(lines)


def graph_to_json(g: DomainGraph) -> str:
    doc = {
        "predicates": [[n, a] for n, a in sorted(g.predicate_nodes)],
        "operators": sorted(g.operator_nodes),
        "pre_edges": [[p[0], p[1], o, pos] for p, o, pos in sorted(g.pre_edges)],
        "eff_edges": [[o, p[0], p[1], pos] for o, p, pos in sorted(g.eff_edges)],
        "pred_sources": [[p[0], p[1], sorted(ids)] for p, ids in sorted(g.pred_sources)],
        "op_sources": [[o, sorted(ids)] for o, ids in sorted(g.op_sources)],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def graph_from_json(text: str) -> DomainGraph:
    doc = json.loads(text)
    return DomainGraph(
        predicate_nodes=frozenset((n, a) for n, a in doc["predicates"]),
        operator_nodes=frozenset(doc["operators"]),
        pre_edges=frozenset(((p, a), o, pos) for p, a, o, pos in doc["pre_edges"]),
        eff_edges=frozenset((o, (p, a), pos) for o, p, a, pos in doc["eff_edges"]),
        pred_sources=tuple(
            sorted(((p, a), frozenset(ids)) for p, a, ids in doc["pred_sources"])
        ),
        op_sources=tuple(sorted((o, frozenset(ids)) for o, ids in doc["op_sources"])),
    )
