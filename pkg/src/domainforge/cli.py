"""Command-line entry point wiring all modules into subcommands.

Exit codes: 0 success, 1 operational error (stage-tagged message on stderr),
2 usage error. Data goes to stdout, logs to stderr, artifacts under --out.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import domain_graph, keyframes
from .config import AppConfig, load_config
from .domain_learn import DemoManifest, LearnFailed, learn_atomic_domain, write_atomic_record
from .evaluation import emit_report, run_suite
from .fusion import fuse_all
from .oracle_client import OracleFailure, Transcript
from .pddl_core import (
    Domain,
    PddlError,
    parse_domain,
    parse_problem,
    print_domain,
    validate_domain,
)
from .task_plan import StageError, TaskSpec, plan_task, write_trace


def _fail(stage: str, message: str) -> int:
    print(f"error [{stage}]: {message}", file=sys.stderr)
    return 1


def _load_domain(path: str) -> Domain:
    return parse_domain(Path(path).read_text())


def cmd_validate(args, cfg: AppConfig) -> int:
    """Validate PDDL files; problems are checked against a domain parsed earlier."""
    domains: dict[str, Domain] = {}
    clean = True
    for path in args.files:
        text = Path(path).read_text()
        try:
            if "(:domain" in text.replace(" ", ""):
                # looks like a problem: needs one of the domains already parsed
                prob = None
                last_error = None
                for dom in domains.values():
                    try:
                        prob = parse_problem(text, dom)
                        break
                    except PddlError as exc:
                        last_error = exc
                if prob is None:
                    raise last_error or PddlError(f"no matching domain loaded for {path}")
                print(f"{path}: ok (problem {prob.name})")
            else:
                dom = parse_domain(text)
                diags = validate_domain(dom)
                for d in diags:
                    print(dataclasses.replace(d, file=str(path)))
                if diags:
                    clean = False
                else:
                    domains[dom.name] = dom
                    print(f"{path}: ok (domain {dom.name})")
        except PddlError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            clean = False
    return 0 if clean else 1


def cmd_keyframes(args, cfg: AppConfig) -> int:
    src = Path(args.frames)
    if src.is_dir():
        seq = keyframes.load_frames_dir(src)
        ks = keyframes.segment_demo(seq, args.window)
        print(keyframes.keyframes_to_json(ks, seq.sources))
    else:
        series = keyframes.energies_from_csv(src)
        ks = keyframes.extract_keyframes(series, args.window)
        print(keyframes.keyframes_to_json(ks))
    return 0


def cmd_learn(args, cfg: AppConfig) -> int:
    manifest = DemoManifest.from_json(Path(args.manifest).read_text())
    oracle = cfg.make_oracle()
    learn_cfg = dataclasses.replace(
        cfg.learn,
        skip_revision=args.no_revision,
        skip_solvability=args.no_solvability,
        skip_verification=args.no_verification,
        single_pass=args.single_pass,
    )
    outdir = Path(args.out) / manifest.demo_id
    try:
        record = learn_atomic_domain(oracle, manifest, learn_cfg, cfg.search_limits)
    except LearnFailed as exc:
        write_atomic_record(exc.record, outdir)
        return _fail("learn", f"not verified after restart; record in {outdir}")
    write_atomic_record(record, outdir)
    print(f"{outdir}/domain.pddl")
    return 0


def cmd_fuse(args, cfg: AppConfig) -> int:
    paths = [
        line.strip()
        for line in Path(args.domain_list).read_text().splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    domains = [_load_domain(p) for p in paths]
    oracle = cfg.make_oracle() if cfg.fusion.oracle_mode == "llm" else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    on_node = None
    if args.write_levels:
        levels_dir = out / "levels"
        levels_dir.mkdir(exist_ok=True)

        def on_node(level, index, dom):
            (levels_dir / f"level{level}_node{index}.pddl").write_text(print_domain(dom))

    fused, log = fuse_all(domains, cfg.fusion, oracle, on_node=on_node)
    (out / "fused.pddl").write_text(print_domain(fused))
    (out / "merge_log.json").write_text(log.to_json() + "\n")
    print(out / "fused.pddl")
    return 0


def cmd_graph(args, cfg: AppConfig) -> int:
    path = Path(args.source)
    if path.suffix == ".json":
        graph = domain_graph.graph_from_json(path.read_text())
    else:
        graph = domain_graph.to_graph(_load_domain(str(path)), path.stem)
    if args.action == "stats":
        s = domain_graph.stats(graph)
        print(
            json.dumps(
                {
                    "n_operators": s.n_operators,
                    "n_predicates": s.n_predicates,
                    "n_edges": s.n_edges,
                    "n_categories": s.n_categories,
                },
                indent=2,
                sort_keys=True,
            )
        )
    else:
        print(domain_graph.export_dot(graph))
    return 0


def cmd_plan(args, cfg: AppConfig) -> int:
    fused = _load_domain(args.domain)
    doc = json.loads(Path(args.task).read_text())
    task = TaskSpec.from_json(doc, fused)
    oracle = cfg.make_oracle()
    try:
        result = plan_task(
            oracle,
            fused,
            task,
            search_limits=cfg.search_limits,
            ground_limits=cfg.ground_limits,
            use_grouping=not args.no_grouping,
            use_filtering=not args.no_filtering,
            r_parse=cfg.learn.r_parse,
        )
    except StageError as exc:
        return _fail(exc.stage, str(exc.cause))
    if args.out:
        write_trace(result.trace, args.out)
    if result.plan is None:
        return _fail("solve", result.outcome)
    print(result.plan.render())
    return 0


def cmd_eval(args, cfg: AppConfig) -> int:
    fused = _load_domain(args.domain)
    suite = json.loads(Path(args.suite).read_text())
    tasks = [TaskSpec.from_json(doc, fused) for doc in suite]
    transcript = Transcript(cfg.transcript_path) if cfg.transcript_path else None

    def factory():
        return cfg.make_oracle(transcript)

    try:
        result = run_suite(
            tasks,
            fused,
            factory,
            search_limits=cfg.search_limits,
            ground_limits=cfg.ground_limits,
            use_grouping=not args.no_grouping,
            use_filtering=not args.no_filtering,
            max_workers=cfg.eval.max_workers,
        )
    except KeyboardInterrupt:
        print("interrupted; no report", file=sys.stderr)
        return 1
    print(emit_report(result.report, args.format))
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "report.json").write_text(emit_report(result.report, "json") + "\n")
        for trace in result.traces:
            write_trace(trace, outdir)
    if result.report.sr < args.min_sr:
        print(f"SR {result.report.sr:.3f} below floor {args.min_sr}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="domainforge",
        description="Learn PDDL domains from demonstrations, fuse them, plan tasks.",
    )
    parser.add_argument("--config", help="TOML config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate PDDL domain/problem files")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("keyframes", help="extract keyframes from frames dir or energy CSV")
    p.add_argument("frames", help="directory of PGM/PPM frames or CSV of index,energy")
    p.add_argument("--window", type=int, default=15, help="sliding window half-width")
    p.set_defaults(fn=cmd_keyframes)

    p = sub.add_parser("learn", help="learn an atomic domain from a demo manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default="out")
    p.add_argument("--no-revision", action="store_true")
    p.add_argument("--no-solvability", action="store_true")
    p.add_argument("--no-verification", action="store_true")
    p.add_argument("--single-pass", action="store_true")
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("fuse", help="fuse the domains listed in a text file")
    p.add_argument("domain_list", help="file with one domain.pddl path per line")
    p.add_argument("--out", default="out")
    p.add_argument("--write-levels", action="store_true",
                   help="also write every intermediate fused domain")
    p.set_defaults(fn=cmd_fuse)

    p = sub.add_parser("graph", help="domain graph stats or DOT export")
    p.add_argument("action", choices=["stats", "dot"])
    p.add_argument("source", help="domain .pddl or graph .json")
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("plan", help="plan one task against a fused domain")
    p.add_argument("domain")
    p.add_argument("task", help="task spec JSON")
    p.add_argument("--out", default=None, help="directory for the trace JSON")
    p.add_argument("--no-grouping", action="store_true")
    p.add_argument("--no-filtering", action="store_true")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("eval", help="run an evaluation suite")
    p.add_argument("domain")
    p.add_argument("suite", help="suite JSON (list of task specs)")
    p.add_argument("--format", choices=["json", "csv", "markdown"], default="markdown")
    p.add_argument("--out", default=None)
    p.add_argument("--min-sr", type=float, default=0.0, help="CI gate: nonzero exit below")
    p.add_argument("--no-grouping", action="store_true")
    p.add_argument("--no-filtering", action="store_true")
    p.set_defaults(fn=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError) as exc:
        return _fail("config", str(exc))
    try:
        return args.fn(args, cfg)
    except (PddlError, OracleFailure, OSError, json.JSONDecodeError) as exc:
        return _fail(args.command, str(exc))


if __name__ == "__main__":
    sys.exit(main())
