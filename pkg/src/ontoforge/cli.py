"""Command-line pipeline: vault, schema, build, refine, eval, export.

Every subcommand reads the shared TOML config, writes its artifacts into the
configured output directory (atomically, via temp-file rename) and exits 0
on success, 1 on violations or errors, 2 on usage problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional

from ontoforge import classgen, evaluate, instancegen, ranking, rdfio, refine, vault
from ontoforge.config import OracleConfig, PipelineConfig, load_config
from ontoforge.errors import AuthoringRuleError, ConfigError, OntoforgeError
from ontoforge.ontology import OntologyGraph, summary
from ontoforge.oracle import HttpOracle, StubOracle
from ontoforge.schema import parse_schema, validate_authoring_rules


class UsageError(Exception):
    pass


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_text(path: Path, text: str) -> None:
    _write_atomic(path, text.encode("utf-8"))


def _write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def _require(path: Optional[Path], what: str) -> Path:
    if path is None:
        raise UsageError(f"config does not set {what}")
    if not path.exists():
        raise UsageError(f"missing input for {what}: {path}")
    return path


def _diag_list(diagnostics) -> list[dict]:
    return [
        {"severity": d.severity, "location": d.location, "message": d.message}
        for d in diagnostics
    ]


def _load_ontology(path: Path) -> OntologyGraph:
    return rdfio.parse(path.read_bytes(), rdfio.format_for_path(path))


def _make_oracle(config: OracleConfig):
    if config.kind == "stub":
        if config.table_path is None:
            raise UsageError("oracle.kind = 'stub' needs oracle.table_path")
        if not config.table_path.exists():
            raise UsageError(f"missing input for oracle.table_path: {config.table_path}")
        oracle = StubOracle.from_file(config.table_path)
        if config.per_call_cost is not None:
            oracle.per_call_cost = config.per_call_cost
        return oracle
    return HttpOracle(
        endpoint=config.endpoint,
        model=config.model,
        api_key_env=config.api_key_env,
        timeout_seconds=config.timeout_seconds,
        retries=config.retries,
        per_call_cost=config.per_call_cost,
    )


# --------------------------------------------------------------------------
# vault


def cmd_vault_scan(config: PipelineConfig, args) -> int:
    root = _require(config.vault_root, "vault_root")
    graph = vault.scan_vault(root)
    report = {
        "notes": len(graph.notes),
        "edges": len(graph.edges),
        "link_refs": len(graph.link_refs),
        "clause_notes": sum(
            1 for n in graph.notes.values() if n.kind is vault.NoteKind.CLAUSE
        ),
        "diagnostics": _diag_list(graph.diagnostics),
    }
    _write_json(config.output_dir / "scan_report.json", report)
    print(f"scanned {report['notes']} notes, {report['edges']} edges")
    return 1 if graph.violations else 0


def cmd_vault_populate(config: PipelineConfig, args) -> int:
    root = _require(config.vault_root, "vault_root")
    graph = vault.scan_vault(root)
    report = vault.populate_concept_notes(graph, root)
    _write_json(config.output_dir / "population_report.json", report.to_dict())
    print(
        f"populated {report.notes_touched} notes with {report.sections_appended} sections"
    )
    errors = [d for d in report.diagnostics if d.severity == "error"]
    return 1 if errors or graph.violations else 0


def cmd_vault_rank(config: PipelineConfig, args) -> int:
    root = _require(config.vault_root, "vault_root")
    graph = vault.scan_vault(root)
    table = ranking.pagerank(
        graph,
        damping=config.pagerank.damping,
        tolerance=config.pagerank.tolerance,
        max_iterations=config.pagerank.max_iterations,
        undirected=args.undirected or config.pagerank.undirected,
    )
    _write_text(config.output_dir / "ranks.json", table.to_json())
    _write_text(config.output_dir / "ranks.csv", table.to_csv())
    top = sorted(table.scores, key=lambda n: (-table.scores[n], n))[:5]
    print("top concepts: " + ", ".join(top))
    return 0


def cmd_vault_context(config: PipelineConfig, args) -> int:
    root = _require(config.vault_root, "vault_root")
    graph = vault.scan_vault(root)
    bundle = vault.collect_context(graph, args.concept, args.depth)
    _write_json(config.output_dir / "context.json", bundle.to_dict())
    print(f"{len(bundle.sections)} sections for {bundle.concept!r} at depth {args.depth}")
    return 0


# --------------------------------------------------------------------------
# schema / build


def cmd_schema_check(config: PipelineConfig, args) -> int:
    schema_path = _require(config.schema_path, "schema_path")
    model = parse_schema(schema_path.read_bytes())
    violations = validate_authoring_rules(model)
    _write_json(
        config.output_dir / "rule_violations.json", [v.to_dict() for v in violations]
    )
    if violations:
        for violation in violations:
            print(violation.describe(), file=sys.stderr)
        return 1
    print(f"schema ok: {len(model.types)} named types")
    return 0


def _build_classes(config: PipelineConfig):
    schema_path = _require(config.schema_path, "schema_path")
    model = parse_schema(schema_path.read_bytes())
    graph = classgen.generate_schema_ontology(model, config.base_iri)
    return model, graph


def cmd_build_classes(config: PipelineConfig, args) -> int:
    _, graph = _build_classes(config)
    _write_atomic(config.output_dir / "classes.ttl", rdfio.serialize(graph, rdfio.TURTLE))
    _write_json(config.output_dir / "class_summary.json", summary(graph))
    print(f"{len(graph.classes)} classes, "
          f"{len(graph.object_properties)} object properties, "
          f"{len(graph.data_properties)} data properties")
    return 0


def _build_instances(config: PipelineConfig, args, write_classes: bool) -> int:
    model, class_graph = _build_classes(config)
    xml_path = _require(config.xml_path, "xml_path")
    document = xml_path.read_bytes()
    graph, report = instancegen.populate_instances(class_graph, document, model)

    runs = getattr(args, "timing_runs", 0) or 0
    if runs:
        samples = []
        for run_index in range(runs):
            started = time.perf_counter()
            instancegen.populate_instances(class_graph, document, model)
            samples.append((run_index, time.perf_counter() - started))
        csv_text = "run_index,seconds\n" + "".join(
            f"{i},{repr(seconds)}\n" for i, seconds in samples
        )
        _write_text(config.output_dir / "timings.csv", csv_text)

    if write_classes:
        _write_atomic(
            config.output_dir / "classes.ttl", rdfio.serialize(class_graph, rdfio.TURTLE)
        )
        _write_json(config.output_dir / "class_summary.json", summary(class_graph))
    _write_atomic(config.output_dir / "ontology.ttl", rdfio.serialize(graph, rdfio.TURTLE))
    _write_json(config.output_dir / "build_report.json", report.to_dict())
    print(
        f"{report.instances_created} instances, "
        f"{report.duplicates_referenced} duplicate references, "
        f"{report.elements_seen} elements seen"
    )
    return 0


def cmd_build_instances(config: PipelineConfig, args) -> int:
    return _build_instances(config, args, write_classes=False)


def cmd_build_all(config: PipelineConfig, args) -> int:
    return _build_instances(config, args, write_classes=True)


# --------------------------------------------------------------------------
# refine


def _ontology_path(config: PipelineConfig, args) -> Path:
    if getattr(args, "ontology", None):
        return Path(args.ontology)
    merged = config.output_dir / "merged.ttl"
    if merged.exists():
        return merged
    return config.output_dir / "ontology.ttl"


def _load_judgments(config: PipelineConfig) -> list[refine.Judgment]:
    path = config.output_dir / "judgments.json"
    if not path.exists():
        raise UsageError(f"missing input for judgments: {path} (run 'refine judge')")
    data = json.loads(path.read_text(encoding="utf-8"))
    return [refine.Judgment.from_dict(item) for item in data]


def cmd_refine_candidates(config: PipelineConfig, args) -> int:
    path = _ontology_path(config, args)
    if not path.exists():
        raise UsageError(f"missing input for ontology: {path} (run 'build all')")
    graph = _load_ontology(path)
    pairs = refine.enumerate_candidates(graph, config.blocking)
    _write_json(
        config.output_dir / "candidates.json",
        [{"a": p.a, "b": p.b, "block_key": p.block_key} for p in pairs],
    )
    print(f"{len(pairs)} candidate pairs")
    return 0


def cmd_refine_judge(config: PipelineConfig, args) -> int:
    path = _ontology_path(config, args)
    if not path.exists():
        raise UsageError(f"missing input for ontology: {path} (run 'build all')")
    graph = _load_ontology(path)
    candidates_path = config.output_dir / "candidates.json"
    if not candidates_path.exists():
        raise UsageError(
            f"missing input for candidates: {candidates_path} (run 'refine candidates')"
        )
    pairs = [
        refine.CandidatePair(item["a"], item["b"], item.get("block_key", ""))
        for item in json.loads(candidates_path.read_text(encoding="utf-8"))
    ]
    oracle = _make_oracle(config.oracle)
    names = refine.display_names(graph, pairs)
    judgments = refine.judge_pairs(
        oracle, pairs, names, max_parallel=config.oracle.max_parallel
    )
    _write_json(
        config.output_dir / "judgments.json", [j.to_dict() for j in judgments]
    )
    invalid = sum(1 for j in judgments if not j.valid)
    positive = sum(1 for j in judgments if j.mergeable)
    print(f"{len(judgments)} judgments, {positive} mergeable, {invalid} invalid")
    return 0


def cmd_refine_cliques(config: PipelineConfig, args) -> int:
    judgments = _load_judgments(config)
    graph = refine.build_merge_graph(judgments)
    cliques = refine.maximal_cliques(graph)
    _write_json(
        config.output_dir / "cliques.json",
        {
            "vertices": len(graph.vertices),
            "edges": len(graph.edges),
            "cliques": [list(c) for c in cliques],
        },
    )
    print(f"{len(cliques)} maximal cliques over {len(graph.vertices)} vertices")
    return 0


def cmd_refine_review_export(config: PipelineConfig, args) -> int:
    path = _ontology_path(config, args)
    if not path.exists():
        raise UsageError(f"missing input for ontology: {path} (run 'build all')")
    graph = _load_ontology(path)
    cliques_path = config.output_dir / "cliques.json"
    if not cliques_path.exists():
        raise UsageError(f"missing input for cliques: {cliques_path} (run 'refine cliques')")
    cliques = [
        tuple(members)
        for members in json.loads(cliques_path.read_text(encoding="utf-8"))["cliques"]
    ]
    entries = refine.export_review(cliques, graph)
    _write_text(config.output_dir / "review.json", refine.review_to_json(entries))
    print(f"{len(entries)} cliques exported for review (all unapproved)")
    return 0


def cmd_refine_apply(config: PipelineConfig, args) -> int:
    review_path = Path(args.review) if args.review else config.output_dir / "review.json"
    if not review_path.exists():
        raise UsageError(f"missing input for review file: {review_path}")
    entries = refine.review_from_json(review_path.read_text(encoding="utf-8"))
    cliques = refine.approved_cliques(entries)
    if not cliques:
        print("no approved cliques in the review file", file=sys.stderr)
        return 1
    source = _ontology_path(config, args)
    if not source.exists():
        raise UsageError(f"missing input for ontology: {source} (run 'build all')")
    graph = _load_ontology(source)
    before = len(graph.instances)
    merged, log = refine.apply_merges(graph, cliques, timestamp=args.timestamp)

    journal_path = config.output_dir / "merge_journal.json"
    if journal_path.exists():
        journal = refine.MergeLog.from_dict(
            json.loads(journal_path.read_text(encoding="utf-8"))
        )
        journal.entries.extend(log.entries)
    else:
        journal = log
    _write_atomic(config.output_dir / "merged.ttl", rdfio.serialize(merged, rdfio.TURTLE))
    _write_json(journal_path, journal.to_dict())
    after = len(merged.instances)
    ratio = (before - after) / before if before else 0.0
    print(
        f"merged {len(cliques)} cliques: {before} -> {after} instances "
        f"(reduction {ratio:.2%})"
    )
    return 0


def cmd_refine_revert(config: PipelineConfig, args) -> int:
    journal_path = config.output_dir / "merge_journal.json"
    if not journal_path.exists():
        raise UsageError(f"missing input for journal: {journal_path}")
    merged_path = config.output_dir / "merged.ttl"
    if not merged_path.exists():
        raise UsageError(f"missing input for merged ontology: {merged_path}")
    journal = refine.MergeLog.from_dict(json.loads(journal_path.read_text(encoding="utf-8")))
    graph = _load_ontology(merged_path)
    reverted = refine.revert(graph, journal, args.entry)
    _write_atomic(merged_path, rdfio.serialize(reverted, rdfio.TURTLE))
    _write_json(journal_path, journal.to_dict())
    print(f"reverted journal entry {args.entry}; {len(reverted.instances)} instances active")
    return 0


# --------------------------------------------------------------------------
# eval


def _load_truth(config: PipelineConfig, args) -> evaluate.GroundTruth:
    path = Path(args.truth) if args.truth else config.ground_truth_path
    path = _require(path, "ground_truth_path")
    return evaluate.GroundTruth.from_json(path.read_text(encoding="utf-8"))


def cmd_eval_pairwise(config: PipelineConfig, args) -> int:
    judgments = _load_judgments(config)
    truth = _load_truth(config, args)
    report = evaluate.score_pairwise(
        judgments,
        truth,
        bin_width=args.bin_width,
        per_call_cost=config.oracle.per_call_cost,
    )
    _write_text(config.output_dir / "eval_pairwise.json", report.to_json())
    print(
        f"tp={report.tp} fp={report.fp} fn={report.fn} tn={report.tn} "
        f"precision={_fmt(report.precision)} recall={_fmt(report.recall)} "
        f"f={_fmt(report.f_score)}"
    )
    return 0


def cmd_eval_grouping(config: PipelineConfig, args) -> int:
    path = Path(args.groups) if args.groups else config.groups_path
    path = _require(path, "groups_path")
    groups = [set(group) for group in json.loads(path.read_text(encoding="utf-8"))]
    truth = _load_truth(config, args)
    if args.adapt_truth:
        truth = evaluate.adapt_ground_truth_to_groups(truth)
    report = evaluate.score_grouping(groups, truth)
    _write_text(config.output_dir / "eval_grouping.json", report.to_json())
    print(
        f"tp={report.tp} fp={report.fp} fn={report.fn} tn={report.tn} "
        f"precision={_fmt(report.precision)} recall={_fmt(report.recall)} "
        f"f={_fmt(report.f_score)}"
    )
    return 0


def cmd_eval_latency(config: PipelineConfig, args) -> int:
    judgments = _load_judgments(config)
    histogram = evaluate.latency_histogram([j.latency for j in judgments], args.bin_width)
    _write_json(config.output_dir / "latency.json", histogram.to_dict())
    _write_text(config.output_dir / "latency_histogram.csv", histogram.to_csv())
    print(f"mean latency: {_fmt(histogram.mean)} s over {len(judgments)} calls")
    return 0


def _fmt(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.4f}"


# --------------------------------------------------------------------------
# export


def cmd_export(config: PipelineConfig, args, fmt: str, suffix: str) -> int:
    source = Path(args.input) if args.input else _ontology_path(config, args)
    if not source.exists():
        raise UsageError(f"missing input for ontology: {source}")
    graph = _load_ontology(source)
    target = config.output_dir / f"ontology.{suffix}"
    _write_atomic(target, rdfio.serialize(graph, fmt))
    print(f"wrote {target}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontoforge",
        description="Annotated notes -> XML/XSD -> OWL/RDF ontology pipeline",
    )
    parser.add_argument(
        "-c", "--config", default="pipeline.toml", help="pipeline TOML config file"
    )
    groups = parser.add_subparsers(dest="group", required=True)

    vault_group = groups.add_parser("vault", help="note vault operations")
    vault_sub = vault_group.add_subparsers(dest="command", required=True)
    vault_sub.add_parser("scan", help="scan the vault into a note graph")
    vault_sub.add_parser("populate", help="copy clause paragraphs into concept notes")
    rank = vault_sub.add_parser("rank", help="rank concepts by PageRank")
    rank.add_argument("--undirected", action="store_true", help="symmetrize the graph")
    context = vault_sub.add_parser("context", help="collect clause context for a concept")
    context.add_argument("--concept", required=True)
    context.add_argument("--depth", type=int, default=2)

    schema_group = groups.add_parser("schema", help="schema operations")
    schema_sub = schema_group.add_subparsers(dest="command", required=True)
    schema_sub.add_parser("check", help="check the three authoring rules")

    build_group = groups.add_parser("build", help="ontology generation")
    build_sub = build_group.add_subparsers(dest="command", required=True)
    build_sub.add_parser("classes", help="generate classes from the schema")
    instances = build_sub.add_parser("instances", help="populate instances from the XML")
    instances.add_argument("--timing-runs", type=int, default=0,
                           help="extra timed runs for the timing histogram CSV")
    build_all = build_sub.add_parser("all", help="classes + instances")
    build_all.add_argument("--timing-runs", type=int, default=0,
                           help="extra timed runs for the timing histogram CSV")

    refine_group = groups.add_parser("refine", help="instance merging")
    refine_sub = refine_group.add_subparsers(dest="command", required=True)
    for name in ("candidates", "judge", "cliques", "review-export"):
        sub = refine_sub.add_parser(name)
        sub.add_argument("--ontology", help="ontology file (default: pipeline artifact)")
    apply_cmd = refine_sub.add_parser("apply", help="apply approved cliques")
    apply_cmd.add_argument("--ontology", help="ontology file (default: pipeline artifact)")
    apply_cmd.add_argument("--review", help="review file (default: output_dir/review.json)")
    apply_cmd.add_argument("--timestamp", help="fixed journal timestamp (reproducible runs)")
    revert_cmd = refine_sub.add_parser("revert", help="revert one journal entry")
    revert_cmd.add_argument("--entry", type=int, required=True)

    eval_group = groups.add_parser("eval", help="oracle evaluation")
    eval_sub = eval_group.add_subparsers(dest="command", required=True)
    pairwise = eval_sub.add_parser("pairwise")
    pairwise.add_argument("--truth", help="ground truth JSON (default from config)")
    pairwise.add_argument("--bin-width", type=float, default=2.5)
    grouping = eval_sub.add_parser("grouping")
    grouping.add_argument("--truth", help="ground truth JSON (default from config)")
    grouping.add_argument("--groups", help="groups JSON (default from config)")
    grouping.add_argument("--adapt-truth", action="store_true",
                          help="clique-close the ground truth before scoring")
    latency = eval_sub.add_parser("latency")
    latency.add_argument("--bin-width", type=float, default=2.5)

    export_group = groups.add_parser("export", help="RDF export")
    export_sub = export_group.add_subparsers(dest="command", required=True)
    for name in ("turtle", "rdfxml"):
        sub = export_sub.add_parser(name)
        sub.add_argument("--input", help="ontology file to convert")
        sub.add_argument("--ontology", help=argparse.SUPPRESS)
    return parser


_COMMANDS = {
    ("vault", "scan"): cmd_vault_scan,
    ("vault", "populate"): cmd_vault_populate,
    ("vault", "rank"): cmd_vault_rank,
    ("vault", "context"): cmd_vault_context,
    ("schema", "check"): cmd_schema_check,
    ("build", "classes"): cmd_build_classes,
    ("build", "instances"): cmd_build_instances,
    ("build", "all"): cmd_build_all,
    ("refine", "candidates"): cmd_refine_candidates,
    ("refine", "judge"): cmd_refine_judge,
    ("refine", "cliques"): cmd_refine_cliques,
    ("refine", "review-export"): cmd_refine_review_export,
    ("refine", "apply"): cmd_refine_apply,
    ("refine", "revert"): cmd_refine_revert,
    ("eval", "pairwise"): cmd_eval_pairwise,
    ("eval", "grouping"): cmd_eval_grouping,
    ("eval", "latency"): cmd_eval_latency,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.group == "export":
            if args.command == "turtle":
                return cmd_export(config, args, rdfio.TURTLE, "ttl")
            return cmd_export(config, args, rdfio.RDFXML, "owl")
        handler = _COMMANDS[(args.group, args.command)]
        return handler(config, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except AuthoringRuleError as exc:
        for violation in exc.violations:
            print(violation.describe(), file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OntoforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
