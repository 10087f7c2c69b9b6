"""Command-line pipeline: compare, series, trend, synth, cluster.

Every subcommand is a thin orchestration over library calls, so anything
the CLI does can be reproduced programmatically. Outputs land in the
directory given by --out (default: current directory) under fixed file
names; all writes go through a temp-file rename so partial files never
appear. Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
from pathlib import Path

from . import breakcheck, synth
from .cograph import (
    FIELD_CHOICES,
    PAIR_CHOICES,
    build_cooccurrence,
    export_graph_json,
    export_graphml,
    top_n_filter,
)
from .community import export_partition_json, louvain, suggest_labels
from .config import PipelineConfig, build_config, read_config_file
from .corpus import TimeWindow, load_corpus, load_windows, save_corpus, window_filter
from .errors import (
    CommunityError,
    ConfigError,
    CorpusError,
    GraphError,
    LexiconError,
    StatsError,
    SynthError,
    TechfluxError,
    TransitionError,
)
from .fileio import atomic_write_text
from .lexicon import compile_lexicon, lexicon_from_records
from .transition import MEASURES, alluvial_export, export_report_json, export_similarity_csv, transition_report

_ERROR_MODULES = (
    (CorpusError, "corpus"),
    (LexiconError, "lexicon"),
    (GraphError, "cograph"),
    (CommunityError, "community"),
    (TransitionError, "transition"),
    (StatsError, "breakcheck"),
    (SynthError, "synth"),
    (ConfigError, "config"),
)


def _error_prefix(exc: TechfluxError) -> str:
    for cls, name in _ERROR_MODULES:
        if isinstance(exc, cls):
            return name
    return "techflux"


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat JSON config file; flags override it")
    sub.add_argument("--lexicon", help="term lexicon JSON file")
    sub.add_argument("--field", choices=FIELD_CHOICES, help="where terms come from (default both)")
    sub.add_argument("--pairs", choices=PAIR_CHOICES, help="which co-occurring pairs become edges (default all)")
    sub.add_argument("--top-n", type=int, dest="top_n", help="keep the N most frequent nodes (default 100)")
    sub.add_argument("--measure", choices=MEASURES, help="cluster similarity measure (default overlap_target)")
    sub.add_argument("--tau", type=float, help="event threshold in (0,1) (default 0.1)")
    sub.add_argument("--resolution", type=float, help="clustering resolution (default 1.0)")
    sub.add_argument("--out", help="output directory (default .)")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    file_values = read_config_file(args.config) if args.config else None
    flag_values = {
        "lexicon_path": getattr(args, "lexicon", None),
        "field": getattr(args, "field", None),
        "pairs": getattr(args, "pairs", None),
        "top_n": getattr(args, "top_n", None),
        "measure": getattr(args, "measure", None),
        "tau": getattr(args, "tau", None),
        "resolution": getattr(args, "resolution", None),
        "weighted_mean": getattr(args, "weighted_mean", None) or None,
        "out_dir": getattr(args, "out", None),
    }
    return build_config(file_values, flag_values)


def _require_lexicon(config: PipelineConfig):
    if not config.lexicon_path:
        raise ConfigError("a lexicon is required: pass --lexicon or set 'lexicon' in the config file")
    return compile_lexicon(config.lexicon_path)


def _out_dir(config: PipelineConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _format_f(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6g}"


def _cluster_header(labels) -> list[str]:
    return [f"{lab.cluster_id}:{lab.suggested_label}" for lab in labels]


def run_compare(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    lexicon = _require_lexicon(config)
    corpus = load_corpus(args.corpus)
    window_t = TimeWindow.parse(args.window_t, label="t")
    window_t1 = TimeWindow.parse(args.window_t1, label="t+1")
    graph_t, part_t = breakcheck.cluster_window(corpus, lexicon, window_t, config)
    graph_t1, part_t1 = breakcheck.cluster_window(corpus, lexicon, window_t1, config)
    report = transition_report((graph_t, part_t), (graph_t1, part_t1), tau=config.tau, measure=config.measure)
    labels_t = _cluster_header(suggest_labels(graph_t, part_t))
    labels_t1 = _cluster_header(suggest_labels(graph_t1, part_t1))
    out = _out_dir(config)
    export_graphml(graph_t, out / "graph_t.graphml", part_t.assignment)
    export_graphml(graph_t1, out / "graph_t1.graphml", part_t1.assignment)
    export_graph_json(graph_t, out / "graph_t.json")
    export_graph_json(graph_t1, out / "graph_t1.json")
    export_partition_json(part_t, out / "partition_t.json")
    export_partition_json(part_t1, out / "partition_t1.json")
    export_similarity_csv(report.similarity, out / "similarity.csv", labels_t, labels_t1)
    export_report_json(report, out / "report.json", labels_t, labels_t1)
    alluvial_export(report, labels_t, labels_t1, out / "alluvial.csv")
    print(f"window t    {window_t.describe()}: {part_t.cluster_count} clusters, modularity {part_t.modularity:.4f}")
    print(f"window t+1  {window_t1.describe()}: {part_t1.cluster_count} clusters, modularity {part_t1.modularity:.4f}")
    print(f"events (tau = {config.tau:g}):")
    for event in report.events:
        sources = ",".join(str(c) for c in event.sources) or "-"
        targets = ",".join(str(c) for c in event.targets) or "-"
        supports = " ".join(f"{v:.3f}" for v in event.supports)
        line = f"  {event.kind:<8} {sources:>12} -> {targets:<12}"
        print(line + (f"  [{supports}]" if supports else ""))
    if report.convergence:
        mean_ci = sum(report.convergence.values()) / len(report.convergence)
        print(f"mean convergence {mean_ci:.4f}, mean novelty {1.0 - mean_ci:.4f}")
    print(f"wrote 9 files to {out}")
    return 0


def run_series(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    lexicon = _require_lexicon(config)
    corpus = load_corpus(args.corpus)
    windows = load_windows(args.windows)
    series = breakcheck.index_series(corpus, lexicon, windows, config, description=str(args.corpus))
    breakpoint_index = args.breakpoint
    out = _out_dir(config)
    breakcheck.export_series_csv(series, out / "series.csv")
    x = [float(i) for i in range(len(series.points))]
    for name, values in (("ci", series.ci_values()), ("ni", series.ni_values())):
        result = breakcheck.chow_test(x, values, breakpoint_index)
        breakcheck.export_break_json(result, out / f"break_{name}.json")
        print(
            f"{name.upper()} series: F = {_format_f(result.f_statistic)}, "
            f"p = {breakcheck.format_p_value(result.p_value)} "
            f"(break at {breakpoint_index}, segments {result.n1}/{result.n2})"
        )
    print(f"wrote series.csv, break_ci.json, break_ni.json to {out}")
    return 0


def _parse_labeled_corpus(raw: str):
    if "=" not in raw:
        raise ConfigError(f"corpus source must be LABEL=PATH, got {raw!r}")
    label, path = raw.split("=", 1)
    if not label or not path:
        raise ConfigError(f"corpus source must be LABEL=PATH, got {raw!r}")
    return label, load_corpus(path, source_label=label)


def _load_terms_file(path: str) -> list[str]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read terms file {path}: {exc}") from exc
    terms = [line.strip() for line in lines]
    terms = [t for t in terms if t and not t.startswith("#")]
    if not terms:
        raise ConfigError(f"terms file {path} lists no terms")
    return terms


def _term_slug(term: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", term.casefold()).strip("_") or "term"


def run_trend(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    lexicon = _require_lexicon(config)
    if len(args.corpus) < 2:
        raise ConfigError(f"trend needs at least 2 corpus sources, got {len(args.corpus)}")
    sources = [_parse_labeled_corpus(raw) for raw in args.corpus]
    seen_labels = set()
    for label, _ in sources:
        if label in seen_labels:
            raise ConfigError(f"duplicate corpus label {label!r}")
        seen_labels.add(label)
    terms = _load_terms_file(args.terms)
    out = _out_dir(config)
    correlation_rows: list[tuple[str, str, str, str]] = []
    for term in terms:
        counts = breakcheck.term_trend(sources, lexicon, term, args.period)
        breakcheck.export_trend_csv(counts, out / f"trend_{_term_slug(term)}.csv")
        periods = sorted({p for per in counts.values() for p in per})
        labels = sorted(counts)
        for a_idx in range(len(labels)):
            for b_idx in range(a_idx + 1, len(labels)):
                a, b = labels[a_idx], labels[b_idx]
                series_a = [float(counts[a].get(p, 0)) for p in periods]
                series_b = [float(counts[b].get(p, 0)) for p in periods]
                try:
                    r = breakcheck.pearson(series_a, series_b)
                except StatsError as exc:
                    print(f"trend: {term!r} between {a} and {b}: {exc}", file=sys.stderr)
                    continue
                correlation_rows.append((term, a, b, f"{r:.6f}"))
    lines = ["term,source_a,source_b,pearson_r"]
    lines += [",".join(row) for row in correlation_rows]
    atomic_write_text(out / "correlations.csv", "\n".join(lines) + "\n")
    print(f"wrote {len(terms)} trend files and correlations.csv to {out}")
    return 0


def run_synth(args: argparse.Namespace) -> int:
    spec = synth.load_plant_spec(args.plant_spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    corpus, truth = synth.generate_corpus(spec, with_text=args.with_text)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, out / "corpus.jsonl")
    synth.export_ground_truth(truth, out / "ground_truth.json")
    records = synth.lexicon_records(truth)
    lexicon_from_records(records, where="generated lexicon")
    atomic_write_text(out / "lexicon.json", json.dumps(records, indent=2) + "\n")
    print(
        f"generated {len(corpus.documents)} documents over {len(spec.windows)} windows, "
        f"{len(truth.terms())} terms, seed {spec.seed}"
    )
    print(f"wrote corpus.jsonl, ground_truth.json, lexicon.json to {out}")
    return 0


def run_cluster(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    lexicon = _require_lexicon(config)
    corpus = load_corpus(args.corpus)
    if args.window:
        window = TimeWindow.parse(args.window)
        corpus = window_filter(corpus, window)
    graph = build_cooccurrence(corpus, lexicon, field=config.field, pairs=config.pairs)
    graph = top_n_filter(graph, config.top_n)
    partition = louvain(graph, config.resolution)
    out = _out_dir(config)
    export_graphml(graph, out / "graph.graphml", partition.assignment)
    export_graph_json(graph, out / "graph.json")
    export_partition_json(partition, out / "partition.json")
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges, "
          f"{partition.cluster_count} clusters, modularity {partition.modularity:.4f}")
    for label in suggest_labels(graph, partition):
        members = len(partition.members(label.cluster_id))
        print(f"  cluster {label.cluster_id} ({members} nodes): {', '.join(label.top_tags)}")
    print(f"wrote graph.graphml, graph.json, partition.json to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="techflux",
        description="Co-occurrence network pipeline for tracking technology cluster evolution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="cluster two windows and compare them")
    compare.add_argument("--corpus", required=True, help="corpus file (JSONL or CSV)")
    compare.add_argument("--window-t", required=True, dest="window_t", metavar="START:END")
    compare.add_argument("--window-t1", required=True, dest="window_t1", metavar="START:END")
    _add_common_flags(compare)
    compare.set_defaults(func=run_compare)

    series = sub.add_parser("series", help="index time series over windows plus break test")
    series.add_argument("--corpus", required=True, help="corpus file (JSONL or CSV)")
    series.add_argument("--windows", required=True, help="JSON file listing the windows")
    series.add_argument("--breakpoint", required=True, type=int, help="series index starting the second segment")
    series.add_argument("--weighted-mean", action="store_true", dest="weighted_mean",
                        help="weight cluster indices by cluster size")
    _add_common_flags(series)
    series.set_defaults(func=run_series)

    trend = sub.add_parser("trend", help="per-term document counts across labeled corpora")
    trend.add_argument("--corpus", action="append", required=True, metavar="LABEL=PATH",
                       help="labeled corpus source; repeat for each source")
    trend.add_argument("--terms", required=True, help="text file, one term per line")
    trend.add_argument("--period", choices=breakcheck.TREND_PERIODS, default="year")
    _add_common_flags(trend)
    trend.set_defaults(func=run_trend)

    synth_cmd = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    synth_cmd.add_argument("--plant-spec", required=True, dest="plant_spec", help="plant spec JSON file")
    synth_cmd.add_argument("--seed", type=int, help="override the plant spec's seed")
    synth_cmd.add_argument("--with-text", action="store_true", dest="with_text",
                           help="emit terms inside sentences instead of tags")
    synth_cmd.add_argument("--out", help="output directory (default .)")
    synth_cmd.set_defaults(func=run_synth)

    cluster = sub.add_parser("cluster", help="build and cluster a single window")
    cluster.add_argument("--corpus", required=True, help="corpus file (JSONL or CSV)")
    cluster.add_argument("--window", metavar="START:END", help="optional date filter")
    _add_common_flags(cluster)
    cluster.set_defaults(func=run_cluster)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TechfluxError as exc:
        print(f"techflux {_error_prefix(exc)}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"techflux internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
