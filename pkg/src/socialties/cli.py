"""Command-line front end.

Subcommands run one stage each against a run directory of serialized
intermediates; ``run`` composes them end-to-end.  The pipeline itself stages
through disk, so a full run is byte-identical to running the subcommands one
by one on the same directory.  Machine outputs go only to files; progress,
timings and counters go to stderr.  Each stage failure maps to its own exit
code (0 ok, 2 config, 3 ingest, 4 classify, 5 metrics, 6 validate, 7 export).
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import tempfile
import time
from dataclasses import fields
from pathlib import Path

from . import serialization as ser
from .classifier import classify
from .config import ConfigError, RunConfig, load_config
from .export import export_dot, export_graphml, export_tables
from .ingest import filter_by_activity, parse_coauthorship, parse_qa
from .netmetrics import compute_metrics
from .relevance import extract_relevant, randomization_filter
from .temporal_graph import simple_view
from .validation import class_distributions, existence_time_buckets

log = logging.getLogger("socialties")

EXIT_OK = 0
EXIT_CONFIG = 2
STAGE_EXIT = {"ingest": 3, "classify": 4, "metrics": 5, "validate": 6, "export": 7}

# config keys each subcommand owns when updating a run dir's config.resolved
OWNED_KEYS = {
    "ingest": (
        "input", "schema", "strict", "compact_snapshots", "min_active_snapshots",
        "min_instances", "stemming", "lowercase", "min_token_length", "stop_list",
    ),
    "classify": ("method", "percentile", "filter_trials", "filter_alpha", "seed", "workers"),
    "metrics": (
        "betweenness", "betweenness_seed", "pair_counting", "clustering",
        "pagerank_damping", "pagerank_tol", "pagerank_max_iter",
    ),
    "validate": ("alpha", "buckets"),
    "export": (),
}


class StageFailure(Exception):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


def _persist_config(
    cfg: RunConfig, write_dir: Path, stage: str | None, existing: Path | None = None
) -> None:
    """Write config.resolved; subcommands only own their stage's keys."""
    if stage is not None and existing is not None and existing.exists():
        merged = load_config(existing)
        for key in OWNED_KEYS[stage]:
            setattr(merged, key, getattr(cfg, key))
        cfg = merged
    (write_dir / "config.resolved").write_text(cfg.to_text(), encoding="utf-8")


def stage_ingest(cfg: RunConfig, read_dir: Path, write_dir: Path) -> None:
    t0 = time.perf_counter()
    path = Path(cfg.input)
    try:
        with path.open(encoding="utf-8") as handle:
            parser = parse_coauthorship if cfg.schema == "coauthorship" else parse_qa
            kwargs = {} if cfg.schema == "coauthorship" else {
                "compact_snapshots": cfg.compact_snapshots
            }
            result = parser(handle, cfg.tokenizer_config(), strict=cfg.strict, **kwargs)
    except OSError as err:
        raise ValueError(f"cannot read input {path}: {err}") from err
    if cfg.min_active_snapshots > 1 or cfg.min_instances > 1:
        result = filter_by_activity(
            result,
            min_active_snapshots=cfg.min_active_snapshots,
            min_instances=cfg.min_instances,
        )
    if not result.instances:
        raise ValueError(f"no usable interaction records in {path}")
    # canonical order: snapshot-major, input order within a snapshot
    result.instances = sorted(result.instances, key=lambda e: e.snapshot)
    ser.write_network(write_dir, result)
    log.info(
        "ingest: %d instances, %d actors, %d attributes, t=%d (%.2fs)",
        len(result.instances), len(result.actors), len(result.attributes),
        result.t, time.perf_counter() - t0,
    )


def stage_classify(cfg: RunConfig, read_dir: Path, write_dir: Path) -> None:
    t0 = time.perf_counter()
    network = ser.read_network(read_dir)
    net = network.network()
    if cfg.filter_trials > 0:
        report = randomization_filter(
            net,
            trials=cfg.filter_trials,
            alpha=cfg.filter_alpha,
            seed=cfg.seed,
            method=cfg.method,
            percentile_method=cfg.percentile,
            workers=cfg.effective_workers(),
        )
        ser.write_randomization(write_dir, report, network.attributes)
        log.info(
            "classify: randomization filter excluded %d/%d attributes (%d trials)",
            len(report.excluded), len(report.frequencies), report.trials,
        )
        if report.excluded:
            net = net.without_attributes(report.excluded)
    relmap = extract_relevant(net, cfg.method, percentile_method=cfg.percentile)
    result = classify(net, relmap)
    ser.write_relevance(write_dir, relmap, network.actors, network.attributes)
    ser.write_labels(write_dir, result, network.actors)
    log.info(
        "classify: %d edge labels, %d node labels (%.2fs)",
        len(result.edge_labels), len(result.node_labels), time.perf_counter() - t0,
    )


def stage_metrics(cfg: RunConfig, read_dir: Path, write_dir: Path) -> None:
    t0 = time.perf_counter()
    network = ser.read_network(read_dir)
    g = simple_view(network.network())
    metrics = compute_metrics(g, cfg.metrics_config())
    ser.write_metrics(write_dir, metrics, network.actors)
    log.info(
        "metrics: %d nodes, %d edges (%.2fs)",
        g.num_nodes(), g.num_edges(), time.perf_counter() - t0,
    )


def _test_to_dict(res) -> dict:
    return {
        "test": res.test,
        "groups": list(res.groups),
        "statistic": res.statistic,
        "pvalue": res.pvalue,
        "alpha": res.alpha,
        "reject": res.reject,
        "degenerate": res.degenerate,
    }


def _report_to_dict(report) -> list[dict]:
    out = []
    for dist in report.distributions:
        out.append(
            {
                "metric": dist.metric,
                "target": dist.target,
                "summaries": {
                    cls: vars(s) for cls, s in sorted(dist.summaries.items())
                },
                "omnibus": _test_to_dict(dist.omnibus) if dist.omnibus else None,
                "pairwise": [
                    _test_to_dict(res)
                    for _, res in sorted(dist.pairwise.items())
                ],
                "skipped": list(dist.skipped),
            }
        )
    return out


def stage_validate(cfg: RunConfig, read_dir: Path, write_dir: Path) -> None:
    t0 = time.perf_counter()
    network = ser.read_network(read_dir)
    net = network.network()
    labels = ser.read_labels(read_dir, network)
    metrics = ser.read_metrics(read_dir, network.actors)
    report = class_distributions(labels, metrics, cfg.alpha)
    buckets = existence_time_buckets(net, labels, metrics, cfg.alpha, cfg.bucket_bounds())
    doc = {
        "format": ser.FORMAT_VERSION,
        "alpha": cfg.alpha,
        "distributions": _report_to_dict(report),
        "buckets": [
            {
                "bucket": b.label,
                "n": len(b.nodes),
                "distributions": _report_to_dict(b.report) if b.report else [],
            }
            for b in buckets
        ],
    }
    (write_dir / "validation.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    rejected = sum(
        1 for d in report.distributions
        if d.omnibus is not None and d.omnibus.reject
    )
    log.info(
        "validate: %d/%d omnibus tests reject at alpha=%g (%.2fs)",
        rejected, len(report.distributions), cfg.alpha, time.perf_counter() - t0,
    )


def stage_export(cfg: RunConfig, read_dir: Path, write_dir: Path, formats) -> None:
    t0 = time.perf_counter()
    network = ser.read_network(read_dir)
    net = network.network()
    g = simple_view(net)
    labels = ser.read_labels(read_dir, network)
    names = network.actors.name
    have_metrics = (read_dir / "metrics_nodes.tsv").exists()
    metrics = ser.read_metrics(read_dir, network.actors) if have_metrics else None
    for fmt in formats:
        if fmt == "dot":
            (write_dir / "graph.dot").write_text(export_dot(g, labels, names), encoding="utf-8")
        elif fmt == "graphml":
            (write_dir / "graph.graphml").write_text(
                export_graphml(g, labels, metrics, names), encoding="utf-8"
            )
        elif fmt == "tsv":
            report = buckets = None
            if metrics is not None:
                report = class_distributions(labels, metrics, cfg.alpha)
                buckets = existence_time_buckets(
                    net, labels, metrics, cfg.alpha, cfg.bucket_bounds()
                )
            export_tables(write_dir, labels, metrics, report, buckets, names)
        else:
            raise ValueError(f"unknown export format {fmt!r}")
    log.info("export: %s (%.2fs)", ",".join(formats), time.perf_counter() - t0)


def _run_stage(stage: str, fn, cfg: RunConfig, run_dir: Path, *args) -> None:
    """Run one subcommand transactionally: stage files, then move into place."""
    run_dir.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{stage}-", dir=run_dir.parent))
    try:
        fn(cfg, run_dir, tmp, *args)
        _persist_config(cfg, tmp, stage, existing=run_dir / "config.resolved")
        for item in sorted(tmp.iterdir()):
            target = run_dir / item.name
            if target.exists():
                target.unlink()
            shutil.move(str(item), str(target))
    except BaseException as err:
        shutil.rmtree(tmp, ignore_errors=True)
        raise StageFailure(stage, err) from err
    shutil.rmtree(tmp, ignore_errors=True)


def run_pipeline(cfg: RunConfig) -> Path:
    """ingest -> classify -> metrics -> validate -> export, atomically.

    Everything is produced in a staging directory next to the target and
    renamed into place only when every stage succeeded, so failures leave no
    partial outputs.  The resolved config is persisted with the artifacts.
    """
    cfg.validate()
    if not cfg.input:
        raise ConfigError("config needs an input path")
    if not cfg.out:
        raise ConfigError("config needs an output directory")
    out = Path(cfg.out)
    if out.exists():
        raise ConfigError(f"output directory {out} already exists")
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".run-", dir=out.parent))
    stages = (
        ("ingest", stage_ingest, ()),
        ("classify", stage_classify, ()),
        ("metrics", stage_metrics, ()),
        ("validate", stage_validate, ()),
        ("export", stage_export, (("dot", "graphml", "tsv"),)),
    )
    try:
        for stage, fn, extra in stages:
            fn(cfg, staging, staging, *extra)
        _persist_config(cfg, staging, None)
    except BaseException as err:
        shutil.rmtree(staging, ignore_errors=True)
        if isinstance(err, StageFailure):
            raise
        stage = _stage_of(err, stages)
        raise StageFailure(stage, err) from err
    staging.rename(out)
    log.info("run: artifacts in %s", out)
    return out


def _stage_of(err: BaseException, stages) -> str:
    # the traceback's deepest stage function frame names the failing stage
    tb = err.__traceback__
    names = {fn.__name__: stage for stage, fn, _ in stages}
    found = "ingest"
    while tb is not None:
        name = tb.tb_frame.f_code.co_name
        if name in names:
            found = names[name]
        tb = tb.tb_next
    return found


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socialties",
        description="Classify nodes and edges of a dynamic attributed network "
        "into closure/brokerage/innocuous social classes and validate the "
        "classes against structural metrics.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an interaction log into a run directory")
    p.add_argument("--schema", choices=("coauthorship", "qa"), required=True)
    p.add_argument("--in", dest="input", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--strict", action="store_true", help="abort on malformed lines")
    p.add_argument("--raw-snapshots", action="store_true",
                   help="qa: keep every minute in range instead of compacting")
    p.add_argument("--no-stemming", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--min-token-length", type=int, default=None)
    p.add_argument("--stop-list", default=None, metavar="PATH")
    p.add_argument("--min-active-snapshots", type=int, default=None)
    p.add_argument("--min-instances", type=int, default=None)

    p = sub.add_parser("classify", help="relevance extraction + class labels")
    p.add_argument("--net", required=True, metavar="DIR")
    p.add_argument("--method", choices=("iqr", "mz", "modified-z"), default=None)
    p.add_argument("--percentile", choices=("inclusive", "exclusive"), default=None)
    p.add_argument("--filter-trials", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None, help="randomization filter alpha")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("metrics", help="structural metrics of the aggregated graph")
    p.add_argument("--net", required=True, metavar="DIR")
    p.add_argument("--betweenness", default=None, metavar="exact|sampled:K")
    p.add_argument("--betweenness-seed", type=int, default=None)
    p.add_argument("--pair-counting", choices=("unordered", "ordered"), default=None)
    p.add_argument("--clustering", choices=("paper-literal", "normalized"), default=None)
    p.add_argument("--pagerank-damping", type=float, default=None)
    p.add_argument("--pagerank-tol", type=float, default=None)
    p.add_argument("--pagerank-max-iter", type=int, default=None)

    p = sub.add_parser("validate", help="class distributions and hypothesis tests")
    p.add_argument("--run", required=True, metavar="DIR")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--buckets", default=None, metavar="1,5,10,15")

    p = sub.add_parser("export", help="DOT / GraphML / TSV artifacts")
    p.add_argument("--run", required=True, metavar="DIR")
    p.add_argument("--format", choices=("dot", "graphml", "tsv"), required=True)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--input", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key")

    return parser


def _apply_overrides(cfg: RunConfig, pairs: dict) -> RunConfig:
    for key, value in pairs.items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    return cfg


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    command = args.command
    if command == "run":
        cfg = load_config(args.config, cfg)
        from .config import _coerce  # same coercion as the config file

        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in {f.name for f in fields(RunConfig)}:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(key, value.strip()))
        _apply_overrides(cfg, {"input": args.input, "out": args.out, "seed": args.seed})
    elif command == "ingest":
        overrides = {
            "input": args.input,
            "schema": args.schema,
            "strict": args.strict or None,
            "min_token_length": args.min_token_length,
            "stop_list": args.stop_list,
            "min_active_snapshots": args.min_active_snapshots,
            "min_instances": args.min_instances,
        }
        _apply_overrides(cfg, overrides)
        if args.no_stemming:
            cfg.stemming = False
        if args.no_lowercase:
            cfg.lowercase = False
        if args.raw_snapshots:
            cfg.compact_snapshots = False
    elif command == "classify":
        method = args.method
        if method == "mz":
            method = "modified-z"
        _apply_overrides(cfg, {
            "method": method,
            "percentile": args.percentile,
            "filter_trials": args.filter_trials,
            "filter_alpha": args.alpha,
            "seed": args.seed,
            "workers": args.workers,
        })
    elif command == "metrics":
        _apply_overrides(cfg, {
            "betweenness": args.betweenness,
            "betweenness_seed": args.betweenness_seed,
            "pair_counting": args.pair_counting,
            "clustering": args.clustering,
            "pagerank_damping": args.pagerank_damping,
            "pagerank_tol": args.pagerank_tol,
            "pagerank_max_iter": args.pagerank_max_iter,
        })
    elif command == "validate":
        _apply_overrides(cfg, {"alpha": args.alpha, "buckets": args.buckets})
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname).1s %(name)s: %(message)s",
    )
    try:
        cfg = _config_from_args(args)
    except ConfigError as err:
        log.error("config: %s", err)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            run_pipeline(cfg)
        elif args.command == "ingest":
            _run_stage("ingest", stage_ingest, cfg, Path(args.out))
        elif args.command == "classify":
            _run_stage("classify", stage_classify, cfg, Path(args.net))
        elif args.command == "metrics":
            _run_stage("metrics", stage_metrics, cfg, Path(args.net))
        elif args.command == "validate":
            _run_stage("validate", stage_validate, cfg, Path(args.run))
        elif args.command == "export":
            _run_stage("export", stage_export, cfg, Path(args.run), (args.format,))
    except StageFailure as failure:
        log.error("%s: %s", failure.stage, failure.cause)
        return STAGE_EXIT[failure.stage]
    except ConfigError as err:
        log.error("config: %s", err)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
