"""Run-directory bundle: the machine-readable intermediates between stages.

Every file uses external string names (never interned ids), so each stage's
output is self-contained and fixtures can be written by hand.  Formats:

* ``net_meta.json``     format version, t, calendar, counters, tokenizer echo
* ``instances.tsv``     ``u<TAB>v<TAB>snapshot<TAB>attr1,attr2,...``
* ``relevance.tsv``     ``actor<TAB>snapshot<TAB>attr1,...`` at change points
* ``node_labels.tsv``   ``u<TAB>class``
* ``edge_labels.tsv``   ``u<TAB>v<TAB>k<TAB>class`` aligned with instances.tsv
* ``endpoint_states.tsv`` per-instance audit states (same alignment)
* ``metrics_nodes.tsv`` / ``metrics_edges.tsv``  full-precision metric values
* ``randomization.tsv`` per-attribute shuffled-relevance frequencies

Tokens are alphanumeric and names come from tab-separated inputs, so the
tab/comma separators cannot collide with content.  Machine intermediates
keep 17 significant digits (value-preserving for doubles); presentation
tables are the export module's concern.
"""

from __future__ import annotations

import json
from pathlib import Path

from .classifier import (
    ClassificationResult,
    ClassLabel,
    DynamicState,
    EdgeLabel,
)
from .ingest import Calendar, IngestResult, TokenizerConfig
from .netmetrics import MetricsConfig, MetricsReport
from .relevance import RandomizationReport, RelevanceMap
from .temporal_graph import EdgeInstance, Interner

FORMAT_VERSION = 1


class SchemaError(ValueError):
    pass


def _ffmt(x: float) -> str:
    return format(float(x), ".17g")


def _check_version(meta: dict, path: Path) -> None:
    version = meta.get("format")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"{path}: bundle format {version!r} not supported (expected {FORMAT_VERSION})"
        )


def write_network(run_dir: Path, result: IngestResult) -> None:
    run_dir = Path(run_dir)
    meta = {
        "format": FORMAT_VERSION,
        "t": result.t,
        "calendar": result.calendar.describe(),
        "counters": result.counters,
        "tokenizer": result.tokenizer.describe(),
    }
    (run_dir / "net_meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    actors, attributes = result.actors, result.attributes
    lines = []
    for e in result.instances:
        attrs = ",".join(sorted(attributes.name(a) for a in e.attrs))
        lines.append(f"{actors.name(e.u)}\t{actors.name(e.v)}\t{e.snapshot}\t{attrs}")
    (run_dir / "instances.tsv").write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )


def read_network(run_dir: Path) -> IngestResult:
    """Rebuild an IngestResult (fresh interners, original counters) from disk."""
    run_dir = Path(run_dir)
    meta_path = run_dir / "net_meta.json"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError(f"{meta_path}: missing (not a run bundle?)") from None
    _check_version(meta, meta_path)
    cal = meta["calendar"]
    if cal.get("mode") == "raw":
        calendar = Calendar(unit=cal["unit"], start=cal["start"], length=cal["t"])
    else:
        calendar = Calendar(unit=cal["unit"], labels=tuple(cal["labels"]))
    actors = Interner()
    attributes = Interner()
    instances = []
    path = run_dir / "instances.tsv"
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        fields = line.split("\t")
        if len(fields) != 4:
            raise SchemaError(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
        u_name, v_name, snap_text, attr_field = fields
        try:
            snap = int(snap_text)
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: non-numeric snapshot {snap_text!r}") from None
        attrs = frozenset(
            attributes.intern(tok) for tok in attr_field.split(",") if tok != ""
        )
        instances.append(
            EdgeInstance(actors.intern(u_name), actors.intern(v_name), snap, attrs)
        )
    tok = meta.get("tokenizer", {})
    config = TokenizerConfig(
        stop_source=tok.get("stop_source", "english-1"),
        stemming=tok.get("stemming", True),
        lowercase=tok.get("lowercase", True),
        min_token_length=tok.get("min_token_length", 2),
    )
    return IngestResult(
        instances=instances,
        t=meta["t"],
        calendar=calendar,
        actors=actors,
        attributes=attributes,
        counters={k: int(v) for k, v in meta.get("counters", {}).items()},
        tokenizer=config,
    )


def write_relevance(
    run_dir: Path, relmap: RelevanceMap, actors: Interner, attributes: Interner
) -> None:
    lines = []
    for u in relmap.actors():
        prev = None
        for s in range(relmap.t):
            cur = relmap.at(u, s)
            if prev is None or cur != prev:
                attrs = ",".join(sorted(attributes.name(a) for a in cur))
                lines.append(f"{actors.name(u)}\t{s}\t{attrs}")
                prev = cur
    (Path(run_dir) / "relevance.tsv").write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )


def read_relevance(
    run_dir: Path, t: int, actors: Interner, attributes: Interner
) -> RelevanceMap:
    path = Path(run_dir) / "relevance.tsv"
    per_actor: dict[int, list[tuple[int, frozenset[int]]]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        fields = line.split("\t")
        if len(fields) != 3:
            raise SchemaError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        name, snap_text, attr_field = fields
        if name not in actors:
            raise SchemaError(f"{path}:{lineno}: unknown actor {name!r}")
        try:
            snap = int(snap_text)
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: non-numeric snapshot {snap_text!r}") from None
        if not 0 <= snap < t:
            raise SchemaError(f"{path}:{lineno}: snapshot {snap} outside [0, {t})")
        attrs = frozenset(
            attributes.intern(tok) for tok in attr_field.split(",") if tok != ""
        )
        per_actor.setdefault(actors.intern(name), []).append((snap, attrs))
    sets: dict[int, list[frozenset[int]]] = {}
    for u, rows in per_actor.items():
        rows.sort(key=lambda r: r[0])
        if rows[0][0] != 0:
            raise SchemaError(f"{path}: actor {actors.name(u)!r} has no snapshot-0 row")
        seq: list[frozenset[int]] = []
        pos = 0
        current = rows[0][1]
        for s in range(t):
            if pos + 1 < len(rows) and rows[pos + 1][0] == s:
                pos += 1
                current = rows[pos][1]
            seq.append(current)
        sets[u] = seq
    return RelevanceMap(t, sets)


def write_labels(run_dir: Path, result: ClassificationResult, actors: Interner) -> None:
    run_dir = Path(run_dir)
    lines = [
        f"{actors.name(u)}\t{label.value}"
        for u, label in sorted(result.node_labels.items())
    ]
    (run_dir / "node_labels.tsv").write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )
    rows, audit = [], []
    for el in result.edge_labels:
        e = el.instance
        head = f"{actors.name(e.u)}\t{actors.name(e.v)}\t{e.snapshot}"
        rows.append(f"{head}\t{el.label.value}")
        audit.append(f"{head}\t{el.u_state.value}\t{el.v_state.value}")
    (run_dir / "edge_labels.tsv").write_text(
        "\n".join(rows) + ("\n" if rows else ""), encoding="utf-8"
    )
    (run_dir / "endpoint_states.tsv").write_text(
        "\n".join(audit) + ("\n" if audit else ""), encoding="utf-8"
    )


def read_labels(run_dir: Path, network: IngestResult) -> ClassificationResult:
    """Rebuild labels against the instances of ``network`` (same bundle)."""
    run_dir = Path(run_dir)
    actors = network.actors
    node_labels: dict[int, ClassLabel] = {}
    path = run_dir / "node_labels.tsv"
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        fields = line.split("\t")
        if len(fields) != 2:
            raise SchemaError(f"{path}:{lineno}: expected 2 fields, got {len(fields)}")
        name, value = fields
        if name not in actors:
            raise SchemaError(f"{path}:{lineno}: unknown actor {name!r}")
        node_labels[actors.intern(name)] = ClassLabel(value)

    def read_rows(filename: str, n_fields: int) -> list[list[str]]:
        p = run_dir / filename
        rows = []
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise SchemaError(f"{p}:{lineno}: expected {n_fields} fields, got {len(fields)}")
            rows.append(fields)
        return rows

    label_rows = read_rows("edge_labels.tsv", 4)
    state_rows = read_rows("endpoint_states.tsv", 5)
    instances = network.instances
    if len(label_rows) != len(instances) or len(state_rows) != len(instances):
        raise SchemaError(
            f"{run_dir}: edge label rows ({len(label_rows)}) do not match "
            f"instances ({len(instances)})"
        )
    edge_labels = []
    for e, lrow, srow in zip(instances, label_rows, state_rows):
        expect = (actors.name(e.u), actors.name(e.v), str(e.snapshot))
        if tuple(lrow[:3]) != expect or tuple(srow[:3]) != expect:
            raise SchemaError(
                f"{run_dir}: label row {lrow[:3]} out of alignment with instance {expect}"
            )
        edge_labels.append(
            EdgeLabel(e, ClassLabel(lrow[3]), DynamicState(srow[3]), DynamicState(srow[4]))
        )
    return ClassificationResult(edge_labels=tuple(edge_labels), node_labels=node_labels)


def write_metrics(run_dir: Path, metrics: MetricsReport, actors: Interner) -> None:
    run_dir = Path(run_dir)
    lines = ["node\t" + "\t".join(MetricsReport.NODE_COLUMNS)]
    for u in metrics.degree:
        vals = "\t".join(_ffmt(v) for v in metrics.node_row(u))
        lines.append(f"{actors.name(u)}\t{vals}")
    (run_dir / "metrics_nodes.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    lines = ["u\tv\tbetweenness"]
    for (a, b), value in metrics.edge_betweenness.items():
        lines.append(f"{actors.name(a)}\t{actors.name(b)}\t{_ffmt(value)}")
    (run_dir / "metrics_edges.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_metrics(
    run_dir: Path, actors: Interner, config: MetricsConfig = MetricsConfig()
) -> MetricsReport:
    run_dir = Path(run_dir)
    path = run_dir / "metrics_nodes.tsv"
    lines = path.read_text(encoding="utf-8").splitlines()
    header = "node\t" + "\t".join(MetricsReport.NODE_COLUMNS)
    if not lines or lines[0] != header:
        raise SchemaError(f"{path}: unexpected header")
    columns: dict[str, dict[int, float]] = {c: {} for c in MetricsReport.NODE_COLUMNS}
    for lineno, line in enumerate(lines[1:], 2):
        fields = line.split("\t")
        if len(fields) != 1 + len(MetricsReport.NODE_COLUMNS):
            raise SchemaError(f"{path}:{lineno}: wrong field count")
        if fields[0] not in actors:
            raise SchemaError(f"{path}:{lineno}: unknown actor {fields[0]!r}")
        u = actors.intern(fields[0])
        for name, text in zip(MetricsReport.NODE_COLUMNS, fields[1:]):
            columns[name][u] = float(text)
    path = run_dir / "metrics_edges.tsv"
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "u\tv\tbetweenness":
        raise SchemaError(f"{path}: unexpected header")
    edge_bc: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(lines[1:], 2):
        fields = line.split("\t")
        if len(fields) != 3:
            raise SchemaError(f"{path}:{lineno}: wrong field count")
        a, b = actors.intern(fields[0]), actors.intern(fields[1])
        pair = (a, b) if a < b else (b, a)
        edge_bc[pair] = float(fields[2])
    return MetricsReport(
        degree=columns["degree"],
        closeness=columns["closeness"],
        betweenness=columns["betweenness"],
        clustering=columns["clustering"],
        pagerank=columns["pagerank"],
        edge_betweenness=edge_bc,
        config=config,
    )


def write_randomization(run_dir: Path, report: RandomizationReport, attributes: Interner) -> None:
    lines = ["attribute\tfrequency\tpvalue\texcluded"]
    for a in sorted(report.frequencies, key=attributes.name):
        lines.append(
            f"{attributes.name(a)}\t{_ffmt(report.frequencies[a])}"
            f"\t{_ffmt(report.pvalues.get(a, 1.0))}\t{int(a in report.excluded)}"
        )
    (Path(run_dir) / "randomization.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
