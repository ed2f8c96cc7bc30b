"""Classified-network exports: DOT (canonical), GraphML, tabular text.

Rendering collapses multi-edges: a pair is drawn once with the highest-
precedence class among its instances (closure > brokerage > innocuous).
Node and edge colors follow the blue/red/black scheme.  Tables are TSV with
stable column order and floats at 9 significant digits, so identical runs
emit identical bytes.
"""

from __future__ import annotations

from pathlib import Path

from .classifier import ClassificationResult, ClassLabel
from .netmetrics import MetricsReport
from .temporal_graph import SimpleGraphView
from .validation import ClassDistributionReport, ExistenceBucket

COLORS = {
    ClassLabel.CLOSURE: "blue",
    ClassLabel.BROKERAGE: "red",
    ClassLabel.INNOCUOUS: "black",
}


class ExportError(RuntimeError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def collapse_edge_classes(result: ClassificationResult) -> dict[tuple[int, int], ClassLabel]:
    """Highest-precedence class per unordered pair, over all instances."""
    out: dict[tuple[int, int], ClassLabel] = {}
    for el in result.edge_labels:
        a, b = el.instance.endpoints()
        pair = (a, b) if a < b else (b, a)
        prev = out.get(pair)
        if prev is None or el.label.precedence > prev.precedence:
            out[pair] = el.label
    return out


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(
    g: SimpleGraphView, result: ClassificationResult, names=str
) -> str:
    """DOT text for the collapsed graph, colored by class.

    Every node of ``g`` must be labeled and every edge must have at least one
    classified instance; anything uncovered is rejected by name.
    """
    edge_class = collapse_edge_classes(result)
    lines = ["graph socialties {"]
    for u in g.nodes:
        if u not in result.node_labels:
            raise ExportError(f"node {names(u)} has no class label")
        color = COLORS[result.node_labels[u]]
        lines.append(f"  {_dot_quote(names(u))} [color={color}];")
    for a, b in g.edges:
        if (a, b) not in edge_class:
            raise ExportError(f"edge ({names(a)}, {names(b)}) has no classified instance")
        color = COLORS[edge_class[(a, b)]]
        lines.append(f"  {_dot_quote(names(a))} -- {_dot_quote(names(b))} [color={color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _xml_escape(s: str) -> str:
    return (
        s.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def export_graphml(
    g: SimpleGraphView,
    result: ClassificationResult,
    metrics: MetricsReport | None = None,
    names=str,
) -> str:
    """GraphML mirror of the DOT export with typed class/metric attributes."""
    edge_class = collapse_edge_classes(result)
    keys = ['  <key id="d0" for="node" attr.name="class" attr.type="string"/>']
    keys.append('  <key id="d1" for="edge" attr.name="class" attr.type="string"/>')
    metric_keys = []
    if metrics is not None:
        for i, metric in enumerate(MetricsReport.NODE_COLUMNS):
            keys.append(
                f'  <key id="m{i}" for="node" attr.name="{metric}" attr.type="double"/>'
            )
            metric_keys.append((f"m{i}", metric))
        keys.append('  <key id="e0" for="edge" attr.name="betweenness" attr.type="double"/>')
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        *keys,
        '  <graph id="socialties" edgedefault="undirected">',
    ]
    for u in g.nodes:
        if u not in result.node_labels:
            raise ExportError(f"node {names(u)} has no class label")
        lines.append(f'    <node id="{_xml_escape(names(u))}">')
        lines.append(f'      <data key="d0">{result.node_labels[u].value}</data>')
        for key_id, metric in metric_keys:
            lines.append(f'      <data key="{key_id}">{fmt(getattr(metrics, metric)[u])}</data>')
        lines.append("    </node>")
    for a, b in g.edges:
        if (a, b) not in edge_class:
            raise ExportError(f"edge ({names(a)}, {names(b)}) has no classified instance")
        lines.append(
            f'    <edge source="{_xml_escape(names(a))}" target="{_xml_escape(names(b))}">'
        )
        lines.append(f'      <data key="d1">{edge_class[(a, b)].value}</data>')
        if metrics is not None:
            lines.append(f'      <data key="e0">{fmt(metrics.edge_betweenness[(a, b)])}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as err:
        raise ExportError(f"cannot write {path}: {err}") from err
    return path


def _summary_rows(result: ClassificationResult) -> list[str]:
    from .classifier import class_summary

    node_counts, edge_counts = class_summary(result)
    rows = ["target\tclass\tcount\tpercent"]
    for target, counts in (("node", node_counts), ("edge", edge_counts)):
        for label in ClassLabel:
            rows.append(
                f"{target}\t{label.value}\t{counts.counts[label]}\t{fmt(counts.percentage(label))}"
            )
    return rows


def _test_rows(metric: str, target: str, dist) -> list[str]:
    rows = []
    tests = []
    if dist.omnibus is not None:
        tests.append(dist.omnibus)
    tests.extend(dist.pairwise.values())
    for res in tests:
        rows.append(
            "\t".join(
                [
                    metric,
                    target,
                    res.test,
                    "|".join(res.groups),
                    fmt(res.statistic),
                    fmt(res.pvalue),
                    fmt(res.alpha),
                    str(int(res.reject)),
                    str(int(res.degenerate)),
                ]
            )
        )
    return rows


def export_tables(
    out_dir: Path,
    result: ClassificationResult,
    metrics: MetricsReport | None = None,
    report: ClassDistributionReport | None = None,
    buckets: tuple[ExistenceBucket, ...] | None = None,
    names=str,
) -> list[Path]:
    """Write the run's tabular artifacts; returns the paths written.

    Always: class_summary.tsv.  With metrics: node_metrics.tsv and
    edge_metrics.tsv.  With a distribution report: distributions.tsv and
    stat_tests.tsv (plus bucketed variants when buckets are given).
    """
    out_dir = Path(out_dir)
    written = []
    written.append(_write(out_dir / "class_summary.tsv", "\n".join(_summary_rows(result)) + "\n"))

    if metrics is not None:
        rows = ["node\tclass\tdegree\tcloseness\tbetweenness\tclustering\tpagerank"]
        for u in sorted(result.node_labels):
            vals = "\t".join(fmt(v) for v in metrics.node_row(u))
            rows.append(f"{names(u)}\t{result.node_labels[u].value}\t{vals}")
        written.append(_write(out_dir / "node_metrics.tsv", "\n".join(rows) + "\n"))

        edge_class = collapse_edge_classes(result)
        rows = ["u\tv\tclass\tbetweenness"]
        for (a, b), value in metrics.edge_betweenness.items():
            label = edge_class.get((a, b))
            cls = label.value if label is not None else "unclassified"
            rows.append(f"{names(a)}\t{names(b)}\t{cls}\t{fmt(value)}")
        written.append(_write(out_dir / "edge_metrics.tsv", "\n".join(rows) + "\n"))

    if report is not None:
        dist_rows = ["metric\ttarget\tclass\tn\tmin\tq1\tmedian\tq3\tmax\tmean"]
        test_rows = [
            "metric\ttarget\ttest\tgroups\tstatistic\tpvalue\talpha\treject\tdegenerate"
        ]
        for dist in report.distributions:
            for cls in sorted(dist.summaries):
                s = dist.summaries[cls]
                dist_rows.append(
                    f"{dist.metric}\t{dist.target}\t{cls}\t{s.n}\t{fmt(s.min)}\t{fmt(s.q1)}"
                    f"\t{fmt(s.median)}\t{fmt(s.q3)}\t{fmt(s.max)}\t{fmt(s.mean)}"
                )
            test_rows.extend(_test_rows(dist.metric, dist.target, dist))
        written.append(_write(out_dir / "distributions.tsv", "\n".join(dist_rows) + "\n"))
        written.append(_write(out_dir / "stat_tests.tsv", "\n".join(test_rows) + "\n"))

    if buckets is not None:
        rows = ["bucket\tmetric\tclass\tn\tmedian\tkw_pvalue"]
        for bucket in buckets:
            if bucket.report is None:
                rows.append(f"{bucket.label}\t-\t-\t0\t-\t-")
                continue
            for dist in bucket.report.distributions:
                kw = fmt(dist.omnibus.pvalue) if dist.omnibus is not None else "-"
                for cls in sorted(dist.summaries):
                    s = dist.summaries[cls]
                    rows.append(
                        f"{bucket.label}\t{dist.metric}\t{cls}\t{s.n}\t{fmt(s.median)}\t{kw}"
                    )
        written.append(_write(out_dir / "existence_buckets.tsv", "\n".join(rows) + "\n"))
    return written
