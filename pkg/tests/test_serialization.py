import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialties.classifier import classify
from socialties.ingest import parse_coauthorship
from socialties.netmetrics import compute_metrics
from socialties.relevance import RandomizationReport, extract_relevant
from socialties.serialization import (
    SchemaError,
    _ffmt,
    read_labels,
    read_metrics,
    read_network,
    read_relevance,
    write_labels,
    write_metrics,
    write_network,
    write_randomization,
    write_relevance,
)
from socialties.temporal_graph import simple_view

LINES = """\
2001\talice|bob\tgraph queries
2002\talice|bob\tgraph indexing
2003\talice|bob\tgraph storage
2003\tbob|carol\tphysics
2004\talice|bob|carol\tgraph mining
""".splitlines()


@pytest.fixture()
def bundle(tmp_path):
    result = parse_coauthorship(LINES)
    write_network(tmp_path, result)
    return tmp_path, result


def _instance_names(result):
    return [
        (
            result.actors.name(e.u),
            result.actors.name(e.v),
            e.snapshot,
            frozenset(result.attributes.name(a) for a in e.attrs),
        )
        for e in result.instances
    ]


# ------------------------------------------------------------------ network

def test_network_roundtrip(bundle):
    run_dir, original = bundle
    loaded = read_network(run_dir)
    assert loaded.t == original.t
    assert loaded.calendar == original.calendar
    assert loaded.counters == original.counters
    assert loaded.tokenizer.describe() == original.tokenizer.describe()
    assert _instance_names(loaded) == _instance_names(original)


def test_network_roundtrip_is_stable(bundle, tmp_path_factory):
    run_dir, _ = bundle
    second = tmp_path_factory.mktemp("second")
    write_network(second, read_network(run_dir))
    assert (second / "instances.tsv").read_bytes() == (run_dir / "instances.tsv").read_bytes()
    assert (second / "net_meta.json").read_bytes() == (run_dir / "net_meta.json").read_bytes()


def test_read_network_rejects_unknown_format(bundle):
    run_dir, _ = bundle
    meta = json.loads((run_dir / "net_meta.json").read_text())
    meta["format"] = 99
    (run_dir / "net_meta.json").write_text(json.dumps(meta))
    with pytest.raises(SchemaError, match=r"format 99 not supported \(expected 1\)"):
        read_network(run_dir)


def test_read_network_missing_meta(tmp_path):
    with pytest.raises(SchemaError, match="missing"):
        read_network(tmp_path)


def test_read_network_malformed_rows(bundle):
    run_dir, _ = bundle
    path = run_dir / "instances.tsv"
    good = path.read_text()
    path.write_text("alice\tbob\t0\n")
    with pytest.raises(SchemaError, match=r"instances\.tsv:1: expected 4 fields, got 3"):
        read_network(run_dir)
    path.write_text(good + "alice\tbob\tzero\tx\n")
    with pytest.raises(SchemaError, match=r":8: non-numeric snapshot 'zero'"):
        read_network(run_dir)


def test_empty_network_roundtrip(tmp_path):
    result = parse_coauthorship([])
    write_network(tmp_path, result)
    loaded = read_network(tmp_path)
    assert loaded.instances == [] and loaded.t == 0


# ---------------------------------------------------------------- relevance

def test_relevance_roundtrip(bundle):
    run_dir, result = bundle
    net = result.network()
    relmap = extract_relevant(net)
    write_relevance(run_dir, relmap, result.actors, result.attributes)
    loaded = read_relevance(run_dir, net.t, result.actors, result.attributes)
    assert loaded == relmap


def test_relevance_rows_only_at_change_points(bundle):
    run_dir, result = bundle
    relmap = extract_relevant(result.network())
    write_relevance(run_dir, relmap, result.actors, result.attributes)
    rows = (run_dir / "relevance.tsv").read_text().splitlines()
    seen = {}
    for row in rows:
        name, snap, attrs = row.split("\t")
        key = frozenset(x for x in attrs.split(",") if x)
        assert seen.get(name) != key, "row repeats the previous value"
        seen[name] = key
    # every actor must anchor at snapshot 0
    starts = {r.split("\t")[0]: r.split("\t")[1] for r in reversed(rows)}
    assert all(s == "0" for s in starts.values())


def test_read_relevance_errors(bundle):
    run_dir, result = bundle
    net = result.network()
    path = run_dir / "relevance.tsv"

    path.write_text("nobody\t0\tx\n")
    with pytest.raises(SchemaError, match="unknown actor 'nobody'"):
        read_relevance(run_dir, net.t, result.actors, result.attributes)

    path.write_text("alice\t9\tx\n")
    with pytest.raises(SchemaError, match=r"snapshot 9 outside \[0, 4\)"):
        read_relevance(run_dir, net.t, result.actors, result.attributes)

    path.write_text("alice\t1\tx\n")
    with pytest.raises(SchemaError, match="has no snapshot-0 row"):
        read_relevance(run_dir, net.t, result.actors, result.attributes)

    path.write_text("alice\t0\n")
    with pytest.raises(SchemaError, match="expected 3 fields, got 2"):
        read_relevance(run_dir, net.t, result.actors, result.attributes)


# ------------------------------------------------------------------- labels

def test_labels_roundtrip(bundle):
    run_dir, result = bundle
    net = result.network()
    labels = classify(net, extract_relevant(net))
    write_labels(run_dir, labels, result.actors)
    loaded = read_labels(run_dir, result)
    assert loaded == labels


def test_read_labels_detects_misalignment(bundle):
    run_dir, result = bundle
    net = result.network()
    labels = classify(net, extract_relevant(net))
    write_labels(run_dir, labels, result.actors)

    path = run_dir / "edge_labels.tsv"
    rows = path.read_text().splitlines()
    path.write_text("\n".join(rows[:-1]) + "\n")
    with pytest.raises(SchemaError, match="do not match"):
        read_labels(run_dir, result)

    # same row count, wrong instance head
    rows[0], rows[-1] = rows[-1], rows[0]
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(SchemaError, match="out of alignment"):
        read_labels(run_dir, result)


def test_read_labels_unknown_actor(bundle):
    run_dir, result = bundle
    net = result.network()
    labels = classify(net, extract_relevant(net))
    write_labels(run_dir, labels, result.actors)
    path = run_dir / "node_labels.tsv"
    path.write_text(path.read_text() + "mallory\tclosure\n")
    with pytest.raises(SchemaError, match="unknown actor 'mallory'"):
        read_labels(run_dir, result)


# ------------------------------------------------------------------ metrics

def test_metrics_roundtrip_is_value_exact(bundle):
    run_dir, result = bundle
    metrics = compute_metrics(simple_view(result.network()))
    write_metrics(run_dir, metrics, result.actors)
    loaded = read_metrics(run_dir, result.actors, metrics.config)
    assert loaded.degree == metrics.degree
    assert loaded.closeness == metrics.closeness
    assert loaded.betweenness == metrics.betweenness
    assert loaded.clustering == metrics.clustering
    assert loaded.pagerank == metrics.pagerank
    assert loaded.edge_betweenness == metrics.edge_betweenness


def test_read_metrics_header_check(bundle):
    run_dir, result = bundle
    metrics = compute_metrics(simple_view(result.network()))
    write_metrics(run_dir, metrics, result.actors)
    path = run_dir / "metrics_nodes.tsv"
    path.write_text(path.read_text().replace("degree", "valence", 1))
    with pytest.raises(SchemaError, match="unexpected header"):
        read_metrics(run_dir, result.actors)

    write_metrics(run_dir, metrics, result.actors)
    path = run_dir / "metrics_edges.tsv"
    path.write_text("wrong\theader\tline\n")
    with pytest.raises(SchemaError, match="unexpected header"):
        read_metrics(run_dir, result.actors)


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_ffmt_preserves_double_values(x):
    assert float(_ffmt(x)) == x


# ------------------------------------------------------------ randomization

def test_write_randomization_format(bundle):
    run_dir, result = bundle
    ids = {result.attributes.name(a): a for a in range(len(result.attributes))}
    report = RandomizationReport(
        trials=100,
        alpha=0.05,
        seed=7,
        shuffle_unit="set",
        frequencies={ids["graph"]: 1.0, ids["physic"]: 0.25},
        excluded=frozenset({ids["graph"]}),
        pvalues={ids["graph"]: 0.001, ids["physic"]: 0.9},
    )
    write_randomization(run_dir, report, result.attributes)
    text = (run_dir / "randomization.tsv").read_text()
    assert text.splitlines() == [
        "attribute\tfrequency\tpvalue\texcluded",
        "graph\t1\t0.001\t1",
        "physic\t0.25\t0.90000000000000002\t0",
    ]
