import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socialties.classifier import (
    ClassLabel,
    DynamicState,
    class_summary,
    classify,
    classify_edges,
    classify_nodes,
    _edge_label,
    _endpoint_state,
)
from socialties.relevance import RelevanceMap, extract_relevant
from socialties.temporal_graph import EdgeInstance, build

from oracles import (
    edge_labels_oracle,
    node_labels_oracle,
    random_toy_network,
    relevant_sets_oracle,
)


def test_endpoint_state_rule():
    assert _endpoint_state(frozenset(), frozenset({1})) is DynamicState.NON_RELEVANT
    assert _endpoint_state(frozenset({1}), frozenset({1, 2})) is DynamicState.STRONG
    assert _endpoint_state(frozenset({1}), frozenset({2})) is DynamicState.WEAK
    # empty relevant set wins over empty attrs
    assert _endpoint_state(frozenset(), frozenset()) is DynamicState.NON_RELEVANT
    assert _endpoint_state(frozenset({1}), frozenset()) is DynamicState.WEAK


@pytest.mark.parametrize(
    "u_state,v_state,expect",
    [
        (DynamicState.STRONG, DynamicState.STRONG, ClassLabel.CLOSURE),
        (DynamicState.STRONG, DynamicState.WEAK, ClassLabel.CLOSURE),
        (DynamicState.STRONG, DynamicState.NON_RELEVANT, ClassLabel.CLOSURE),
        (DynamicState.WEAK, DynamicState.STRONG, ClassLabel.CLOSURE),
        (DynamicState.NON_RELEVANT, DynamicState.STRONG, ClassLabel.CLOSURE),
        (DynamicState.WEAK, DynamicState.WEAK, ClassLabel.BROKERAGE),
        (DynamicState.WEAK, DynamicState.NON_RELEVANT, ClassLabel.BROKERAGE),
        (DynamicState.NON_RELEVANT, DynamicState.WEAK, ClassLabel.BROKERAGE),
        (DynamicState.NON_RELEVANT, DynamicState.NON_RELEVANT, ClassLabel.INNOCUOUS),
    ],
)
def test_edge_label_truth_table(u_state, v_state, expect):
    assert _edge_label(u_state, v_state) is expect


def test_classify_hand_trace(triangle_net):
    result = classify(triangle_net, extract_relevant(triangle_net))
    assert [el.label for el in result.edge_labels] == [
        ClassLabel.INNOCUOUS,  # s=0: nobody has relevant attributes yet
        ClassLabel.INNOCUOUS,  # s=1: still below the fence
        ClassLabel.CLOSURE,    # s=2: {0} relevant for both ends, on the edge
        ClassLabel.BROKERAGE,  # s=2: actor 1 weak, actor 2 non-relevant
    ]
    assert result.edge_labels[2].u_state is DynamicState.STRONG
    assert result.edge_labels[2].v_state is DynamicState.STRONG
    assert result.edge_labels[3].u_state is DynamicState.WEAK
    assert result.edge_labels[3].v_state is DynamicState.NON_RELEVANT
    assert result.node_labels == {
        0: ClassLabel.CLOSURE,
        1: ClassLabel.CLOSURE,
        2: ClassLabel.INNOCUOUS,
    }
    assert result.edge_class(2) is ClassLabel.CLOSURE
    assert result.node_class(2) is ClassLabel.INNOCUOUS


def test_classify_matches_oracle_on_random_networks():
    rng = np.random.default_rng(77)
    for _ in range(150):
        instances, t = random_toy_network(rng)
        net = build(instances, t)
        result = classify(net, extract_relevant(net))
        expect_sets = relevant_sets_oracle(instances, t)
        expect_edges = edge_labels_oracle(list(net.instances()), expect_sets)
        got_edges = [
            (el.label.value, el.u_state.value, el.v_state.value)
            for el in result.edge_labels
        ]
        assert got_edges == expect_edges
        expect_nodes = node_labels_oracle(instances, t, expect_sets)
        assert {u: l.value for u, l in result.node_labels.items()} == expect_nodes


def test_multi_edges_labeled_independently():
    # same pair, same snapshot, different attribute sets -> different labels
    instances = [
        EdgeInstance(0, 1, s, frozenset({0, 10 + s})) for s in range(6)
    ] + [
        EdgeInstance(0, 1, 5, frozenset({99})),
    ]
    net = build(instances, 6)
    relmap = extract_relevant(net)
    assert relmap.at(0, 5) == frozenset({0})
    result = classify(net, relmap)
    last_two = [el for el in result.edge_labels if el.instance.snapshot == 5]
    assert {el.label for el in last_two} == {ClassLabel.CLOSURE, ClassLabel.BROKERAGE}


def test_t_mismatch_rejected(triangle_net):
    relmap = extract_relevant(triangle_net)
    other = RelevanceMap(2, {u: [relmap.at(u, 0)] * 2 for u in relmap.actors()})
    with pytest.raises(ValueError, match=r"covers 2 snapshots"):
        classify_edges(triangle_net, other)
    with pytest.raises(ValueError, match=r"covers 2 snapshots"):
        classify_nodes(triangle_net, other)


def test_missing_actor_coverage_is_named(triangle_net):
    relmap = extract_relevant(triangle_net)
    partial = RelevanceMap(
        4, {u: [relmap.at(u, s) for s in range(4)] for u in (0, 1)}
    )
    with pytest.raises(KeyError, match=r"actor 2 at snapshot 2"):
        classify_edges(triangle_net, partial)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_classification_is_total(seed):
    instances, t = random_toy_network(np.random.default_rng(seed))
    net = build(instances, t)
    result = classify(net, extract_relevant(net))
    assert len(result.edge_labels) == net.num_instances()
    assert sorted(result.node_labels) == net.actors()
    # edge labels come back in canonical instance order
    assert [el.instance for el in result.edge_labels] == list(net.instances())
    for el in result.edge_labels:
        assert isinstance(el.label, ClassLabel)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_node_rule_consistency(seed):
    # closure iff final relevant set nonempty; innocuous only for one-shot actors
    instances, t = random_toy_network(np.random.default_rng(seed))
    net = build(instances, t)
    relmap = extract_relevant(net)
    for u, label in classify_nodes(net, relmap).items():
        if label is ClassLabel.CLOSURE:
            assert relmap.final(u)
        elif label is ClassLabel.BROKERAGE:
            assert not relmap.final(u) and net.active_snapshot_count(u) > 1
        else:
            assert not relmap.final(u) and net.active_snapshot_count(u) == 1


def test_precedence_order():
    assert ClassLabel.CLOSURE.precedence > ClassLabel.BROKERAGE.precedence
    assert ClassLabel.BROKERAGE.precedence > ClassLabel.INNOCUOUS.precedence


def test_class_summary_counts_and_percentages(triangle_net):
    result = classify(triangle_net, extract_relevant(triangle_net))
    node_counts, edge_counts = class_summary(result)
    assert node_counts.counts == {
        ClassLabel.CLOSURE: 2, ClassLabel.BROKERAGE: 0, ClassLabel.INNOCUOUS: 1,
    }
    assert edge_counts.counts == {
        ClassLabel.CLOSURE: 1, ClassLabel.BROKERAGE: 1, ClassLabel.INNOCUOUS: 2,
    }
    assert node_counts.total == 3 and edge_counts.total == 4
    assert node_counts.percentage(ClassLabel.CLOSURE) == pytest.approx(200 / 3)
    assert sum(edge_counts.percentage(l) for l in ClassLabel) == pytest.approx(100.0)
