"""Social-class assignment for edge instances and nodes.

Every interaction is labeled from the dynamic states of its two endpoints at
the moment it happened: an endpoint whose relevant set intersects the
interaction's attributes is *strong*, one with a nonempty but disjoint
relevant set is *weak*, one with no relevant attributes is *non-relevant*.
A strong endpoint makes the edge *closure*, otherwise a weak endpoint makes
it *brokerage*, otherwise it is *innocuous*.  Nodes get the same labels from
their final relevant set and their activity span.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .relevance import RelevanceMap
from .temporal_graph import EdgeInstance, TemporalNetwork


class DynamicState(Enum):
    STRONG = "strong"
    WEAK = "weak"
    NON_RELEVANT = "non-relevant"


class ClassLabel(Enum):
    CLOSURE = "closure"
    BROKERAGE = "brokerage"
    INNOCUOUS = "innocuous"

    @property
    def precedence(self) -> int:
        # closure outranks brokerage outranks innocuous (used when collapsing
        # multi-edges for rendering; classification itself never collapses)
        return {"closure": 2, "brokerage": 1, "innocuous": 0}[self.value]


@dataclass(frozen=True, slots=True)
class EdgeLabel:
    """Label plus audit states for one edge instance."""

    instance: EdgeInstance
    label: ClassLabel
    u_state: DynamicState
    v_state: DynamicState


@dataclass(frozen=True)
class ClassificationResult:
    """Labels for every edge instance (canonical order) and every node."""

    edge_labels: tuple[EdgeLabel, ...]
    node_labels: dict[int, ClassLabel]

    def edge_class(self, i: int) -> ClassLabel:
        return self.edge_labels[i].label

    def node_class(self, u: int) -> ClassLabel:
        return self.node_labels[u]


def _endpoint_state(relevant: frozenset[int], attrs: frozenset[int]) -> DynamicState:
    if not relevant:
        return DynamicState.NON_RELEVANT
    if relevant & attrs:
        return DynamicState.STRONG
    return DynamicState.WEAK


def _edge_label(u_state: DynamicState, v_state: DynamicState) -> ClassLabel:
    if DynamicState.STRONG in (u_state, v_state):
        return ClassLabel.CLOSURE
    if DynamicState.WEAK in (u_state, v_state):
        return ClassLabel.BROKERAGE
    return ClassLabel.INNOCUOUS


def classify_edges(net: TemporalNetwork, relevance: RelevanceMap) -> tuple[EdgeLabel, ...]:
    """Label every edge instance, in the network's canonical instance order.

    Multi-edges are labeled independently per instance.  Missing relevance
    coverage for an endpoint at an instance's snapshot is an error naming the
    (actor, snapshot) pair.
    """
    if relevance.t != net.t:
        raise ValueError(
            f"relevance map covers {relevance.t} snapshots but network has {net.t}"
        )
    out = []
    for inst in net.instances():
        states = []
        for node in inst.endpoints():
            try:
                rel = relevance.at(node, inst.snapshot)
            except KeyError:
                raise KeyError(
                    f"no relevance entry for actor {node} at snapshot {inst.snapshot}"
                ) from None
            states.append(_endpoint_state(rel, inst.attrs))
        u_state, v_state = states
        out.append(EdgeLabel(inst, _edge_label(u_state, v_state), u_state, v_state))
    return tuple(out)


def classify_nodes(net: TemporalNetwork, relevance: RelevanceMap) -> dict[int, ClassLabel]:
    """Label every node that appears in any snapshot.

    closure when the final relevant set is nonempty; brokerage when empty but
    the node was active in more than one snapshot; innocuous otherwise.
    """
    if relevance.t != net.t:
        raise ValueError(
            f"relevance map covers {relevance.t} snapshots but network has {net.t}"
        )
    labels: dict[int, ClassLabel] = {}
    for u in net.actors():
        if relevance.final(u):
            labels[u] = ClassLabel.CLOSURE
        elif net.active_snapshot_count(u) > 1:
            labels[u] = ClassLabel.BROKERAGE
        else:
            labels[u] = ClassLabel.INNOCUOUS
    return labels


def classify(net: TemporalNetwork, relevance: RelevanceMap) -> ClassificationResult:
    return ClassificationResult(
        edge_labels=classify_edges(net, relevance),
        node_labels=classify_nodes(net, relevance),
    )


@dataclass(frozen=True)
class ClassCounts:
    counts: dict[ClassLabel, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percentage(self, label: ClassLabel) -> float:
        total = self.total
        return 100.0 * self.counts[label] / total if total else 0.0


def class_summary(result: ClassificationResult) -> tuple[ClassCounts, ClassCounts]:
    """(node counts, edge counts) per class; percentages derive from these."""
    node_counts = {label: 0 for label in ClassLabel}
    for label in result.node_labels.values():
        node_counts[label] += 1
    edge_counts = {label: 0 for label in ClassLabel}
    for el in result.edge_labels:
        edge_counts[el.label] += 1
    return ClassCounts(node_counts), ClassCounts(edge_counts)
