"""Core data model for dynamic attributed multigraphs.

A network is observed as a sequence of ``t`` snapshot graphs over a shared
actor population.  Every interaction is an :class:`EdgeInstance` carrying the
snapshot index it occurred in and the set of attribute tokens attached to it
(multiple instances between the same pair in the same snapshot are allowed).
:class:`TemporalNetwork` aggregates the instances and maintains per-actor and
per-(actor, attribute) presence bitsets over snapshots, which is all the
persistence mining downstream needs.  :class:`SimpleGraphView` collapses the
multigraph to an undirected simple graph for structural metrics.

Snapshot indices are opaque, contiguous and 0-based here; mapping calendar
time (years, minutes) onto them is the ingestion layer's job.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)


class Interner:
    """Bijective mapping between external string identifiers and dense ints.

    Ids are assigned in first-seen order, so interning the same sequence of
    strings always yields the same ids.
    """

    def __init__(self):
        self._by_name: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        idx = self._by_name.get(name)
        if idx is None:
            idx = len(self._names)
            self._by_name[name] = idx
            self._names.append(name)
        return idx

    def name(self, idx: int) -> str:
        return self._names[idx]

    def get(self, name: str) -> int | None:
        return self._by_name.get(name)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return list(self._names)


@dataclass(frozen=True, slots=True)
class EdgeInstance:
    """One interaction between two actors at a given snapshot.

    ``attrs`` is the (possibly empty) set of attribute ids attached to this
    particular interaction.  Inside a built :class:`TemporalNetwork` the
    endpoints are always distinct; self-interactions are either rejected or
    dropped at build time.
    """

    u: int
    v: int
    snapshot: int
    attrs: frozenset[int] = field(default_factory=frozenset)

    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


class TemporalNetwork:
    """Immutable aggregate of edge instances with presence bitsets.

    Presence is stored as Python-int bitmasks indexed by snapshot: bit ``k``
    of ``actor_presence[u]`` is set iff ``u`` participates in at least one
    instance at snapshot ``k``, and bit ``k`` of ``attr_presence[u][a]`` is
    set iff some instance at ``k`` incident to ``u`` carries attribute ``a``.
    Instances are kept grouped by snapshot in input order, which fixes the
    canonical instance order used by classification results and serializers.

    Instances of this class are never mutated after :func:`build`; concurrent
    readers are safe.
    """

    def __init__(self, t, snapshots, actor_presence, attr_presence, dropped_self_loops=0):
        self.t = t
        self.snapshots = snapshots
        self.actor_presence = actor_presence
        self.attr_presence = attr_presence
        self.dropped_self_loops = dropped_self_loops
        self._actors = sorted(actor_presence)

    def actors(self) -> list[int]:
        """All actors in the aggregate node set (union over snapshots), sorted."""
        return list(self._actors)

    def num_actors(self) -> int:
        return len(self._actors)

    def num_instances(self) -> int:
        return sum(len(s) for s in self.snapshots)

    def instances(self):
        """Iterate instances in canonical order: by snapshot, then input order."""
        for snap in self.snapshots:
            yield from snap

    def attributes(self) -> list[int]:
        """All attribute ids appearing anywhere in the network, sorted."""
        seen: set[int] = set()
        for masks in self.attr_presence.values():
            seen.update(masks)
        return sorted(seen)

    def active_snapshot_count(self, u: int) -> int:
        return self.actor_presence.get(u, 0).bit_count()

    def first_active(self, u: int) -> int:
        mask = self.actor_presence[u]
        return (mask & -mask).bit_length() - 1

    def last_active(self, u: int) -> int:
        return self.actor_presence[u].bit_length() - 1

    def attrs_of(self, u: int) -> dict[int, int]:
        """Attribute presence masks for one actor (empty dict if none)."""
        return self.attr_presence.get(u, {})

    def with_instances(self, instances) -> "TemporalNetwork":
        """Rebuild the network from a replacement instance list (same t)."""
        return build(instances, self.t)

    def without_attributes(self, excluded) -> "TemporalNetwork":
        """Copy of the network with the given attribute ids stripped from every instance."""
        excluded = frozenset(excluded)
        new_instances = [
            EdgeInstance(e.u, e.v, e.snapshot, e.attrs - excluded) if e.attrs & excluded else e
            for e in self.instances()
        ]
        return build(new_instances, self.t)


class SimpleGraphView:
    """Undirected simple graph over the aggregate actor set.

    One edge per unordered actor pair with at least one instance in any
    snapshot; no self-loops, no multi-edges.  ``nodes`` and ``edges`` are
    sorted, so identical inputs produce identical views.
    """

    def __init__(self, nodes, edges):
        self.nodes: tuple[int, ...] = tuple(sorted(nodes))
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(edges))
        self._adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            self._adj[a].append(b)
            self._adj[b].append(a)
        for n in self._adj:
            self._adj[n].sort()

    @classmethod
    def from_pairs(cls, pairs, nodes=()) -> "SimpleGraphView":
        """Build from unordered pairs, adding any extra isolated ``nodes``."""
        norm = set()
        node_set = set(nodes)
        for a, b in pairs:
            if a == b:
                raise ValueError(f"self-loop ({a}, {b}) not allowed in a simple view")
            node_set.add(a)
            node_set.add(b)
            norm.add((a, b) if a < b else (b, a))
        return cls(node_set, norm)

    def num_nodes(self) -> int:
        return len(self.nodes)

    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, n: int) -> list[int]:
        return self._adj[n]

    def degree(self, n: int) -> int:
        return len(self._adj[n])

    def __eq__(self, other):
        return (
            isinstance(other, SimpleGraphView)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.nodes, self.edges))


def build(instances, t: int, *, drop_self_loops: bool = False) -> TemporalNetwork:
    """Aggregate edge instances into a :class:`TemporalNetwork`.

    Every instance must satisfy ``0 <= snapshot < t``.  Self-interactions
    (``u == v``) are rejected by default; with ``drop_self_loops=True`` they
    are discarded and counted instead (the count is logged and kept on the
    returned network).
    """
    if t < 1:
        raise ValueError(f"snapshot count must be >= 1, got {t}")
    snapshots: list[list[EdgeInstance]] = [[] for _ in range(t)]
    actor_presence: dict[int, int] = {}
    attr_presence: dict[int, dict[int, int]] = {}
    dropped = 0
    for inst in instances:
        k = inst.snapshot
        if not 0 <= k < t:
            raise ValueError(
                f"snapshot index {k} out of range [0, {t}) for instance "
                f"({inst.u}, {inst.v}, {k})"
            )
        if inst.u == inst.v:
            if drop_self_loops:
                dropped += 1
                continue
            raise ValueError(f"self-interaction ({inst.u}, {inst.u}) at snapshot {k}")
        snapshots[k].append(inst)
        bit = 1 << k
        for node in (inst.u, inst.v):
            actor_presence[node] = actor_presence.get(node, 0) | bit
            if inst.attrs:
                masks = attr_presence.setdefault(node, {})
                for a in inst.attrs:
                    masks[a] = masks.get(a, 0) | bit
    if dropped:
        logger.warning("dropped %d self-interaction(s) at build", dropped)
    return TemporalNetwork(
        t,
        tuple(tuple(s) for s in snapshots),
        actor_presence,
        attr_presence,
        dropped_self_loops=dropped,
    )


def simple_view(net: TemporalNetwork) -> SimpleGraphView:
    """Collapse the multigraph to one undirected edge per interacting pair."""
    pairs = set()
    for inst in net.instances():
        a, b = inst.u, inst.v
        pairs.add((a, b) if a < b else (b, a))
    return SimpleGraphView(net.actors(), pairs)
