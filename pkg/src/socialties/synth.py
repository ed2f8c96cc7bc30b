"""Synthetic network generators for validation experiments.

``planted_role_network`` builds a network whose intended node classes are
known by construction:

* closure actors sit in two dense within-half cores, re-attach their personal
  signature attribute every active snapshot, and accumulate many one-shot
  background attributes — the signature is a persistence outlier at the end.
* brokerage actors are active in several snapshots but never see the same
  attribute twice (distinct partners, fresh backgrounds), so their
  persistence vectors are flat and nothing is ever flagged; they bridge the
  two halves, which gives them intermediate degree and betweenness.
* innocuous actors attach exactly once with fresh attributes.

Under the strict upper-outlier rule, flat vectors provably yield an empty
relevant set, so brokerage/innocuous planting is exact; closure planting
holds whenever the signature's persistence clears the fence, which the
snapshot counts guarantee.

``scale_network`` emits a seeded random instance stream at benchmark size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import ClassLabel
from .temporal_graph import EdgeInstance, Interner, TemporalNetwork, build


@dataclass(frozen=True)
class PlantedNetwork:
    net: TemporalNetwork
    roles: dict[int, ClassLabel]  # actor id -> intended class
    actors: Interner
    attributes: Interner


def planted_role_network(
    n_closure: int = 150,
    n_brokerage: int = 150,
    n_innocuous: int = 200,
    t: int = 20,
    seed: int = 0,
    *,
    brokerage_min_active: int = 3,
    brokerage_max_active: int = 8,
) -> PlantedNetwork:
    if n_closure < 8 or n_brokerage < 1 or n_innocuous < 1:
        raise ValueError("need at least 8 closure and 1 of each other role")
    if not 2 <= brokerage_min_active <= brokerage_max_active <= min(t, n_closure // 2):
        raise ValueError("brokerage activity range incompatible with t / core size")
    rng = np.random.default_rng(seed)
    actors = Interner()
    attributes = Interner()

    closure_ids = [actors.intern(f"c{i:04d}") for i in range(n_closure)]
    brokerage_ids = [actors.intern(f"b{i:04d}") for i in range(n_brokerage)]
    innocuous_ids = [actors.intern(f"i{i:04d}") for i in range(n_innocuous)]
    signature = {u: attributes.intern(f"sig_{actors.name(u)}") for u in closure_ids}
    bg_counter = [0]

    def fresh_bg() -> int:
        a = attributes.intern(f"bg{bg_counter[0]:07d}")
        bg_counter[0] += 1
        return a

    half = n_closure // 2
    halves = [closure_ids[:half], closure_ids[half:]]
    instances: list[EdgeInstance] = []

    # dense cores: random disjoint pairing inside each half, every snapshot
    for s in range(t):
        for side in halves:
            order = [side[i] for i in rng.permutation(len(side))]
            for i in range(0, len(order) - 1, 2):
                u, v = order[i], order[i + 1]
                attrs = frozenset(
                    {signature[u], signature[v], fresh_bg(), fresh_bg()}
                )
                instances.append(EdgeInstance(u, v, s, attrs))

    # bridges: distinct core partners alternating halves, all attrs one-shot
    for b in brokerage_ids:
        k = int(rng.integers(brokerage_min_active, brokerage_max_active + 1))
        snaps = sorted(rng.choice(t, size=k, replace=False).tolist())
        partners = []
        for side in (0, 1):
            take = (k + 1 - side) // 2
            picks = rng.choice(len(halves[side]), size=take, replace=False)
            partners.extend(halves[side][p] for p in picks)
        for idx, s in enumerate(snaps):
            c = partners[idx]
            attrs = frozenset({signature[c], fresh_bg(), fresh_bg()})
            instances.append(EdgeInstance(b, c, s, attrs))

    # periphery: one interaction, fresh attributes only
    for node in innocuous_ids:
        s = int(rng.integers(t))
        c = closure_ids[int(rng.integers(n_closure))]
        attrs = frozenset({fresh_bg(), fresh_bg()})
        instances.append(EdgeInstance(node, c, s, attrs))

    roles = {u: ClassLabel.CLOSURE for u in closure_ids}
    roles.update({u: ClassLabel.BROKERAGE for u in brokerage_ids})
    roles.update({u: ClassLabel.INNOCUOUS for u in innocuous_ids})
    return PlantedNetwork(
        net=build(instances, t), roles=roles, actors=actors, attributes=attributes
    )


def scale_network(
    n_actors: int = 80_000,
    n_instances: int = 260_000,
    t: int = 55,
    attr_pool: int = 50_000,
    seed: int = 0,
) -> TemporalNetwork:
    """Seeded random instance stream at benchmark scale (integer actor ids).

    Endpoints are uniform distinct pairs, except that the first ``n_actors``
    instances enumerate every actor once (uniform draws alone would leave a
    few hundred actors with no instance at the default size).  Each instance
    carries 1-3 pool attributes, and with probability 0.3 the first
    endpoint's personal signature attribute rides along so the relevance
    stage has outliers to find.
    """
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n_actors, n_instances)
    if n_instances >= n_actors:
        u[:n_actors] = rng.permutation(n_actors)
    v = rng.integers(0, n_actors, n_instances)
    clash = u == v
    while clash.any():
        v[clash] = rng.integers(0, n_actors, int(clash.sum()))
        clash = u == v
    snaps = np.sort(rng.integers(0, t, n_instances))
    sizes = rng.integers(1, 4, n_instances)
    with_sig = rng.random(n_instances) < 0.3
    pool_draws = rng.integers(0, attr_pool, int(sizes.sum()))
    instances = []
    pos = 0
    for i in range(n_instances):
        size = int(sizes[i])
        attrs = set(pool_draws[pos:pos + size].tolist())
        pos += size
        if with_sig[i]:
            attrs.add(attr_pool + int(u[i]))  # personal signature id
        instances.append(
            EdgeInstance(int(u[i]), int(v[i]), int(snaps[i]), frozenset(attrs))
        )
    return build(instances, t)
