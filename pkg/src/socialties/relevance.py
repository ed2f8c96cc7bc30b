"""Persistence mining and relevant-attribute extraction.

For an actor ``u`` and attribute ``a``, persistence after ``k`` snapshots is
the fraction of the first ``k`` snapshots in which some interaction incident
to ``u`` carried ``a``.  An attribute is *relevant* for ``u`` at a point in
time when its persistence is an upper outlier among the persistences of all
attributes ``u`` has been exposed to so far.  Two outlier rules are provided:
Tukey fences on the interquartile range (default) and the Iglewicz-Hoaglin
modified z-score.

The extraction also has a randomized robustness filter: attribute sets are
shuffled across interactions many times, relevance is recomputed per trial,
and attributes that come out "relevant" under shuffled data significantly
more often than the significance level are reported for exclusion.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .temporal_graph import EdgeInstance, TemporalNetwork, build

MODIFIED_Z_CUTOFF = 3.5  # Iglewicz-Hoaglin recommended outlier cutoff
_MZ_SCALE = 0.6745  # standard-normal consistency constant for the MAD


def quantile(values, q, method: str = "inclusive") -> float:
    """Quantile of a sequence by linear interpolation between order stats.

    ``inclusive`` places the interpolation rank at ``(n-1)*q`` (the common
    default, numpy's ``linear``); ``exclusive`` uses ``(n+1)*q - 1`` clipped
    to the data range.  ``values`` need not be sorted.
    """
    vals = sorted(values)
    n = len(vals)
    if n == 0:
        raise ValueError("quantile of empty sequence")
    if n == 1:
        return float(vals[0])
    if method == "inclusive":
        rank = (n - 1) * q
    elif method == "exclusive":
        rank = (n + 1) * q - 1
        rank = min(max(rank, 0.0), n - 1)
    else:
        raise ValueError(f"unknown percentile method {method!r}")
    lo = math.floor(rank)
    hi = math.ceil(rank)
    frac = rank - lo
    return vals[lo] + (vals[hi] - vals[lo]) * frac


def persistence(net: TemporalNetwork, u: int, a: int, k: int) -> float:
    """Fraction of the first ``k`` snapshots where ``u`` is tied to ``a``.

    ``k`` counts leading snapshots, so valid values are ``1..t``; the exact
    value is (number of present snapshots among the first ``k``) / ``k``.
    """
    if k == 0:
        raise ValueError("persistence is undefined for k=0 (empty history)")
    if not 1 <= k <= net.t:
        raise ValueError(f"k must be in [1, {net.t}], got {k}")
    mask = net.attr_presence.get(u, {}).get(a, 0)
    return (mask & ((1 << k) - 1)).bit_count() / k


class RelevanceMap:
    """Per-actor, per-snapshot sets of relevant attribute ids.

    ``at(u, s)`` returns the relevant set evaluated *after* snapshot ``s``'s
    interactions, i.e. from the history of snapshots ``0..s`` inclusive.
    Consecutive snapshots where a set did not change share one frozenset.
    """

    def __init__(self, t: int, sets: dict[int, list[frozenset[int]]]):
        self.t = t
        self._sets = sets

    def at(self, u: int, s: int) -> frozenset[int]:
        per_actor = self._sets.get(u)
        if per_actor is None:
            raise KeyError(f"no relevance entry for actor {u}")
        if not 0 <= s < self.t:
            raise KeyError(f"no relevance entry for actor {u} at snapshot {s}")
        return per_actor[s]

    def final(self, u: int) -> frozenset[int]:
        """Relevant set at the end of the observation window."""
        return self.at(u, self.t - 1)

    def actors(self) -> list[int]:
        return sorted(self._sets)

    def covers(self, u: int) -> bool:
        return u in self._sets

    def any_relevant(self) -> set[int]:
        """Union of all relevant sets over all actors and snapshots."""
        out: set[int] = set()
        for per_actor in self._sets.values():
            for s in per_actor:
                out |= s
        return out

    def __eq__(self, other):
        return (
            isinstance(other, RelevanceMap)
            and self.t == other.t
            and self._sets == other._sets
        )


def _outliers_iqr(attrs, values, percentile_method):
    q1 = quantile(values, 0.25, percentile_method)
    q3 = quantile(values, 0.75, percentile_method)
    threshold = q3 + 1.5 * (q3 - q1)
    return frozenset(a for a, v in zip(attrs, values) if v > threshold)


def _outliers_modified_z(attrs, values, percentile_method):
    med = quantile(values, 0.5, percentile_method)
    mad = quantile([abs(v - med) for v in values], 0.5, percentile_method)
    if mad == 0.0:
        # degenerate spread; fall back to the IQR fences for this vector
        return _outliers_iqr(attrs, values, percentile_method)
    return frozenset(
        a for a, v in zip(attrs, values) if _MZ_SCALE * (v - med) / mad > MODIFIED_Z_CUTOFF
    )


def extract_relevant(
    net: TemporalNetwork,
    method: str = "iqr",
    *,
    percentile_method: str = "inclusive",
) -> RelevanceMap:
    """Compute every actor's relevant attribute sets at every snapshot.

    At each snapshot the candidate pool is every attribute the actor has been
    exposed to so far; an attribute is relevant when its persistence is a
    strict upper outlier of the pool's persistence vector under ``method``
    (``iqr`` or ``modified-z``).

    The outlier rules are evaluated on the raw presence counts rather than
    the counts/k fractions.  Both rules are invariant under a positive
    rescaling of the whole vector, so the decisions are the same -- but on
    the count scale they are *exactly* the same: quartiles of small integers
    at quarter-ranks and the 1.5*IQR fence stay within dyadic rationals,
    so no comparison is ever decided by float rounding of the division by
    ``k``.  That is also what makes the idle-snapshot shortcut sound:
    snapshots where the actor is inactive reuse the previous set, because
    the counts the rule sees have not changed.
    """
    if method not in ("iqr", "modified-z"):
        raise ValueError(f"unknown relevance method {method!r}")
    if net.num_actors() == 0:
        raise ValueError("cannot extract relevant attributes from an empty network")
    flag = _outliers_iqr if method == "iqr" else _outliers_modified_z
    t = net.t
    sets: dict[int, list[frozenset[int]]] = {}
    empty = frozenset()
    for u in net.actors():
        attr_masks = net.attrs_of(u)
        # attributes ordered by first exposure so the pool can grow by pointer
        order = sorted(attr_masks, key=lambda a: ((attr_masks[a] & -attr_masks[a]).bit_length(), a))
        firsts = [(attr_masks[a] & -attr_masks[a]).bit_length() - 1 for a in order]
        active = net.actor_presence[u]
        seq: list[frozenset[int]] = []
        current = empty
        pool: list[int] = []
        pool_masks: list[int] = []
        nxt = 0
        for s in range(t):
            if not (active >> s) & 1:
                seq.append(current)
                continue
            while nxt < len(order) and firsts[nxt] <= s:
                pool.append(order[nxt])
                pool_masks.append(attr_masks[order[nxt]])
                nxt += 1
            if pool:
                prefix = (1 << (s + 1)) - 1
                values = [(m & prefix).bit_count() for m in pool_masks]
                new = flag(pool, values, percentile_method)
            else:
                new = empty
            if new != current:
                current = new
            seq.append(current)
        sets[u] = seq
    return RelevanceMap(t, sets)


@dataclass
class RandomizationReport:
    """Outcome of the shuffled-attribute robustness filter."""

    trials: int
    alpha: float
    seed: int
    shuffle_unit: str
    frequencies: dict[int, float]  # attr id -> fraction of trials flagged relevant
    excluded: frozenset[int]
    method: str = "iqr"
    pvalues: dict[int, float] = field(default_factory=dict)


def _binom_sf(successes: int, n: int, p: float) -> float:
    """P[X >= successes] for X ~ Binomial(n, p), exact."""
    if successes <= 0:
        return 1.0
    q = 1.0 - p
    return math.fsum(
        math.comb(n, i) * (p ** i) * (q ** (n - i)) for i in range(successes, n + 1)
    )


def _shuffled_instances(net: TemporalNetwork, rng, shuffle_unit: str):
    instances = list(net.instances())
    if shuffle_unit == "set":
        attr_sets = [e.attrs for e in instances]
        perm = rng.permutation(len(attr_sets))
        return [
            EdgeInstance(e.u, e.v, e.snapshot, attr_sets[perm[i]])
            for i, e in enumerate(instances)
        ]
    if shuffle_unit == "token":
        tokens = [a for e in instances for a in sorted(e.attrs)]
        perm = rng.permutation(len(tokens))
        shuffled = [tokens[i] for i in perm]
        out = []
        pos = 0
        for e in instances:
            size = len(e.attrs)
            out.append(EdgeInstance(e.u, e.v, e.snapshot, frozenset(shuffled[pos:pos + size])))
            pos += size
        return out
    raise ValueError(f"unknown shuffle unit {shuffle_unit!r}")


def _run_trial(args):
    net, child_seed, shuffle_unit, method, percentile_method = args
    rng = np.random.default_rng(child_seed)
    shuffled = build(_shuffled_instances(net, rng, shuffle_unit), net.t)
    relmap = extract_relevant(shuffled, method, percentile_method=percentile_method)
    return relmap.any_relevant()


def randomization_filter(
    net: TemporalNetwork,
    trials: int,
    alpha: float = 0.05,
    seed: int = 0,
    *,
    method: str = "iqr",
    percentile_method: str = "inclusive",
    shuffle_unit: str = "set",
    workers: int = 1,
) -> RandomizationReport:
    """Estimate which attributes look relevant even under random association.

    Each trial permutes the attribute sets across all edge instances (keeping
    the global multiset of sets, hence of set sizes; ``shuffle_unit="token"``
    instead reshuffles individual tokens while keeping each instance's own
    set size), re-extracts relevant attributes, and records which attributes
    were flagged anywhere in the network.  An attribute is excluded when a
    one-sided exact binomial test rejects ``H0: P(flagged) <= alpha`` at
    level ``alpha``.  Deterministic for a fixed seed, including under
    ``workers > 1`` (per-trial RNG streams are derived from the seed).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    child_seeds = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(net, cs, shuffle_unit, method, percentile_method) for cs in child_seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flagged_sets = list(pool.map(_run_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        flagged_sets = [_run_trial(j) for j in jobs]
    counts: dict[int, int] = {a: 0 for a in net.attributes()}
    for flagged in flagged_sets:
        for a in flagged:
            counts[a] += 1
    frequencies = {a: c / trials for a, c in counts.items()}
    pvalues = {a: _binom_sf(c, trials, alpha) for a, c in counts.items()}
    excluded = frozenset(a for a, p in pvalues.items() if p < alpha)
    return RandomizationReport(
        trials=trials,
        alpha=alpha,
        seed=seed,
        shuffle_unit=shuffle_unit,
        frequencies=frequencies,
        excluded=excluded,
        method=method,
        pvalues=pvalues,
    )
