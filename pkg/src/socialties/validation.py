"""Statistical validation of the social classes against structural metrics.

Groups per-node metric values by node class (and edge betweenness by edge
class), summarizes each group, and tests whether the groups differ: an
omnibus Kruskal-Wallis across the classes and pairwise two-sided
Mann-Whitney U per class pair.  Both tests are rank-based with midrank tie
handling, so any strictly monotone transform of a metric leaves every
p-value unchanged.  A sensitivity variant re-runs the node analysis within
existence-span buckets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .classifier import ClassificationResult, ClassLabel
from .netmetrics import MetricsReport
from .relevance import quantile
from .temporal_graph import TemporalNetwork

DEFAULT_ALPHA = 0.05
CLASS_ORDER = (ClassLabel.CLOSURE, ClassLabel.BROKERAGE, ClassLabel.INNOCUOUS)
EXACT_MW_LIMIT = 20  # total sample size up to which the exact null is enumerated
DEFAULT_BUCKET_BOUNDS = (1, 5, 10, 15)


def normal_sf(z: float) -> float:
    """Standard normal upper tail P[Z >= z]."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def chi2_sf(x: float, df: int) -> float:
    """Chi-squared upper tail for integer df via the halving recurrence.

    Q(x, k+2) = Q(x, k) + (x/2)^(k/2) e^(-x/2) / Gamma(k/2 + 1), seeded with
    the closed forms Q(x,1) = erfc(sqrt(x/2)) and Q(x,2) = e^(-x/2).
    """
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if x <= 0.0:
        return 1.0
    half = x / 2.0
    if df % 2 == 1:
        q = math.erfc(math.sqrt(half))
        k = 1
    else:
        q = math.exp(-half)
        k = 2
    while k < df:
        q += math.exp((k / 2.0) * math.log(half) - half - math.lgamma(k / 2.0 + 1.0))
        k += 2
    return min(q, 1.0)


@dataclass(frozen=True)
class StatTestResult:
    test: str  # "kruskal-wallis" | "mann-whitney-u"
    groups: tuple[str, ...]
    statistic: float
    pvalue: float
    alpha: float
    reject: bool
    degenerate: bool = False


def _midranks(values: list[float]) -> tuple[list[float], list[int]]:
    """(rank per original position, tie-group sizes), ranks starting at 1."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    tie_sizes = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for p in range(i, j + 1):
            ranks[order[p]] = mid
        tie_sizes.append(j - i + 1)
        i = j + 1
    return ranks, tie_sizes


def kruskal_wallis(
    groups: list[list[float]],
    labels: tuple[str, ...] | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> StatTestResult:
    """Tie-corrected Kruskal-Wallis H with a chi-squared(k-1) p-value.

    Needs at least two nonempty groups.  If every pooled value is identical
    the statistic is conventionally 0 with p = 1, flagged degenerate.
    """
    if len(groups) < 2:
        raise ValueError(f"kruskal-wallis needs >= 2 groups, got {len(groups)}")
    for gi, g in enumerate(groups):
        if len(g) == 0:
            raise ValueError(f"kruskal-wallis group {gi} is empty")
    if labels is None:
        labels = tuple(f"group{i}" for i in range(len(groups)))
    pooled = [float(v) for g in groups for v in g]
    n_total = len(pooled)
    ranks, tie_sizes = _midranks(pooled)
    h = 0.0
    pos = 0
    for g in groups:
        r_sum = math.fsum(ranks[pos:pos + len(g)])
        h += r_sum * r_sum / len(g)
        pos += len(g)
    h = 12.0 / (n_total * (n_total + 1)) * h - 3.0 * (n_total + 1)
    tie_term = sum(t ** 3 - t for t in tie_sizes)
    denom = 1.0 - tie_term / (n_total ** 3 - n_total)
    if denom == 0.0:  # every pooled value identical
        return StatTestResult(
            "kruskal-wallis", labels, 0.0, 1.0, alpha, False, degenerate=True
        )
    h /= denom
    p = chi2_sf(h, len(groups) - 1)
    return StatTestResult("kruskal-wallis", labels, h, p, alpha, p < alpha)


def _exact_mw_cdf(n: int, m: int, u_max: int) -> float:
    """P[U <= u_max] under the exact tie-free null for sample sizes n, m.

    c(n, m) is the count of rank assignments by U value; removing the pooled
    maximum gives c(n, m, u) = c(n-1, m, u-m) + c(n, m-1, u).
    """
    table = [[None] * (m + 1) for _ in range(n + 1)]

    def c(a: int, b: int) -> list[int]:
        if table[a][b] is not None:
            return table[a][b]
        if a == 0 or b == 0:
            row = [1]
        else:
            left = c(a - 1, b)
            right = c(a, b - 1)
            row = [0] * (a * b + 1)
            for u, w in enumerate(left):
                row[u + b] += w
            for u, w in enumerate(right):
                row[u] += w
        table[a][b] = row
        return row

    dist = c(n, m)
    total = math.comb(n + m, n)
    return sum(dist[: min(u_max, n * m) + 1]) / total


def mann_whitney_u(
    a: list[float],
    b: list[float],
    alpha: float = DEFAULT_ALPHA,
) -> StatTestResult:
    """Two-sided Mann-Whitney U test; statistic is U of the first sample.

    The exact null distribution is enumerated when the pooled size is at most
    20 and tie-free; otherwise the normal approximation with midrank tie
    correction and a 0.5 continuity correction is used.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("mann-whitney needs two nonempty samples")
    n, m = len(a), len(b)
    pooled = [float(v) for v in a] + [float(v) for v in b]
    ranks, tie_sizes = _midranks(pooled)
    r_a = math.fsum(ranks[:n])
    u1 = r_a - n * (n + 1) / 2.0
    u2 = n * m - u1
    has_ties = any(t > 1 for t in tie_sizes)
    if n + m <= EXACT_MW_LIMIT and not has_ties:
        u_min = min(u1, u2)
        p = min(1.0, 2.0 * _exact_mw_cdf(n, m, int(u_min)))
        return StatTestResult(
            "mann-whitney-u", ("a", "b"), u1, p, alpha, p < alpha
        )
    n_total = n + m
    tie_term = sum(t ** 3 - t for t in tie_sizes)
    var = n * m / 12.0 * ((n_total + 1) - tie_term / (n_total * (n_total - 1)))
    if var <= 0.0:  # every pooled value identical
        return StatTestResult(
            "mann-whitney-u", ("a", "b"), u1, 1.0, alpha, False, degenerate=True
        )
    num = abs(u1 - n * m / 2.0) - 0.5  # continuity correction
    z = max(num, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * normal_sf(z))
    return StatTestResult("mann-whitney-u", ("a", "b"), u1, p, alpha, p < alpha)


@dataclass(frozen=True)
class FiveNumberSummary:
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    @classmethod
    def of(cls, values) -> "FiveNumberSummary":
        vals = sorted(float(v) for v in values)
        return cls(
            n=len(vals),
            min=vals[0],
            q1=quantile(vals, 0.25),
            median=quantile(vals, 0.5),
            q3=quantile(vals, 0.75),
            max=vals[-1],
            mean=math.fsum(vals) / len(vals),
        )


@dataclass(frozen=True)
class MetricDistribution:
    """One metric's per-class samples, summaries, and test outcomes."""

    metric: str
    target: str  # "node" | "edge"
    samples: dict[str, tuple[float, ...]]
    summaries: dict[str, FiveNumberSummary]
    omnibus: StatTestResult | None
    pairwise: dict[tuple[str, str], StatTestResult]
    skipped: tuple[str, ...]


@dataclass(frozen=True)
class ClassDistributionReport:
    alpha: float
    distributions: tuple[MetricDistribution, ...]

    def by_metric(self, metric: str, target: str = "node") -> MetricDistribution:
        for d in self.distributions:
            if d.metric == metric and d.target == target:
                return d
        raise KeyError(f"no distribution for {target} metric {metric!r}")


def _distribution(
    metric: str, target: str, samples: dict[str, list[float]], alpha: float
) -> MetricDistribution:
    summaries = {
        cls: FiveNumberSummary.of(vals) for cls, vals in samples.items() if vals
    }
    testable = [cls for cls in samples if len(samples[cls]) >= 2]
    skipped = []
    for cls in samples:
        if len(samples[cls]) < 2:
            skipped.append(
                f"{target} {metric}: class {cls} has {len(samples[cls])} member(s); "
                "tests involving it skipped"
            )
    omnibus = None
    if len(testable) >= 2:
        omnibus = kruskal_wallis(
            [samples[cls] for cls in testable], tuple(testable), alpha
        )
    else:
        skipped.append(f"{target} {metric}: omnibus test skipped (<2 testable classes)")
    pairwise = {}
    for ca, cb in combinations(testable, 2):
        res = mann_whitney_u(samples[ca], samples[cb], alpha)
        pairwise[(ca, cb)] = StatTestResult(
            res.test, (ca, cb), res.statistic, res.pvalue, res.alpha,
            res.reject, res.degenerate,
        )
    return MetricDistribution(
        metric=metric,
        target=target,
        samples={cls: tuple(vals) for cls, vals in samples.items()},
        summaries=summaries,
        omnibus=omnibus,
        pairwise=pairwise,
        skipped=tuple(skipped),
    )


def _node_distributions(
    node_labels: dict[int, ClassLabel],
    metrics: MetricsReport,
    alpha: float,
    node_subset=None,
) -> list[MetricDistribution]:
    nodes = sorted(node_labels) if node_subset is None else sorted(node_subset)
    out = []
    for metric in MetricsReport.NODE_COLUMNS:
        values = getattr(metrics, metric)
        samples: dict[str, list[float]] = {c.value: [] for c in CLASS_ORDER}
        for u in nodes:
            samples[node_labels[u].value].append(values[u])
        out.append(_distribution(metric, "node", samples, alpha))
    return out


def class_distributions(
    result: ClassificationResult,
    metrics: MetricsReport,
    alpha: float = DEFAULT_ALPHA,
) -> ClassDistributionReport:
    """Per-class distributions of every metric, with omnibus and pairwise tests.

    Node metrics are grouped by node class; edge betweenness is grouped by
    the class of each edge instance (multi-edges contribute their collapsed
    edge's value once per instance).  Classes with fewer than two members are
    excluded from testing and flagged in ``skipped``.
    """
    for u in result.node_labels:
        if u not in metrics.degree:
            raise ValueError(f"metrics report does not cover node {u}")
    dists = _node_distributions(result.node_labels, metrics, alpha)
    samples: dict[str, list[float]] = {c.value: [] for c in CLASS_ORDER}
    for el in result.edge_labels:
        a, b = el.instance.endpoints()
        pair = (a, b) if a < b else (b, a)
        samples[el.label.value].append(metrics.edge_betweenness[pair])
    dists.append(_distribution("edge_betweenness", "edge", samples, alpha))
    return ClassDistributionReport(alpha=alpha, distributions=tuple(dists))


@dataclass(frozen=True)
class ExistenceBucket:
    label: str  # e.g. "[5,10)"
    lo: int
    hi: int | None  # None = unbounded
    nodes: tuple[int, ...]
    report: ClassDistributionReport | None  # None when the bucket is empty


def existence_time_buckets(
    net: TemporalNetwork,
    result: ClassificationResult,
    metrics: MetricsReport,
    alpha: float = DEFAULT_ALPHA,
    boundaries: tuple[int, ...] = DEFAULT_BUCKET_BOUNDS,
) -> tuple[ExistenceBucket, ...]:
    """Node-class distributions within existence-span buckets.

    A node's existence is its active span in snapshots, last minus first plus
    one (gaps count).  ``boundaries`` are the ascending lower bounds; the last
    bucket is unbounded above.  Empty buckets carry no report.
    """
    if not boundaries or list(boundaries) != sorted(set(boundaries)):
        raise ValueError(f"bucket boundaries must be ascending and unique: {boundaries}")
    edges_lo = list(boundaries)
    buckets: list[list[int]] = [[] for _ in edges_lo]
    for u in net.actors():
        span = net.last_active(u) - net.first_active(u) + 1
        idx = 0
        for i, lo in enumerate(edges_lo):
            if span >= lo:
                idx = i
        buckets[idx].append(u)
    out = []
    for i, members in enumerate(buckets):
        lo = edges_lo[i]
        hi = edges_lo[i + 1] if i + 1 < len(edges_lo) else None
        label = f"[{lo},{hi})" if hi is not None else f"[{lo},inf)"
        if not members:
            out.append(ExistenceBucket(label, lo, hi, (), None))
            continue
        dists = _node_distributions(result.node_labels, metrics, alpha, members)
        report = ClassDistributionReport(alpha=alpha, distributions=tuple(dists))
        out.append(ExistenceBucket(label, lo, hi, tuple(members), report))
    return tuple(out)
