"""Structural metrics on the aggregated simple graph.

Degree centrality, closeness (with a reachable-mass correction so the value
is defined on disconnected graphs), node and edge betweenness (exact or
pivot-sampled), a neighbor-edge clustering coefficient, and PageRank.  All of
these run on the multi-edge-collapsed :class:`SimpleGraphView`; per-snapshot
variants are out of scope.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _graph_kernels as gk
from .temporal_graph import SimpleGraphView

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Power iteration ran out of iterations; carries the last residual."""

    def __init__(self, residual: float, iterations: int, tol: float):
        self.residual = residual
        self.iterations = iterations
        self.tol = tol
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(residual {residual:.3e}, tol {tol:.3e})"
        )


@dataclass(frozen=True)
class MetricsConfig:
    betweenness_mode: str = "exact"  # "exact" | "sampled"
    betweenness_pivots: int = 256
    betweenness_seed: int = 0
    pair_counting: str = "unordered"  # "unordered" | "ordered"
    clustering_formula: str = "paper-literal"  # "paper-literal" | "normalized"
    pagerank_damping: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 200

    def __post_init__(self):
        if self.betweenness_mode not in ("exact", "sampled"):
            raise ValueError(f"unknown betweenness mode {self.betweenness_mode!r}")
        if self.pair_counting not in ("unordered", "ordered"):
            raise ValueError(f"unknown pair counting {self.pair_counting!r}")
        if self.clustering_formula not in ("paper-literal", "normalized"):
            raise ValueError(f"unknown clustering formula {self.clustering_formula!r}")
        if not 0.0 < self.pagerank_damping < 1.0:
            raise ValueError(f"damping must be in (0, 1), got {self.pagerank_damping}")
        if self.betweenness_mode == "sampled" and self.betweenness_pivots < 1:
            raise ValueError(f"need at least 1 pivot, got {self.betweenness_pivots}")


@dataclass
class MetricsReport:
    """All per-node metrics plus edge betweenness, keyed by real node ids.

    Dict iteration order is the sorted node (edge) order, so serialization
    is stable without re-sorting.
    """

    degree: dict[int, float]
    closeness: dict[int, float]
    betweenness: dict[int, float]
    clustering: dict[int, float]
    pagerank: dict[int, float]
    edge_betweenness: dict[tuple[int, int], float]
    config: MetricsConfig = field(default_factory=MetricsConfig)

    NODE_COLUMNS = ("degree", "closeness", "betweenness", "clustering", "pagerank")

    def node_row(self, u: int) -> tuple[float, float, float, float, float]:
        return (
            self.degree[u],
            self.closeness[u],
            self.betweenness[u],
            self.clustering[u],
            self.pagerank[u],
        )


def _indexed(g: SimpleGraphView):
    """Contiguous kernel indices: node list, id->index map, CSR edge array."""
    nodes = g.nodes
    index = {u: i for i, u in enumerate(nodes)}
    edges = [(index[a], index[b]) for a, b in g.edges]
    return nodes, index, edges


def degree_centrality(g: SimpleGraphView) -> dict[int, float]:
    """Degree divided by the maximum degree in the graph."""
    if g.num_edges() == 0:
        log.warning("degree centrality on an edgeless graph: all zeros")
        return {u: 0.0 for u in g.nodes}
    max_deg = max(g.degree(u) for u in g.nodes)
    return {u: g.degree(u) / max_deg for u in g.nodes}


def closeness_centrality(g: SimpleGraphView) -> dict[int, float]:
    """Closeness with the reachable-mass correction for disconnected graphs.

    cl_i = ((R_i - 1) / sum of distances to reachable nodes) * ((R_i - 1) / (|V| - 1))
    where R_i counts nodes reachable from i, itself included.  On a connected
    graph the second factor is 1 and this is the plain (|V|-1)/sum form.
    Isolated nodes (and a 1-node graph) get 0.
    """
    nodes, _, edges = _indexed(g)
    n = len(nodes)
    if n == 0:
        return {}
    if n == 1 or not edges:
        return {u: 0.0 for u in nodes}
    indptr, indices, _ = gk.build_csr(n, edges)
    total, reach = gk.msbfs_distance_stats(indptr, indices, n)
    out = {}
    for i, u in enumerate(nodes):
        if total[i] == 0:  # reach[i] == 1: nothing but itself
            out[u] = 0.0
        else:
            r1 = reach[i] - 1
            out[u] = (r1 / total[i]) * (r1 / (n - 1))
    return out


def betweenness(
    g: SimpleGraphView, config: MetricsConfig = MetricsConfig()
) -> tuple[dict[int, float], dict[tuple[int, int], float]]:
    """Shortest-path betweenness for nodes and edges.

    Node scores exclude pair endpoints; by default each unordered pair {s,t}
    counts once (``pair_counting="ordered"`` doubles everything uniformly).
    ``betweenness_mode="sampled"`` accumulates from a seeded random subset of
    sources and extrapolates by n/#pivots — same expectation, much cheaper.
    """
    nodes, _, edges = _indexed(g)
    n = len(nodes)
    if n == 0:
        return {}, {}
    indptr, indices, arc_edge = gk.build_csr(n, edges)
    if config.betweenness_mode == "exact" or config.betweenness_pivots >= n:
        sources = np.arange(n, dtype=np.int64)
        scale = 1.0
    else:
        rng = np.random.default_rng(config.betweenness_seed)
        sources = np.sort(rng.choice(n, size=config.betweenness_pivots, replace=False))
        sources = sources.astype(np.int64)
        scale = n / len(sources)
    bc_node, bc_edge = gk.brandes_betweenness(
        indptr, indices, arc_edge, n, len(edges), sources
    )
    if config.pair_counting == "unordered":
        scale *= 0.5
    node_out = {u: bc_node[i] * scale for i, u in enumerate(nodes)}
    edge_out = {pair: bc_edge[j] * scale for j, pair in enumerate(g.edges)}
    return node_out, edge_out


def clustering_coefficient(
    g: SimpleGraphView, formula: str = "paper-literal"
) -> dict[int, float]:
    """Neighbor-edge density per node.

    ``paper-literal`` divides the count of undirected edges among neighbors by
    n_i (n_i - 1) — which tops out at 0.5; ``normalized`` doubles it so a
    clique scores 1.  Nodes with fewer than two neighbors get 0.
    """
    if formula not in ("paper-literal", "normalized"):
        raise ValueError(f"unknown clustering formula {formula!r}")
    nodes, _, edges = _indexed(g)
    n = len(nodes)
    if n == 0:
        return {}
    indptr, indices, _ = gk.build_csr(n, edges)
    counts = gk.neighbor_edge_counts(indptr, indices, n)
    numer = 2 if formula == "normalized" else 1
    out = {}
    for i, u in enumerate(nodes):
        deg = indptr[i + 1] - indptr[i]
        out[u] = numer * counts[i] / (deg * (deg - 1)) if deg >= 2 else 0.0
    return out


def pagerank(
    g: SimpleGraphView,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
    *,
    residual_trace: list[float] | None = None,
) -> dict[int, float]:
    """PageRank by power iteration, each undirected edge as two arcs.

    Uniform teleport; mass on degree-0 nodes is redistributed uniformly.
    Converged when the L1 difference of successive iterates drops below
    ``tol``; raises :class:`ConvergenceError` otherwise.  Pass a list as
    ``residual_trace`` to capture the per-iteration residuals.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    nodes, _, edges = _indexed(g)
    n = len(nodes)
    if n == 0:
        return {}
    import scipy.sparse as sp

    indptr, indices, _ = gk.build_csr(n, edges)
    adj = sp.csr_matrix(
        (np.ones(len(indices)), indices.astype(np.int64), indptr), shape=(n, n)
    )
    deg = np.diff(indptr).astype(np.float64)
    dangling = deg == 0.0
    inv_deg = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, deg))
    x = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for _ in range(max_iter):
        dangling_mass = x[dangling].sum()
        # adjacency is symmetric, so A @ (x/deg) pulls mass along in-arcs
        x_new = damping * (adj @ (x * inv_deg) + dangling_mass / n) + teleport
        residual = float(np.abs(x_new - x).sum())
        if residual_trace is not None:
            residual_trace.append(residual)
        x = x_new
        if residual < tol:
            return {u: float(x[i]) for i, u in enumerate(nodes)}
    raise ConvergenceError(residual, max_iter, tol)


def compute_metrics(g: SimpleGraphView, config: MetricsConfig = MetricsConfig()) -> MetricsReport:
    """Run the full metric suite with one shared configuration."""
    if config.betweenness_mode == "sampled":
        log.info(
            "metrics: betweenness sampled with %d pivots (seed %d)",
            config.betweenness_pivots,
            config.betweenness_seed,
        )
    bc_node, bc_edge = betweenness(g, config)
    return MetricsReport(
        degree=degree_centrality(g),
        closeness=closeness_centrality(g),
        betweenness=bc_node,
        clustering=clustering_coefficient(g, config.clustering_formula),
        pagerank=pagerank(
            g,
            damping=config.pagerank_damping,
            tol=config.pagerank_tol,
            max_iter=config.pagerank_max_iter,
        ),
        edge_betweenness=bc_edge,
        config=config,
    )
