"""Social-class mining for dynamic attributed networks.

Build a snapshot-indexed interaction network, extract each actor's
persistently associated attributes, classify nodes and edges into
closure / brokerage / innocuous ties, compute structural metrics on the
aggregated graph, and statistically validate that the classes differ.
"""

from .classifier import (
    ClassificationResult,
    ClassLabel,
    DynamicState,
    EdgeLabel,
    class_summary,
    classify,
    classify_edges,
    classify_nodes,
)
from .config import ConfigError, RunConfig, load_config, parse_config_text
from .export import COLORS, export_dot, export_graphml, export_tables
from .ingest import (
    Calendar,
    IngestResult,
    ParseError,
    STOP_WORDS,
    TokenizerConfig,
    filter_by_activity,
    parse_coauthorship,
    parse_qa,
    tokenize,
)
from .netmetrics import (
    ConvergenceError,
    MetricsConfig,
    MetricsReport,
    betweenness,
    closeness_centrality,
    clustering_coefficient,
    compute_metrics,
    degree_centrality,
    pagerank,
)
from .relevance import (
    RandomizationReport,
    RelevanceMap,
    extract_relevant,
    persistence,
    quantile,
    randomization_filter,
)
from .synth import PlantedNetwork, planted_role_network, scale_network
from .temporal_graph import (
    EdgeInstance,
    Interner,
    SimpleGraphView,
    TemporalNetwork,
    build,
    simple_view,
)
from .validation import (
    ClassDistributionReport,
    ExistenceBucket,
    FiveNumberSummary,
    StatTestResult,
    class_distributions,
    existence_time_buckets,
    kruskal_wallis,
    mann_whitney_u,
)

__version__ = "0.1.0"

__all__ = [
    "COLORS", "Calendar", "ClassDistributionReport", "ClassLabel",
    "ClassificationResult", "ConfigError", "ConvergenceError", "DynamicState",
    "EdgeInstance", "EdgeLabel", "ExistenceBucket", "FiveNumberSummary",
    "IngestResult", "Interner", "MetricsConfig", "MetricsReport", "ParseError",
    "PlantedNetwork", "RandomizationReport", "RelevanceMap", "RunConfig",
    "STOP_WORDS", "SimpleGraphView", "StatTestResult", "TemporalNetwork",
    "TokenizerConfig", "betweenness", "build", "class_distributions",
    "class_summary", "classify", "classify_edges", "classify_nodes",
    "closeness_centrality", "clustering_coefficient", "compute_metrics",
    "degree_centrality", "existence_time_buckets", "export_dot",
    "export_graphml", "export_tables", "extract_relevant", "filter_by_activity",
    "kruskal_wallis", "load_config", "mann_whitney_u", "pagerank",
    "parse_coauthorship", "parse_config_text", "parse_qa", "persistence",
    "planted_role_network", "quantile", "randomization_filter", "scale_network",
    "simple_view", "tokenize",
]
