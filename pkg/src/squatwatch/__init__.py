"""squatwatch: registry-scale detection of package-confusion threats.

Pipeline: parse and normalize package names per registry, define trusted
resources by popularity, embed names with a trainable subword model,
search for confusable pairs over lexical and semantic channels, filter
benign look-alikes with metadata rules, and surface the rest as alerts
for analyst triage.
"""

from .registry import (
    AttackCategory,
    PackageRef,
    RegistryId,
    classify_attack_category,
    normalize,
    parse_name,
)
from .similarity import SimilarityBreakdown, typosim
from .store import AllowLists, MetadataStore, PackageMetadata, SnapshotInfo
from .trust import TrustPolicy, TrustVerdict, is_more_trusted, is_trusted, trusted_set
from .embedder import (
    EmbeddingModel,
    NameEmbedding,
    TrainingParams,
    cosine,
    embed,
    embed_text,
    load_model,
    save_model,
    train,
)
from .ann import AnnIndex, AnnIndexBuilder, NeighborHit, build, exact_search
from .search import (
    AlertDraft,
    CandidatePair,
    SearchEngine,
    SearchThresholds,
    top_neighbors,
)
from .benignity import (
    BenignityFilter,
    BenignityReport,
    RuleOutcome,
    RuleWeights,
    deterministic_checks,
    fit_rule_weights,
    risk_score,
    verdict,
)
from .judge import ExternalJudge, HeuristicJudge, JudgeRequest, JudgeResponse
from .evaluation import (
    EvalRecord,
    MetricsTable,
    build_metrics_table,
    grid_search_threshold,
    metrics_row,
)
from .pipeline import Pipeline, ScanSummary
from .config import Config, load_config

__version__ = "0.1.0"

__all__ = [
    "AlertDraft",
    "AllowLists",
    "AnnIndex",
    "AnnIndexBuilder",
    "AttackCategory",
    "BenignityFilter",
    "BenignityReport",
    "CandidatePair",
    "Config",
    "EmbeddingModel",
    "EvalRecord",
    "ExternalJudge",
    "HeuristicJudge",
    "JudgeRequest",
    "JudgeResponse",
    "MetadataStore",
    "MetricsTable",
    "NameEmbedding",
    "NeighborHit",
    "PackageMetadata",
    "PackageRef",
    "Pipeline",
    "RegistryId",
    "RuleOutcome",
    "RuleWeights",
    "ScanSummary",
    "SearchEngine",
    "SearchThresholds",
    "SimilarityBreakdown",
    "SnapshotInfo",
    "TrainingParams",
    "TrustPolicy",
    "TrustVerdict",
    "build",
    "build_metrics_table",
    "classify_attack_category",
    "cosine",
    "deterministic_checks",
    "embed",
    "embed_text",
    "exact_search",
    "fit_rule_weights",
    "grid_search_threshold",
    "is_more_trusted",
    "is_trusted",
    "load_config",
    "load_model",
    "metrics_row",
    "normalize",
    "parse_name",
    "risk_score",
    "save_model",
    "top_neighbors",
    "train",
    "trusted_set",
    "typosim",
    "verdict",
]
