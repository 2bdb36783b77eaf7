"""End-to-end orchestration: infrastructure wiring, full-registry scans,
and the labeled-pair evaluation harness.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from .alerts import AlertStore
from .ann import DEFAULT_EF_CONSTRUCTION, DEFAULT_M, AnnIndex, AnnIndexBuilder
from .benignity import BenignityFilter, RuleWeights
from .config import Config
from .embedder import EmbeddingModel, embed_text, load_model
from .errors import MissingInfrastructure
from .evaluation import EvalRecord, MetricsTable, build_metrics_table
from .judge import ExternalJudge, HeuristicJudge, JudgeInterface
from .lexical import damerau_levenshtein
from .registry import PackageRef, RegistryId, classify_attack_category, normalize, parse_name
from .search import CandidatePair, SearchEngine, similarity_key
from .similarity import typosim
from .store import MetadataStore
from .trust import trusted_set

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanSummary:
    registry: str
    packages_scanned: int
    suppressed: int
    drafts: int
    alerts_created: int
    wall_time_s: float

    def as_dict(self) -> dict:
        return {
            "registry": self.registry,
            "packages_scanned": self.packages_scanned,
            "suppressed": self.suppressed,
            "drafts": self.drafts,
            "alerts_created": self.alerts_created,
            "wall_time_s": self.wall_time_s,
        }


class Pipeline:
    """Holds the store, model, indexes, and alert log for one workspace."""

    def __init__(self, config: Config):
        self.config = config
        self.store = MetadataStore(config.store_path)
        self.alerts = AlertStore(config.alerts_path)
        self._model: Optional[EmbeddingModel] = None
        self._indexes: dict[str, AnnIndex] = {}
        weights = RuleWeights()
        if config.weights_path and config.weights_path.exists():
            weights = RuleWeights.load(config.weights_path)
        self.weights = weights
        self.filter = BenignityFilter(
            self.store,
            judge=self._make_judge(),
            weights=weights,
            judge_parallelism=config.judge.parallelism,
        )

    def _make_judge(self) -> JudgeInterface:
        judge = self.config.judge
        if judge.mode == "external":
            if not judge.endpoint:
                raise ValueError("[judge] endpoint required for external mode")
            return ExternalJudge(judge.endpoint, judge.model, judge.timeout)
        return HeuristicJudge()

    # -- infrastructure -------------------------------------------------

    @property
    def model(self) -> EmbeddingModel:
        if self._model is None:
            if not self.config.model_path.exists():
                raise MissingInfrastructure(["model"])
            self._model = load_model(self.config.model_path)
        return self._model

    def set_model(self, model: EmbeddingModel) -> None:
        self._model = model

    def build_index(self, registry: RegistryId, save: bool = True) -> AnnIndex:
        """Index the registry's trusted set (full + hierarchical parts)."""
        model = self.model
        refs = trusted_set(self.store, registry, self.config.trust)
        builder = AnnIndexBuilder(
            model.dimension,
            M=DEFAULT_M,
            ef_construction=DEFAULT_EF_CONSTRUCTION,
            seed=model.seed,
        )
        for ref in refs:
            builder.add(ref, "full", embed_text(model, similarity_key(ref)))
            if ref.namespace is not None:
                builder.add(ref, "namespace", embed_text(model, normalize(ref.namespace)))
                builder.add(ref, "identifier", embed_text(model, normalize(ref.identifier)))
        index = builder.freeze()
        self._indexes[registry.value] = index
        if save:
            index.save(self.config.index_path(registry))
        return index

    def index_for(self, registry: RegistryId) -> AnnIndex:
        index = self._indexes.get(registry.value)
        if index is None:
            path = self.config.index_path(registry)
            if not path.exists():
                raise MissingInfrastructure(["index"])
            index = AnnIndex.load(path)
            self._indexes[registry.value] = index
        return index

    def engine(self, registry: RegistryId) -> SearchEngine:
        """Fresh engine over the current trusted set and stored index."""
        missing = []
        if self.store.snapshot_info(registry) is None:
            missing.append("store")
        if self._model is None and not self.config.model_path.exists():
            missing.append("model")
        if (
            registry.value not in self._indexes
            and not self.config.index_path(registry).exists()
        ):
            missing.append("index")
        if missing:
            raise MissingInfrastructure(missing)
        return SearchEngine(
            registry,
            self.store,
            self.model,
            self.index_for(registry),
            thresholds=self.config.thresholds,
            trust_policy=self.config.trust,
        )

    # -- scanning ---------------------------------------------------------

    def _suppressed(self, ref: PackageRef) -> bool:
        allow = self.store.allow_lists()
        if ref.namespace is not None and allow.has_organization(ref.namespace):
            return True
        return allow.has_customer_package(ref)

    def run_full_scan(self, registry: RegistryId) -> ScanSummary:
        """Scan every non-allow-listed package; idempotent per snapshot."""
        start = time.monotonic()
        engine = self.engine(registry)
        snapshot = self.store.snapshot_info(registry)
        if snapshot is None:
            raise MissingInfrastructure(["store"])
        snapshot_key = snapshot.ingested_at.isoformat()
        now = datetime.now(timezone.utc)

        scanned = suppressed = drafts = created = 0
        for meta in self.store.packages(registry):
            ref = meta.ref
            if self._suppressed(ref):
                suppressed += 1
                continue
            scanned += 1
            draft = engine.scan_package(ref)
            if draft is None:
                continue
            drafts += 1
            for report in self.filter.filter_pairs(list(draft.pairs), now=now):
                if report.verdict != "suspected_threat":
                    continue
                alert = self.alerts.create(draft, report, snapshot_key)
                if alert is not None:
                    created += 1
        summary = ScanSummary(
            registry=registry.value,
            packages_scanned=scanned,
            suppressed=suppressed,
            drafts=drafts,
            alerts_created=created,
            wall_time_s=time.monotonic() - start,
        )
        logger.info("scan %s: %s", registry.value, summary.as_dict())
        return summary

    def scan_one(self, registry: RegistryId, name: str):
        """Draft plus reports for a single package (read-only)."""
        ref = parse_name(registry, name)
        engine = self.engine(registry)
        draft = engine.scan_package(ref)
        if draft is None:
            return None, []
        now = datetime.now(timezone.utc)
        return draft, self.filter.filter_pairs(list(draft.pairs), now=now)

    # -- evaluation --------------------------------------------------------

    def build_pair(self, record: EvalRecord) -> CandidatePair:
        """Materialize a labeled (suspect, target) pair for the filter."""
        suspect = parse_name(record.registry, record.suspect)
        target = parse_name(record.registry, record.target)
        s_key, t_key = similarity_key(suspect), similarity_key(target)
        distance = damerau_levenshtein(s_key, t_key)
        cos_full = 0.0
        cos_ns = None
        if self._model is not None or self.config.model_path.exists():
            model = self.model
            cos_full = float(
                embed_text(model, s_key).vector @ embed_text(model, t_key).vector
            )
            if suspect.namespace is not None and target.namespace is not None:
                cos_ns = float(
                    embed_text(model, normalize(suspect.namespace)).vector
                    @ embed_text(model, normalize(target.namespace)).vector
                )
        category = classify_attack_category(
            suspect, target, distance, author_similarity=cos_ns
        )
        return CandidatePair(
            suspect=suspect,
            target=target,
            lexical_distance=distance,
            cosine_full=cos_full,
            composite=typosim(s_key, t_key),
            category=category,
            channel="evaluation",
            cosine_namespace=cos_ns,
        )

    def evaluate(self, records: list[EvalRecord]) -> MetricsTable:
        """Run the benignity pipeline per labeled pair and tabulate."""
        now = datetime.now(timezone.utc)
        results: list[tuple[str, bool]] = []
        for record in records:
            pair = self.build_pair(record)
            report = self.filter.filter_pair(pair, now=now)
            results.append((record.label, report.verdict == "suspected_threat"))
        return build_metrics_table(results)
