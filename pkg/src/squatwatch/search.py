"""Candidate generation: scan a suspect against the trusted set.

Three flagging channels, any of which marks a (suspect, target) pair:

    L   Damerau-Levenshtein distance between normalized names <= 2
    S   full-name embedding cosine >= 0.93 (via the ANN index)
    H   hierarchical names only: namespaces differ, namespace cosine
        >= 0.90, and identifiers equal or identifier cosine >= 0.99

Pairs published under the same author or organization are suppressed.
Each flagged pair carries its composite similarity breakdown and attack
category; the top-k survive into an alert draft.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

from .ann import AnnIndex, NeighborHit
from .embedder import EmbeddingModel, NameEmbedding, embed_text
from .errors import IndexNotBuilt, SignalMissing, UnknownSuspect
from .lexical import LengthBucketedScanner, damerau_levenshtein
from .registry import (
    AttackCategory,
    PackageRef,
    RegistryId,
    SubstitutionTable,
    classify_attack_category,
    normalize,
)
from .similarity import SimilarityBreakdown, typosim
from .store import MetadataStore, PackageMetadata
from .trust import TrustPolicy, is_more_trusted, is_trusted, popularity_rank, trusted_set

logger = logging.getLogger(__name__)


@dataclass
class SearchThresholds:
    levenshtein_max: int = 2
    cosine_min: float = 0.93
    hier_identifier_cosine_min: float = 0.99
    hier_namespace_cosine_min: float = 0.90
    top_k: int = 2
    ann_neighbors: int = 10
    ef_search: int = 100

    def __post_init__(self) -> None:
        if not (0 < self.cosine_min <= self.hier_identifier_cosine_min <= 1):
            raise ValueError("cosine thresholds must satisfy 0 < full <= identifier <= 1")
        if self.levenshtein_max < 1:
            raise ValueError("levenshtein_max must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class CandidatePair:
    suspect: PackageRef
    target: PackageRef
    lexical_distance: int
    cosine_full: float
    composite: SimilarityBreakdown
    category: AttackCategory
    channel: str
    cosine_namespace: Optional[float] = None
    cosine_identifier: Optional[float] = None


@dataclass(frozen=True)
class AlertDraft:
    suspect: PackageRef
    pairs: tuple[CandidatePair, ...]
    created_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc), compare=False
    )


def similarity_key(ref: PackageRef) -> str:
    """Normalized text compared across names.

    The golang host domain is excluded: domain confusion is detected
    structurally, and "github.com..." prefixes would otherwise dominate
    every distance.
    """
    if ref.registry is RegistryId.GOLANG:
        return normalize(f"{ref.namespace}/{ref.identifier}")
    return ref.normalized


def _org_identity(ref: PackageRef) -> Optional[tuple[Optional[str], str]]:
    if ref.namespace is None:
        return None
    domain = ref.domain.lower() if ref.domain else None
    return (domain, normalize(ref.namespace))


def top_neighbors(
    pairs: list[CandidatePair],
    k: int,
    popularity: Optional[Callable[[PackageRef], float]] = None,
) -> list[CandidatePair]:
    """First k pairs by composite score, ties by target popularity then name."""
    rank = popularity or (lambda ref: 0.0)
    ordered = sorted(
        pairs,
        key=lambda p: (-p.composite.max_score, -rank(p.target), p.target.raw),
    )
    return ordered[: max(k, 0)]


class SearchEngine:
    """Confusion search for one registry over a frozen trusted set.

    Construction snapshots the registry's trusted set, its lexical
    scanner, and requires the ANN index for the same set. Scans are
    read-only and safe to run concurrently.
    """

    def __init__(
        self,
        registry: RegistryId,
        store: MetadataStore,
        model: EmbeddingModel,
        index: Optional[AnnIndex],
        thresholds: Optional[SearchThresholds] = None,
        trust_policy: Optional[TrustPolicy] = None,
        substitutions: Optional[SubstitutionTable] = None,
    ):
        self.registry = registry
        self.store = store
        self.model = model
        self.index = index
        self.thresholds = thresholds or SearchThresholds()
        self.trust_policy = trust_policy or TrustPolicy()
        self.substitutions = substitutions
        self.trusted_refs = trusted_set(store, registry, self.trust_policy)
        self._by_key: dict[str, list[PackageRef]] = {}
        for ref in self.trusted_refs:
            self._by_key.setdefault(similarity_key(ref), []).append(ref)
        self._scanner = LengthBucketedScanner(list(self._by_key.keys()))
        self._trusted_by_id = {ref.key(): ref for ref in self.trusted_refs}
        self._embed_cache: dict[str, NameEmbedding] = {}

    # -- embedding helpers ---------------------------------------------

    def _text_embedding(self, text: str) -> NameEmbedding:
        emb = self._embed_cache.get(text)
        if emb is None:
            emb = embed_text(self.model, text)
            self._embed_cache[text] = emb
        return emb

    def _cosine_text(self, a: str, b: str) -> float:
        va = self._text_embedding(a).vector
        vb = self._text_embedding(b).vector
        return float(va @ vb)

    def _popularity(self, ref: PackageRef) -> float:
        meta = self.store.get_metadata(ref)
        return popularity_rank(meta) if meta else 0.0

    # -- candidate generation ------------------------------------------

    def find_candidates(self, suspect: PackageRef) -> list[CandidatePair]:
        """All flagged pairs for one suspect, highest composite first.

        Raises UnknownSuspect if the suspect has no stored metadata and
        IndexNotBuilt when the semantic channels have no index.
        """
        meta = self.store.get_metadata(suspect)
        if meta is None:
            raise UnknownSuspect(f"{suspect} is not in the metadata store")
        if self.index is None:
            raise IndexNotBuilt(f"no ANN index for {self.registry.value}")

        suspect_key = similarity_key(suspect)
        suspect_trusted = is_trusted(meta, self.trust_policy).trusted
        suspect_org = _org_identity(suspect)

        flagged: dict[tuple[str, str], set[str]] = {}
        ns_cosines: dict[tuple[str, str], float] = {}

        def consider(target: PackageRef, channel: str) -> None:
            if target.raw == suspect.raw and target.registry == suspect.registry:
                return
            if suspect_org is not None and suspect_org == _org_identity(target):
                return
            flagged.setdefault(target.key(), set()).add(channel)

        # Channel L: banded scan over trusted keys.
        for key, _dist in self._scanner.within(suspect_key, self.thresholds.levenshtein_max):
            for target in self._by_key.get(key, ()):
                consider(target, "lexical")

        # Channel S: ANN lookup on the full-name embedding.
        query = self._text_embedding(suspect_key)
        for hit in self._ann_hits(query, part="full"):
            if hit.similarity >= self.thresholds.cosine_min:
                consider(hit.ref, "semantic")

        # Channel H: namespace proximity for hierarchical pairs.
        if suspect.namespace is not None:
            ns_key = normalize(suspect.namespace)
            id_key = normalize(suspect.identifier)
            ns_query = self._text_embedding(ns_key)
            for hit in self._ann_hits(ns_query, part="namespace"):
                target = hit.ref
                if target.namespace is None:
                    continue
                if normalize(target.namespace) == ns_key:
                    continue
                if hit.similarity < self.thresholds.hier_namespace_cosine_min:
                    continue
                t_id = normalize(target.identifier)
                if t_id != id_key:
                    cos_id = self._cosine_text(id_key, t_id)
                    if cos_id < self.thresholds.hier_identifier_cosine_min:
                        continue
                ns_cosines[target.key()] = hit.similarity
                consider(target, "hierarchical")

        pairs = []
        for key, channels in flagged.items():
            target = self._trusted_by_id.get(key)
            if target is None:
                continue
            if suspect_trusted and not self._target_dominates(target, meta):
                continue
            pairs.append(self._build_pair(suspect, suspect_key, target, channels, ns_cosines))
        pairs.sort(key=lambda p: (-p.composite.max_score, p.target.raw))
        return pairs

    def _ann_hits(self, query: NameEmbedding, part: str) -> list[NeighborHit]:
        return self.index.search(
            query,
            k=self.thresholds.ann_neighbors,
            ef_search=self.thresholds.ef_search,
            part=part,
        )

    def _target_dominates(self, target: PackageRef, suspect_meta: PackageMetadata) -> bool:
        target_meta = self.store.get_metadata(target)
        if target_meta is None:
            return False
        try:
            return is_more_trusted(target_meta, suspect_meta, self.trust_policy)
        except SignalMissing:
            return False

    def _build_pair(
        self,
        suspect: PackageRef,
        suspect_key: str,
        target: PackageRef,
        channels: set[str],
        ns_cosines: dict[tuple[str, str], float],
    ) -> CandidatePair:
        target_key = similarity_key(target)
        distance = damerau_levenshtein(suspect_key, target_key)
        cos_full = self._cosine_text(suspect_key, target_key)
        cos_ns: Optional[float] = None
        cos_id: Optional[float] = None
        if suspect.namespace is not None and target.namespace is not None:
            cos_ns = ns_cosines.get(target.key())
            if cos_ns is None:
                cos_ns = self._cosine_text(
                    normalize(suspect.namespace), normalize(target.namespace)
                )
            cos_id = self._cosine_text(
                normalize(suspect.identifier), normalize(target.identifier)
            )
        category = classify_attack_category(
            suspect,
            target,
            distance,
            author_similarity=cos_ns,
            substitutions=self.substitutions,
            namespace_cosine_min=self.thresholds.hier_namespace_cosine_min,
        )
        channel = channels.pop() if len(channels) == 1 else "multiple"
        return CandidatePair(
            suspect=suspect,
            target=target,
            lexical_distance=distance,
            cosine_full=cos_full,
            composite=typosim(suspect_key, target_key),
            category=category,
            channel=channel,
            cosine_namespace=cos_ns,
            cosine_identifier=cos_id,
        )

    def lexical_candidates(self, suspect: PackageRef) -> set[str]:
        """Raw names flagged by channel L alone (oracle-equivalence hook)."""
        suspect_key = similarity_key(suspect)
        names: set[str] = set()
        for key, _ in self._scanner.within(suspect_key, self.thresholds.levenshtein_max):
            for target in self._by_key.get(key, ()):
                if target.raw != suspect.raw:
                    names.add(target.raw)
        return names

    def scan_package(self, suspect: PackageRef) -> Optional[AlertDraft]:
        """Draft with the top-k candidate pairs, or None if nothing flags."""
        pairs = self.find_candidates(suspect)
        if not pairs:
            return None
        best = top_neighbors(pairs, self.thresholds.top_k, popularity=self._popularity)
        return AlertDraft(suspect=suspect, pairs=tuple(best))
