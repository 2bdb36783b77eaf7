"""Popularity-based trust classification.

A package is trusted when it clears its registry's popularity bar:
weekly downloads for npm, pypi, rubygems, huggingface, and nuget;
an average-ranking score (lower = more popular) for maven and golang.
Trusted packages are only compared against strictly more trusted ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import NoSnapshot, SignalMissing
from .registry import PackageRef, RegistryId
from .store import DOWNLOAD_REGISTRIES, MetadataStore, PackageMetadata


class TrustSignal(str, Enum):
    DOWNLOADS = "downloads"
    RANKING = "ranking"
    NONE = "none"


def _default_download_thresholds() -> dict[RegistryId, int]:
    return {
        RegistryId.NPM: 5000,
        RegistryId.PYPI: 5000,
        RegistryId.RUBYGEMS: 5000,
        RegistryId.NUGET: 5000,
        RegistryId.HUGGINGFACE: 1000,
    }


def _default_ranking_thresholds() -> dict[RegistryId, float]:
    return {RegistryId.MAVEN: 10.0, RegistryId.GOLANG: 4.0}


@dataclass
class TrustPolicy:
    download_threshold: dict[RegistryId, int] = field(
        default_factory=_default_download_thresholds
    )
    ranking_threshold: dict[RegistryId, float] = field(
        default_factory=_default_ranking_thresholds
    )
    download_dominance: float = 10.0
    ranking_dominance: float = 2.0

    def __post_init__(self) -> None:
        if any(v <= 0 for v in self.download_threshold.values()):
            raise ValueError("download thresholds must be positive")
        if any(v <= 0 for v in self.ranking_threshold.values()):
            raise ValueError("ranking thresholds must be positive")
        if self.download_dominance <= 1 or self.ranking_dominance <= 1:
            raise ValueError("dominance factors must exceed 1")


@dataclass(frozen=True)
class TrustVerdict:
    trusted: bool
    signal_used: TrustSignal
    signal_value: Optional[float] = None


def _ranking_score(avg_ranking: float) -> float:
    # Map lower-is-better ranking onto a higher-is-better score.
    return 1.0 / (1.0 + avg_ranking)


def is_trusted(meta: PackageMetadata, policy: TrustPolicy) -> TrustVerdict:
    """Classify one package. Missing signal fails closed (untrusted)."""
    registry = meta.ref.registry
    if registry in DOWNLOAD_REGISTRIES:
        if meta.weekly_downloads is None:
            return TrustVerdict(False, TrustSignal.NONE)
        threshold = policy.download_threshold[registry]
        return TrustVerdict(
            meta.weekly_downloads >= threshold,
            TrustSignal.DOWNLOADS,
            float(meta.weekly_downloads),
        )
    if meta.avg_ranking is None:
        return TrustVerdict(False, TrustSignal.NONE)
    threshold = policy.ranking_threshold[registry]
    return TrustVerdict(meta.avg_ranking <= threshold, TrustSignal.RANKING, meta.avg_ranking)


def is_more_trusted(
    candidate_target: PackageMetadata,
    suspect: PackageMetadata,
    policy: TrustPolicy,
) -> bool:
    """True when the target dominates an already-trusted suspect.

    Downloads must be at least ``download_dominance`` times higher, or the
    popularity score 1/(1+avg_ranking) at least ``ranking_dominance``
    times higher. Raises SignalMissing when no signal is comparable.
    """
    if candidate_target.ref.registry != suspect.ref.registry:
        raise ValueError("is_more_trusted compares packages of one registry")
    t_dl, s_dl = candidate_target.weekly_downloads, suspect.weekly_downloads
    if t_dl is not None and s_dl is not None:
        return t_dl >= policy.download_dominance * s_dl
    t_rank, s_rank = candidate_target.avg_ranking, suspect.avg_ranking
    if t_rank is not None and s_rank is not None:
        return _ranking_score(t_rank) >= policy.ranking_dominance * _ranking_score(s_rank)
    raise SignalMissing(
        f"no comparable popularity signal for {candidate_target.ref} vs {suspect.ref}"
    )


def popularity_rank(meta: PackageMetadata) -> float:
    """Sortable popularity (higher = more popular), 0 when unknown."""
    if meta.weekly_downloads is not None:
        return float(meta.weekly_downloads)
    if meta.avg_ranking is not None:
        return _ranking_score(meta.avg_ranking)
    return 0.0


def trusted_set(
    store: MetadataStore,
    registry: RegistryId,
    policy: TrustPolicy,
) -> list[PackageRef]:
    """All trusted packages of a registry, minus the analyst deny set.

    Deterministic order: descending popularity signal, then raw name.
    Raises NoSnapshot when the registry was never ingested.
    """
    if store.snapshot_info(registry) is None:
        raise NoSnapshot(f"no snapshot for {registry.value}")
    rows: list[tuple[float, str, PackageRef]] = []
    for meta in store.packages(registry):
        if store.is_denied(meta.ref):
            continue
        if is_trusted(meta, policy).trusted:
            rows.append((-popularity_rank(meta), meta.ref.raw, meta.ref))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [ref for _, _, ref in rows]
