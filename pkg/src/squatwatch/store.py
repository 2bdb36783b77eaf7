"""Embedded metadata store: snapshots, package records, and allow-lists.

Persistence is a single append-only JSONL file. Every mutation appends a
typed record; opening a store replays the log into in-memory indexes, so
the newest record for a key always wins and allow-lists survive restarts.

Ingestion consumes the Metadata Record format: one UTF-8 JSON object per
line with keys

    registry, name, description, readme, license, maintainers,
    repository_url, versions [{version, published_at}], weekly_downloads,
    avg_ranking, verified_prefix, relocation_target, created_at

Timestamps are RFC 3339. Unknown keys are ignored; malformed lines are
skipped and counted rather than aborting the snapshot.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Optional

from .errors import EmptySnapshot, IoFailure, MalformedName, NoSnapshot, UnknownRegistry
from .registry import PackageRef, RegistryId, parse_name

logger = logging.getLogger(__name__)

README_CAP_BYTES = 64 * 1024
STALENESS_WARN_AFTER = timedelta(days=7)

DOWNLOAD_REGISTRIES = {
    RegistryId.NPM,
    RegistryId.PYPI,
    RegistryId.RUBYGEMS,
    RegistryId.HUGGINGFACE,
    RegistryId.NUGET,
}
RANKING_REGISTRIES = {RegistryId.MAVEN, RegistryId.GOLANG}


def _parse_ts(value: str) -> datetime:
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat()


@dataclass
class PackageMetadata:
    ref: PackageRef
    description: Optional[str] = None
    readme: Optional[str] = None
    license: Optional[str] = None
    maintainers: list[str] = field(default_factory=list)
    repository_url: Optional[str] = None
    versions: list[tuple[str, datetime]] = field(default_factory=list)
    weekly_downloads: Optional[int] = None
    avg_ranking: Optional[float] = None
    verified_prefix: bool = False
    relocation_target: Optional[PackageRef] = None
    created_at: Optional[datetime] = None
    last_updated_at: Optional[datetime] = None
    readme_truncated: bool = False

    def __post_init__(self) -> None:
        self.versions.sort(key=lambda v: v[1])
        if self.versions:
            self.last_updated_at = self.versions[-1][1]
            if self.created_at is None:
                self.created_at = self.versions[0][1]


@dataclass
class AllowLists:
    organizations: set[str] = field(default_factory=set)
    mirror_domains: set[str] = field(default_factory=set)
    customer_packages: set[tuple[str, str]] = field(default_factory=set)

    def has_organization(self, namespace: str) -> bool:
        return namespace.lower() in self.organizations

    def has_mirror_domain(self, domain: str) -> bool:
        return domain.lower() in self.mirror_domains

    def has_customer_package(self, ref: PackageRef) -> bool:
        return (ref.registry.value, ref.raw.lower()) in self.customer_packages


@dataclass(frozen=True)
class SnapshotInfo:
    registry: RegistryId
    ingested_at: datetime
    package_count: int
    skipped: int = 0


ALLOWLIST_KINDS = ("organization", "mirror_domain", "customer_package")


class MetadataStore:
    """Package metadata, allow-lists, and the analyst deny set.

    Thread model: a single re-entrant lock guards the log file and the
    in-memory indexes; readers take the same lock (lookups are dict hits,
    so contention is negligible at desk scale).
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.RLock()
        self._packages: dict[tuple[str, str], PackageMetadata] = {}
        self._snapshots: dict[str, SnapshotInfo] = {}
        self._allow = AllowLists()
        self._denied: set[tuple[str, str]] = set()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            self._replay()

    # -- persistence -------------------------------------------------

    def _append(self, record: dict) -> None:
        try:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot append to {self.path}: {exc}") from exc

    def _replay(self) -> None:
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoFailure(f"cannot read {self.path}: {exc}") from exc
        for line in lines:
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                logger.warning("skipping corrupt store line")
                continue
            self._apply(record)

    def _apply(self, record: dict) -> None:
        kind = record.get("kind")
        if kind == "package":
            meta = _meta_from_json(record["data"])
            self._packages[meta.ref.key()] = meta
        elif kind == "snapshot":
            info = SnapshotInfo(
                registry=RegistryId.parse(record["registry"]),
                ingested_at=_parse_ts(record["ingested_at"]),
                package_count=record["package_count"],
                skipped=record.get("skipped", 0),
            )
            self._snapshots[info.registry.value] = info
        elif kind == "allowlist":
            self._apply_allowlist(record["list"], record["value"], record["action"])
        elif kind == "deny":
            key = (record["registry"], record["name"])
            if record["action"] == "add":
                self._denied.add(key)
            else:
                self._denied.discard(key)

    # -- ingestion ---------------------------------------------------

    def ingest_snapshot(
        self,
        registry: RegistryId | str,
        source: IO,
        ingested_at: Optional[datetime] = None,
    ) -> SnapshotInfo:
        """Upsert one line-delimited metadata stream for ``registry``.

        Malformed lines are counted and skipped. Raises EmptySnapshot when
        nothing valid was read, IoFailure on stream errors.
        """
        if isinstance(registry, str):
            registry = RegistryId.parse(registry)
        valid = 0
        skipped = 0
        with self._lock:
            try:
                for raw_line in source:
                    if isinstance(raw_line, bytes):
                        raw_line = raw_line.decode("utf-8", errors="replace")
                    line = raw_line.strip()
                    if not line:
                        continue
                    try:
                        data = json.loads(line)
                        if data.get("registry") != registry.value:
                            raise ValueError("registry mismatch")
                        meta = _meta_from_record(registry, data)
                    except (ValueError, KeyError, TypeError, MalformedName, UnknownRegistry) as exc:
                        skipped += 1
                        logger.debug("skipping malformed record: %s", exc)
                        continue
                    _warn_missing_signal(meta)
                    self._packages[meta.ref.key()] = meta
                    self._append({"kind": "package", "data": _meta_to_json(meta)})
                    valid += 1
            except OSError as exc:
                raise IoFailure(f"snapshot stream failed: {exc}") from exc
            if valid == 0:
                raise EmptySnapshot(f"no valid records for {registry.value}")
            now = ingested_at or datetime.now(timezone.utc)
            previous = self._snapshots.get(registry.value)
            if previous and now < previous.ingested_at:
                now = previous.ingested_at
            info = SnapshotInfo(registry, now, valid, skipped)
            self._snapshots[registry.value] = info
            self._append(
                {
                    "kind": "snapshot",
                    "registry": registry.value,
                    "ingested_at": _format_ts(now),
                    "package_count": valid,
                    "skipped": skipped,
                }
            )
            if skipped:
                logger.warning("%s snapshot: skipped %d malformed lines", registry.value, skipped)
            return info

    def upsert(self, meta: PackageMetadata) -> None:
        """Insert or replace a single record (used by fixtures and tests)."""
        with self._lock:
            _warn_missing_signal(meta)
            self._packages[meta.ref.key()] = meta
            self._append({"kind": "package", "data": _meta_to_json(meta)})

    # -- queries -----------------------------------------------------

    def get_metadata(self, ref: PackageRef) -> Optional[PackageMetadata]:
        with self._lock:
            return self._packages.get(ref.key())

    def packages(self, registry: RegistryId) -> list[PackageMetadata]:
        with self._lock:
            return [m for (reg, _), m in self._packages.items() if reg == registry.value]

    def package_count(self, registry: RegistryId) -> int:
        with self._lock:
            return sum(1 for (reg, _) in self._packages if reg == registry.value)

    def snapshot_info(self, registry: RegistryId) -> Optional[SnapshotInfo]:
        with self._lock:
            return self._snapshots.get(registry.value)

    def staleness(self, registry: RegistryId, now: Optional[datetime] = None) -> timedelta:
        """Age of the registry's latest snapshot. Raises NoSnapshot."""
        with self._lock:
            info = self._snapshots.get(registry.value)
        if info is None:
            raise NoSnapshot(f"no snapshot ingested for {registry.value}")
        now = now or datetime.now(timezone.utc)
        return now - info.ingested_at

    # -- allow-lists and deny set -------------------------------------

    def _apply_allowlist(self, kind: str, value: str, action: str) -> None:
        add = action == "add"
        if kind == "organization":
            (self._allow.organizations.add if add else self._allow.organizations.discard)(
                value.lower()
            )
        elif kind == "mirror_domain":
            (self._allow.mirror_domains.add if add else self._allow.mirror_domains.discard)(
                value.lower()
            )
        elif kind == "customer_package":
            registry, _, name = value.partition(":")
            key = (registry, name.lower())
            (self._allow.customer_packages.add if add else self._allow.customer_packages.discard)(
                key
            )
        else:
            raise ValueError(f"unknown allow-list kind: {kind}")

    def update_allowlist(self, kind: str, value: str, action: str = "add") -> AllowLists:
        """Add or remove one allow-list entry; persisted durably.

        ``customer_package`` values are ``registry:rawname``.
        """
        if kind not in ALLOWLIST_KINDS:
            raise ValueError(f"kind must be one of {ALLOWLIST_KINDS}")
        if action not in ("add", "remove"):
            raise ValueError("action must be add or remove")
        if not value:
            raise ValueError("value must be non-empty")
        with self._lock:
            self._apply_allowlist(kind, value, action)
            self._append({"kind": "allowlist", "list": kind, "value": value, "action": action})
            return self.allow_lists()

    def allow_lists(self) -> AllowLists:
        with self._lock:
            return AllowLists(
                organizations=set(self._allow.organizations),
                mirror_domains=set(self._allow.mirror_domains),
                customer_packages=set(self._allow.customer_packages),
            )

    def deny_trusted(self, ref: PackageRef) -> None:
        """Analyst feedback: exclude a package from future trusted sets."""
        with self._lock:
            self._denied.add(ref.key())
            self._append(
                {"kind": "deny", "registry": ref.registry.value, "name": ref.raw, "action": "add"}
            )

    def is_denied(self, ref: PackageRef) -> bool:
        with self._lock:
            return ref.key() in self._denied


def is_stale(age: timedelta) -> bool:
    return age > STALENESS_WARN_AFTER


def _warn_missing_signal(meta: PackageMetadata) -> None:
    reg = meta.ref.registry
    if reg in DOWNLOAD_REGISTRIES and meta.weekly_downloads is None:
        logger.warning("%s lacks weekly_downloads", meta.ref)
    if reg in RANKING_REGISTRIES and meta.avg_ranking is None:
        logger.warning("%s lacks avg_ranking", meta.ref)


def _meta_from_record(registry: RegistryId, data: dict) -> PackageMetadata:
    """Build a record from one Metadata Record line. Raises on bad shape."""
    ref = parse_name(registry, data["name"])
    versions = []
    for v in data.get("versions") or []:
        versions.append((str(v["version"]), _parse_ts(v["published_at"])))
    readme = data.get("readme")
    truncated = False
    if readme is not None:
        encoded = readme.encode("utf-8")
        if len(encoded) > README_CAP_BYTES:
            readme = encoded[:README_CAP_BYTES].decode("utf-8", errors="ignore")
            truncated = True
    relocation = None
    if data.get("relocation_target"):
        relocation = parse_name(registry, data["relocation_target"])
    downloads = data.get("weekly_downloads")
    if downloads is not None:
        downloads = int(downloads)
        if downloads < 0:
            raise ValueError("negative weekly_downloads")
    ranking = data.get("avg_ranking")
    if ranking is not None:
        ranking = float(ranking)
        if ranking < 0:
            raise ValueError("negative avg_ranking")
    maintainers = data.get("maintainers") or []
    if not isinstance(maintainers, list):
        raise ValueError("maintainers must be a list")
    return PackageMetadata(
        ref=ref,
        description=data.get("description"),
        readme=readme,
        license=data.get("license"),
        maintainers=[str(m) for m in maintainers],
        repository_url=data.get("repository_url"),
        versions=versions,
        weekly_downloads=downloads,
        avg_ranking=ranking,
        verified_prefix=bool(data.get("verified_prefix", False)),
        relocation_target=relocation,
        created_at=_parse_ts(data["created_at"]) if data.get("created_at") else None,
        readme_truncated=truncated,
    )


def _meta_to_json(meta: PackageMetadata) -> dict:
    return {
        "registry": meta.ref.registry.value,
        "name": meta.ref.raw,
        "description": meta.description,
        "readme": meta.readme,
        "license": meta.license,
        "maintainers": meta.maintainers,
        "repository_url": meta.repository_url,
        "versions": [
            {"version": v, "published_at": _format_ts(ts)} for v, ts in meta.versions
        ],
        "weekly_downloads": meta.weekly_downloads,
        "avg_ranking": meta.avg_ranking,
        "verified_prefix": meta.verified_prefix,
        "relocation_target": meta.relocation_target.raw if meta.relocation_target else None,
        "created_at": _format_ts(meta.created_at) if meta.created_at else None,
        "readme_truncated": meta.readme_truncated,
    }


def _meta_from_json(data: dict) -> PackageMetadata:
    registry = RegistryId.parse(data["registry"])
    meta = _meta_from_record(registry, data)
    meta.readme_truncated = bool(data.get("readme_truncated", False))
    return meta


def iter_jsonl(path: str | Path) -> Iterable[str]:
    """Line iterator for a JSONL dump file (ingest helper)."""
    try:
        with Path(path).open("r", encoding="utf-8") as fh:
            yield from fh
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
