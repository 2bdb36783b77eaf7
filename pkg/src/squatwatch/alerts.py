"""Alert persistence: append-only event log plus in-memory projection.

Two event kinds: ``created`` (full alert payload) and ``verdict``
(status transition, optionally bundled with an allow-list addition).
Replaying the log reconstructs the projection exactly; transitions are
only legal from ``open``.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .benignity import DIRECTIVES, BenignityReport, RuleOutcome
from .errors import IoFailure, SquatwatchError
from .registry import AttackCategory, PackageRef, RegistryId, parse_name
from .search import AlertDraft, CandidatePair
from .similarity import SimilarityBreakdown

OPEN = "open"
CONFIRMED_ACTIVE = "confirmed_active"
CONFIRMED_STEALTHY = "confirmed_stealthy"
DISMISSED_BENIGN = "dismissed_benign"
STATUSES = (OPEN, CONFIRMED_ACTIVE, CONFIRMED_STEALTHY, DISMISSED_BENIGN)
CLOSED_STATUSES = (CONFIRMED_ACTIVE, CONFIRMED_STEALTHY, DISMISSED_BENIGN)


class AlertNotFound(SquatwatchError):
    pass


class AlertConflict(SquatwatchError):
    """Illegal transition: the alert is no longer open."""


@dataclass
class Alert:
    id: str
    created_at: datetime
    draft: AlertDraft
    report: BenignityReport
    status: str = OPEN
    analyst_note: Optional[str] = None

    @property
    def suspect(self) -> PackageRef:
        return self.draft.suspect

    @property
    def target(self) -> PackageRef:
        return self.report.pair.target


def alert_id(suspect: PackageRef, target: PackageRef, snapshot_key: str) -> str:
    digest = hashlib.sha256(
        f"{suspect.registry.value}|{suspect.raw}|{target.raw}|{snapshot_key}".encode()
    )
    return digest.hexdigest()[:16]


# -- JSON codecs ------------------------------------------------------------


def _ref_to_json(ref: PackageRef) -> dict:
    return {"registry": ref.registry.value, "name": ref.raw}


def _ref_from_json(data: dict) -> PackageRef:
    return parse_name(RegistryId.parse(data["registry"]), data["name"])


def pair_to_json(pair: CandidatePair) -> dict:
    return {
        "suspect": _ref_to_json(pair.suspect),
        "target": _ref_to_json(pair.target),
        "lexical_distance": pair.lexical_distance,
        "cosine_full": pair.cosine_full,
        "cosine_namespace": pair.cosine_namespace,
        "cosine_identifier": pair.cosine_identifier,
        "composite": pair.composite.as_dict(),
        "category": pair.category.value,
        "channel": pair.channel,
    }


def pair_from_json(data: dict) -> CandidatePair:
    composite = data["composite"]
    return CandidatePair(
        suspect=_ref_from_json(data["suspect"]),
        target=_ref_from_json(data["target"]),
        lexical_distance=data["lexical_distance"],
        cosine_full=data["cosine_full"],
        cosine_namespace=data.get("cosine_namespace"),
        cosine_identifier=data.get("cosine_identifier"),
        composite=SimilarityBreakdown(
            normalized_damerau_levenshtein=composite["normalized_damerau_levenshtein"],
            ngram_jaccard=composite["ngram_jaccard"],
            phonetic=composite["phonetic"],
            substring=composite["substring"],
            fuzzy_ratio=composite["fuzzy_ratio"],
        ),
        category=AttackCategory(data["category"]),
        channel=data["channel"],
    )


def report_to_json(report: BenignityReport) -> dict:
    tri = {True: "true", False: "false", None: "unknown"}
    return {
        "pair": pair_to_json(report.pair),
        "outcomes": {d: tri[report.outcomes.get(d)] for d in DIRECTIVES},
        "sources": dict(report.outcomes.sources),
        "risk_score": report.risk_score,
        "verdict": report.verdict,
        "explanation": [list(entry) for entry in report.explanation],
    }


def report_from_json(data: dict) -> BenignityReport:
    tri = {"true": True, "false": False, "unknown": None}
    outcome = RuleOutcome()
    sources = data.get("sources", {})
    for directive, value in data["outcomes"].items():
        outcome.directives[directive] = tri[value]
        if directive in sources:
            outcome.sources[directive] = sources[directive]
    return BenignityReport(
        pair=pair_from_json(data["pair"]),
        outcomes=outcome,
        risk_score=data["risk_score"],
        verdict=data["verdict"],
        explanation=tuple((rule, text) for rule, text in data["explanation"]),
    )


def draft_to_json(draft: AlertDraft) -> dict:
    return {
        "suspect": _ref_to_json(draft.suspect),
        "pairs": [pair_to_json(p) for p in draft.pairs],
        "created_at": draft.created_at.isoformat(),
    }


def draft_from_json(data: dict) -> AlertDraft:
    return AlertDraft(
        suspect=_ref_from_json(data["suspect"]),
        pairs=tuple(pair_from_json(p) for p in data["pairs"]),
        created_at=datetime.fromisoformat(data["created_at"]),
    )


def alert_to_json(alert: Alert) -> dict:
    return {
        "id": alert.id,
        "created_at": alert.created_at.isoformat(),
        "status": alert.status,
        "analyst_note": alert.analyst_note,
        "registry": alert.suspect.registry.value,
        "suspect": alert.suspect.raw,
        "target": alert.target.raw,
        "category": alert.report.pair.category.value,
        "risk_score": alert.report.risk_score,
        "draft": draft_to_json(alert.draft),
        "report": report_to_json(alert.report),
    }


def _alert_from_json(data: dict) -> Alert:
    return Alert(
        id=data["id"],
        created_at=datetime.fromisoformat(data["created_at"]),
        draft=draft_from_json(data["draft"]),
        report=report_from_json(data["report"]),
        status=data["status"],
        analyst_note=data.get("analyst_note"),
    )


class AlertStore:
    """Alerts with an append-only transition log and atomic verdicts."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.RLock()
        self._alerts: dict[str, Alert] = {}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoFailure(f"cannot read alert log {self.path}: {exc}") from exc
        for line in lines:
            if not line.strip():
                continue
            event = json.loads(line)
            if event["event"] == "created":
                alert = _alert_from_json(event["alert"])
                self._alerts[alert.id] = alert
            elif event["event"] == "verdict":
                alert = self._alerts.get(event["id"])
                if alert is not None:
                    alert.status = event["status"]
                    alert.analyst_note = event.get("note")

    def _append(self, event: dict) -> None:
        try:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, separators=(",", ":")) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot append alert event: {exc}") from exc

    def create(
        self,
        draft: AlertDraft,
        report: BenignityReport,
        snapshot_key: str,
    ) -> Optional[Alert]:
        """Persist a new open alert; returns None when it already exists."""
        aid = alert_id(draft.suspect, report.pair.target, snapshot_key)
        with self._lock:
            if aid in self._alerts:
                return None
            alert = Alert(
                id=aid,
                created_at=datetime.now(timezone.utc),
                draft=draft,
                report=report,
            )
            self._append({"event": "created", "alert": alert_to_json(alert)})
            self._alerts[aid] = alert
            return alert

    def get(self, alert_id_: str) -> Alert:
        with self._lock:
            alert = self._alerts.get(alert_id_)
        if alert is None:
            raise AlertNotFound(alert_id_)
        return alert

    def set_verdict(
        self,
        alert_id_: str,
        status: str,
        note: Optional[str] = None,
        allowlist_addition: Optional[dict] = None,
    ) -> Alert:
        """Transition open -> closed; records the bundled allow-list entry."""
        if status not in CLOSED_STATUSES:
            raise ValueError(f"status must be one of {CLOSED_STATUSES}")
        with self._lock:
            alert = self._alerts.get(alert_id_)
            if alert is None:
                raise AlertNotFound(alert_id_)
            if alert.status != OPEN:
                raise AlertConflict(f"alert {alert_id_} is already {alert.status}")
            event = {"event": "verdict", "id": alert_id_, "status": status, "note": note}
            if allowlist_addition:
                event["allowlist"] = allowlist_addition
            self._append(event)
            alert.status = status
            alert.analyst_note = note
            return alert

    def list(
        self,
        status: Optional[str] = None,
        registry: Optional[str] = None,
        category: Optional[str] = None,
        limit: int = 50,
        offset: int = 0,
    ) -> tuple[list[Alert], int]:
        """Filtered alerts sorted by risk score descending, plus the total."""
        with self._lock:
            rows = list(self._alerts.values())
        if status:
            rows = [a for a in rows if a.status == status]
        if registry:
            rows = [a for a in rows if a.suspect.registry.value == registry]
        if category:
            rows = [a for a in rows if a.report.pair.category.value == category]
        rows.sort(key=lambda a: (-a.report.risk_score, a.created_at, a.id))
        total = len(rows)
        return rows[offset : offset + max(limit, 0)], total

    def stats(self) -> dict:
        with self._lock:
            rows = list(self._alerts.values())
        by_status: dict[str, int] = {s: 0 for s in STATUSES}
        by_category: dict[str, int] = {}
        by_registry: dict[str, int] = {}
        for alert in rows:
            by_status[alert.status] = by_status.get(alert.status, 0) + 1
            cat = alert.report.pair.category.value
            by_category[cat] = by_category.get(cat, 0) + 1
            reg = alert.suspect.registry.value
            by_registry[reg] = by_registry.get(reg, 0) + 1
        return {
            "total": len(rows),
            "by_status": by_status,
            "by_category": by_category,
            "by_registry": by_registry,
        }

    def __len__(self) -> int:
        with self._lock:
            return len(self._alerts)
