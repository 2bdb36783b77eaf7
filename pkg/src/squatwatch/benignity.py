"""Benignity filter: fifteen metadata rules, a weighted risk score, and
the final verdict for each flagged candidate pair.

Seven directives are decided purely from metadata; the other eight come
from a pluggable judge. Every directive is tri-state (True / False /
unknown) and carries its source. The risk score is a logistic over
signed directive activations, with benign-leaning rules pushing down and
threat-leaning rules (adversarial name, suspicious intent, missing
readme) pushing up.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DegenerateLabels, JudgeUnavailable
from .judge import (
    JUDGE_DIRECTIVES,
    HeuristicJudge,
    JudgeInterface,
    JudgeRequest,
    JudgeResponse,
    PackageView,
)
from .registry import RegistryId
from .search import CandidatePair, similarity_key
from .store import AllowLists, MetadataStore, PackageMetadata

logger = logging.getLogger(__name__)

ACTIVE_WINDOW = timedelta(days=30)
ACTIVE_VERSION_COUNT = 5
NAME_LENGTH_RATIO = 0.30

DIRECTIVES = (
    "obvious_not_typosquat",
    "has_distinct_purpose",
    "is_fork",
    "active_development",
    "no_readme",
    "overlapped_maintainers",
    "name_length_unrelated",
    "is_known_maintainer",
    "has_suspicious_intent",
    "is_test",
    "is_adversarial_name",
    "is_relocated_package",
    "org_allowlisted",
    "mirror_domain",
    "verified_prefix",
)

METADATA_DIRECTIVES = frozenset(
    {
        "active_development",
        "overlapped_maintainers",
        "name_length_unrelated",
        "is_relocated_package",
        "org_allowlisted",
        "mirror_domain",
        "verified_prefix",
    }
)

THREAT_LEANING = frozenset({"is_adversarial_name", "has_suspicious_intent", "no_readme"})

RULE_IDS = {
    "obvious_not_typosquat": "R1",
    "has_distinct_purpose": "R2",
    "is_fork": "R3",
    "active_development": "R4",
    "no_readme": "R5",
    "overlapped_maintainers": "R6",
    "name_length_unrelated": "R7",
    "is_adversarial_name": "R7",
    "is_known_maintainer": "R8",
    "has_suspicious_intent": "R10",
    "is_test": "R11",
    "is_relocated_package": "R12",
    "org_allowlisted": "R13",
    "mirror_domain": "R14",
    "verified_prefix": "R15",
}

BENIGN_SHORT_CIRCUIT = (
    "org_allowlisted",
    "mirror_domain",
    "verified_prefix",
    "is_relocated_package",
    "overlapped_maintainers",
    "obvious_not_typosquat",
)


@dataclass
class RuleOutcome:
    """Tri-state value and source for each of the fifteen directives."""

    directives: dict[str, Optional[bool]] = field(
        default_factory=lambda: {d: None for d in DIRECTIVES}
    )
    sources: dict[str, str] = field(default_factory=dict)

    def set(self, directive: str, value: Optional[bool], source: str) -> None:
        if directive not in self.directives:
            raise KeyError(f"unknown directive: {directive}")
        if source == "judge" and directive in METADATA_DIRECTIVES:
            raise ValueError(f"{directive} is metadata-sourced only")
        self.directives[directive] = value
        self.sources[directive] = source

    def get(self, directive: str) -> Optional[bool]:
        return self.directives[directive]

    def activation(self, directive: str) -> float:
        """Signed contribution: +1 threat-leaning true, -1 benign true, else 0."""
        value = self.directives[directive]
        if value is not True:
            return 0.0
        return 1.0 if directive in THREAT_LEANING else -1.0


@dataclass
class RuleWeights:
    weights: dict[str, float] = field(
        default_factory=lambda: {
            d: (2.0 if d in ("has_distinct_purpose", "has_suspicious_intent") else 1.0)
            for d in DIRECTIVES
        }
    )
    bias: float = 0.0
    decision_threshold: float = 0.5
    fold_metrics: list[dict[str, float]] = field(default_factory=list)

    def save(self, path: str | Path) -> None:
        payload = {
            "weights": self.weights,
            "bias": self.bias,
            "decision_threshold": self.decision_threshold,
            "fold_metrics": self.fold_metrics,
        }
        Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RuleWeights":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        weights = {d: float(payload["weights"].get(d, 1.0)) for d in DIRECTIVES}
        return cls(
            weights=weights,
            bias=float(payload.get("bias", 0.0)),
            decision_threshold=float(payload.get("decision_threshold", 0.5)),
            fold_metrics=list(payload.get("fold_metrics", [])),
        )


@dataclass(frozen=True)
class BenignityReport:
    pair: CandidatePair
    outcomes: RuleOutcome
    risk_score: float
    verdict: str  # "benign" | "suspected_threat"
    explanation: tuple[tuple[str, str], ...]


def deterministic_checks(
    pair: CandidatePair,
    store: MetadataStore,
    allow_lists: AllowLists,
    now: Optional[datetime] = None,
) -> RuleOutcome:
    """Fill the seven metadata-decided directives; the rest stay unknown."""
    now = now or datetime.now(timezone.utc)
    outcome = RuleOutcome()
    suspect, target = pair.suspect, pair.target
    s_meta = store.get_metadata(suspect)
    t_meta = store.get_metadata(target)

    # R4: recently updated or a real release history.
    if s_meta is None or (s_meta.last_updated_at is None and not s_meta.versions):
        outcome.set("active_development", None, "metadata")
    else:
        recent = (
            s_meta.last_updated_at is not None
            and now - s_meta.last_updated_at <= ACTIVE_WINDOW
        )
        outcome.set(
            "active_development",
            recent or len(s_meta.versions) > ACTIVE_VERSION_COUNT,
            "metadata",
        )

    # R6: shared maintainer identifiers.
    if s_meta is None or t_meta is None or not s_meta.maintainers or not t_meta.maintainers:
        outcome.set("overlapped_maintainers", None, "metadata")
    else:
        s_ids = {m.lower() for m in s_meta.maintainers}
        t_ids = {m.lower() for m in t_meta.maintainers}
        outcome.set("overlapped_maintainers", bool(s_ids & t_ids), "metadata")

    # R7: very different name lengths mean unrelated projects.
    a, b = similarity_key(suspect), similarity_key(target)
    ratio = abs(len(a) - len(b)) / max(len(a), len(b))
    outcome.set("name_length_unrelated", ratio > NAME_LENGTH_RATIO, "metadata")

    # R12: declared relocation onto the target coordinate.
    if s_meta is None:
        outcome.set("is_relocated_package", None, "metadata")
    else:
        relocated = (
            s_meta.relocation_target is not None
            and s_meta.relocation_target.raw == target.raw
        )
        outcome.set("is_relocated_package", relocated, "metadata")

    # R13: namespace on the approved organizations list.
    org = suspect.namespace is not None and allow_lists.has_organization(suspect.namespace)
    outcome.set("org_allowlisted", org, "metadata")

    # R14: recognized mirror/proxy domain differing from the target's.
    mirror = (
        suspect.domain is not None
        and target.domain is not None
        and suspect.domain.lower() != target.domain.lower()
        and allow_lists.has_mirror_domain(suspect.domain)
    )
    outcome.set("mirror_domain", mirror, "metadata")

    # R15: registry-verified reserved prefix.
    if suspect.registry is RegistryId.NUGET:
        if s_meta is None:
            outcome.set("verified_prefix", None, "metadata")
        else:
            outcome.set("verified_prefix", s_meta.verified_prefix, "metadata")
    else:
        outcome.set("verified_prefix", False, "metadata")

    return outcome


def build_judge_request(
    pair: CandidatePair,
    store: MetadataStore,
    outcome: RuleOutcome,
) -> JudgeRequest:
    s_meta = store.get_metadata(pair.suspect)
    t_meta = store.get_metadata(pair.target)
    return JudgeRequest(
        typo_name=pair.suspect.raw,
        legit_name=pair.target.raw,
        registry=pair.suspect.registry.value,
        typo_metadata=PackageView.from_metadata(s_meta, pair.suspect.raw),
        legit_metadata=PackageView.from_metadata(t_meta, pair.target.raw),
        composite_max_score=pair.composite.max_score,
        name_length_unrelated=outcome.get("name_length_unrelated") is True,
        relocated=outcome.get("is_relocated_package"),
    )


def run_judge(judge: JudgeInterface, request: JudgeRequest) -> JudgeResponse:
    """Ask the judge; falls back to the heuristic judge when unavailable."""
    try:
        return judge.run(request)
    except JudgeUnavailable:
        if isinstance(judge, HeuristicJudge):
            raise
        logger.warning("external judge unavailable; falling back to heuristic")
        return HeuristicJudge().run(request)


def merge_judge_response(outcome: RuleOutcome, response: JudgeResponse) -> RuleOutcome:
    """Copy judge answers into the outcome; metadata directives win."""
    for directive in JUDGE_DIRECTIVES:
        if directive in METADATA_DIRECTIVES:
            continue
        outcome.set(directive, response.get(directive), "judge")
    return outcome


def _logistic(x: float) -> float:
    return 1.0 / (1.0 + np.exp(-x))


def risk_score(outcomes: RuleOutcome, weights: RuleWeights) -> float:
    """logistic(bias + sum of weight * signed activation), in [0, 1]."""
    total = weights.bias
    for directive in DIRECTIVES:
        total += weights.weights.get(directive, 1.0) * outcomes.activation(directive)
    return float(_logistic(total))


def verdict(
    pair: CandidatePair,
    outcomes: RuleOutcome,
    score: float,
    threshold: float,
) -> BenignityReport:
    """Final call: benign short-circuits, suspicious short-circuit, else score."""
    explanation: list[tuple[str, str]] = []

    for directive in BENIGN_SHORT_CIRCUIT:
        if outcomes.get(directive) is True:
            explanation.append(
                (RULE_IDS[directive], f"{directive} is true; pair is benign")
            )
            return BenignityReport(pair, outcomes, score, "benign", tuple(explanation))

    if (
        outcomes.get("has_suspicious_intent") is True
        and outcomes.get("has_distinct_purpose") is False
    ):
        explanation.append(
            (RULE_IDS["has_suspicious_intent"], "suspicious intent with no distinct purpose")
        )
        return BenignityReport(pair, outcomes, score, "suspected_threat", tuple(explanation))

    for directive in DIRECTIVES:
        if outcomes.get(directive) is True:
            explanation.append((RULE_IDS[directive], f"{directive} is true"))
    label = "suspected_threat" if score >= threshold else "benign"
    relation = ">=" if score >= threshold else "<"
    explanation.append(
        ("score", f"risk score {score:.3f} {relation} threshold {threshold:.2f}")
    )
    return BenignityReport(pair, outcomes, score, label, tuple(explanation))


class BenignityFilter:
    """End-to-end rule evaluation for candidate pairs.

    Deterministic checks and scoring are pure; judge calls for a batch
    run with bounded parallelism (worth it only for the external judge,
    whose latency is network-bound).
    """

    def __init__(
        self,
        store: MetadataStore,
        judge: Optional[JudgeInterface] = None,
        weights: Optional[RuleWeights] = None,
        judge_parallelism: int = 4,
    ):
        self.store = store
        self.judge = judge or HeuristicJudge()
        self.weights = weights or RuleWeights()
        self.judge_parallelism = max(1, judge_parallelism)

    def filter_pair(
        self, pair: CandidatePair, now: Optional[datetime] = None
    ) -> BenignityReport:
        allow = self.store.allow_lists()
        outcome = deterministic_checks(pair, self.store, allow, now=now)
        request = build_judge_request(pair, self.store, outcome)
        response = run_judge(self.judge, request)
        merge_judge_response(outcome, response)
        score = risk_score(outcome, self.weights)
        return verdict(pair, outcome, score, self.weights.decision_threshold)

    def filter_pairs(
        self, pairs: list[CandidatePair], now: Optional[datetime] = None
    ) -> list[BenignityReport]:
        """Reports for a batch of pairs, in input order."""
        if len(pairs) <= 1 or isinstance(self.judge, HeuristicJudge):
            return [self.filter_pair(pair, now=now) for pair in pairs]
        from concurrent.futures import ThreadPoolExecutor

        workers = min(self.judge_parallelism, len(pairs))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: self.filter_pair(p, now=now), pairs))


# -- weight fitting ---------------------------------------------------------


def features_from_outcome(outcome: RuleOutcome) -> np.ndarray:
    return np.array([outcome.activation(d) for d in DIRECTIVES], dtype=np.float64)


def _loss_and_grad(
    params: np.ndarray, X: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy of logistic(X @ w + b) and its gradient.

    ``params`` stacks the weight vector with the bias as the last entry.
    """
    w, b = params[:-1], params[-1]
    z = X @ w + b
    p = 1.0 / (1.0 + np.exp(-np.clip(z, -35, 35)))
    eps = 1e-12
    loss = float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))
    residual = (p - y) / len(y)
    grad = np.concatenate([X.T @ residual, [residual.sum()]])
    return loss, grad


def _fit_logistic(
    X: np.ndarray, y: np.ndarray, iterations: int = 800, lr: float = 0.5
) -> np.ndarray:
    params = np.zeros(X.shape[1] + 1)
    for _ in range(iterations):
        _, grad = _loss_and_grad(params, X, y)
        params -= lr * grad
    return params


def _f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def fit_rule_weights(
    labeled: list[tuple[RuleOutcome, str]],
    folds: int = 5,
    seed: int = 0,
) -> RuleWeights:
    """Learn weights by logistic regression with k-fold cross-validation.

    The decision threshold maximizing F1 over out-of-fold predictions is
    selected; per-fold precision/recall at that threshold is reported in
    ``fold_metrics``. Deterministic for a fixed seed; row order does not
    matter (rows are canonicalized before the fold split).

    Raises DegenerateLabels with a single class and ValueError for
    folds < 2 or fewer than 50 rows.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if len(labeled) < 50:
        raise ValueError("need at least 50 labeled rows")
    labels = {label for _, label in labeled}
    if labels - {"benign", "threat"}:
        raise ValueError(f"unknown labels: {labels - {'benign', 'threat'}}")
    if len(labels) < 2:
        raise DegenerateLabels("both classes are required")

    rows = sorted(
        ((features_from_outcome(o), 1.0 if label == "threat" else 0.0) for o, label in labeled),
        key=lambda r: (tuple(r[0]), r[1]),
    )
    X = np.stack([r[0] for r in rows])
    y = np.array([r[1] for r in rows])

    rng = np.random.default_rng(seed)
    assignment = rng.permutation(len(rows)) % folds

    oof = np.zeros(len(rows))
    fold_params: list[np.ndarray] = []
    for fold in range(folds):
        mask = assignment == fold
        params = _fit_logistic(X[~mask], y[~mask])
        fold_params.append(params)
        z = X[mask] @ params[:-1] + params[-1]
        oof[mask] = 1.0 / (1.0 + np.exp(-z))

    thresholds = np.round(np.arange(0.01, 1.0, 0.01), 2)
    best_threshold, best_f1 = 0.5, -1.0
    for t in thresholds:
        predicted = oof >= t
        tp = int(np.sum(predicted & (y == 1)))
        fp = int(np.sum(predicted & (y == 0)))
        fn = int(np.sum(~predicted & (y == 1)))
        f1 = _f1(tp, fp, fn)
        if f1 > best_f1:
            best_f1, best_threshold = f1, float(t)

    fold_metrics = []
    for fold in range(folds):
        mask = assignment == fold
        predicted = oof[mask] >= best_threshold
        truth = y[mask] == 1
        tp = int(np.sum(predicted & truth))
        fp = int(np.sum(predicted & ~truth))
        fn = int(np.sum(~predicted & truth))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        fold_metrics.append(
            {"fold": float(fold), "precision": precision, "recall": recall}
        )
        logger.info("fold %d precision %.3f recall %.3f", fold, precision, recall)

    final = _fit_logistic(X, y)
    weights = {d: float(final[i]) for i, d in enumerate(DIRECTIVES)}
    return RuleWeights(
        weights=weights,
        bias=float(final[-1]),
        decision_threshold=best_threshold,
        fold_metrics=fold_metrics,
    )


def cv_f1(weights: RuleWeights, labeled: list[tuple[RuleOutcome, str]]) -> float:
    """F1 of the fitted weights over a labeled set at its threshold."""
    X = np.stack([features_from_outcome(o) for o, _ in labeled])
    y = np.array([1.0 if label == "threat" else 0.0 for _, label in labeled])
    w = np.array([weights.weights[d] for d in DIRECTIVES])
    z = X @ w + weights.bias
    p = 1.0 / (1.0 + np.exp(-z))
    predicted = p >= weights.decision_threshold
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    fn = int(np.sum(~predicted & (y == 1)))
    return _f1(tp, fp, fn)
