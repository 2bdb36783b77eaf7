"""Judge interface answering the nine subjective benignity directives.

Two implementations: a deterministic heuristic judge (offline, used in
tests and as fallback) and an external judge that posts a prompt to an
HTTP completion endpoint and parses TRUE/FALSE answers. Metadata bodies
in requests are truncated to 4 KiB before prompting.
"""

from __future__ import annotations

import json
import logging
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

from .errors import JudgeUnavailable
from .store import PackageMetadata

logger = logging.getLogger(__name__)

METADATA_TRUNCATE_BYTES = 4 * 1024

JUDGE_DIRECTIVES = (
    "obvious_not_typosquat",
    "is_adversarial_name",
    "is_fork",
    "has_distinct_purpose",
    "is_test",
    "no_readme",
    "is_known_maintainer",
    "has_suspicious_intent",
    "is_relocated_package",
)

_DEFAULT_TEST_LEXICON = (
    "test",
    "tests",
    "testing",
    "demo",
    "sample",
    "example",
    "experiment",
    "experimental",
    "playground",
    "sandbox",
    "tutorial",
    "practice",
    "hello-world",
    "helloworld",
)

_DATA_DIR = Path(__file__).parent / "data"


def _truncate(text: Optional[str]) -> Optional[str]:
    if text is None:
        return None
    encoded = text.encode("utf-8")
    if len(encoded) <= METADATA_TRUNCATE_BYTES:
        return text
    return encoded[:METADATA_TRUNCATE_BYTES].decode("utf-8", errors="ignore")


@dataclass(frozen=True)
class PackageView:
    """The metadata slice a judge is allowed to see."""

    name: str
    description: Optional[str] = None
    readme: Optional[str] = None
    license: Optional[str] = None
    maintainers: tuple[str, ...] = ()
    repository_url: Optional[str] = None

    @classmethod
    def from_metadata(cls, meta: Optional[PackageMetadata], name: str) -> "PackageView":
        if meta is None:
            return cls(name=name)
        return cls(
            name=name,
            description=_truncate(meta.description),
            readme=_truncate(meta.readme),
            license=meta.license,
            maintainers=tuple(meta.maintainers),
            repository_url=meta.repository_url,
        )

    def render(self) -> str:
        lines = [f"name: {self.name}"]
        if self.description:
            lines.append(f"description: {self.description}")
        lines.append(f"readme: {self.readme if self.readme else '(none)'}")
        if self.license:
            lines.append(f"license: {self.license}")
        if self.maintainers:
            lines.append(f"maintainers: {', '.join(self.maintainers)}")
        if self.repository_url:
            lines.append(f"repository: {self.repository_url}")
        return "\n".join(lines)


@dataclass(frozen=True)
class JudgeRequest:
    typo_name: str
    legit_name: str
    registry: str
    typo_metadata: PackageView
    legit_metadata: PackageView
    composite_max_score: float = 0.0
    name_length_unrelated: bool = False
    relocated: Optional[bool] = None


@dataclass(frozen=True)
class JudgeResponse:
    """Tri-state answer per directive; None means unknown."""

    answers: dict[str, Optional[bool]] = field(default_factory=dict)

    def get(self, directive: str) -> Optional[bool]:
        return self.answers.get(directive)

    @classmethod
    def unknown(cls) -> "JudgeResponse":
        return cls({d: None for d in JUDGE_DIRECTIVES})


class JudgeInterface(Protocol):
    name: str

    def run(self, request: JudgeRequest) -> JudgeResponse: ...


def _tokens(text: Optional[str]) -> set[str]:
    if not text:
        return set()
    return set(re.findall(r"[a-z0-9]+", text.lower()))


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def load_word_list(path: str | Path) -> tuple[str, ...]:
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.append(line)
    return tuple(words)


class HeuristicJudge:
    """Deterministic metadata heuristics standing in for a language model.

    Rules are fixed thresholds over descriptions, readmes, and
    maintainer overlap; identical inputs always produce identical
    answers.
    """

    name = "heuristic"

    def __init__(
        self,
        reputable_maintainers: Optional[set[str]] = None,
        test_lexicon: Optional[tuple[str, ...]] = None,
    ):
        if reputable_maintainers is None:
            reputable_maintainers = set(self._load_default_reputable())
        self.reputable = {m.lower() for m in reputable_maintainers}
        self.test_lexicon = tuple(test_lexicon or _DEFAULT_TEST_LEXICON)

    @staticmethod
    def _load_default_reputable() -> tuple[str, ...]:
        path = _DATA_DIR / "reputable_maintainers.txt"
        if path.exists():
            return load_word_list(path)
        return ()

    def run(self, request: JudgeRequest) -> JudgeResponse:
        typo, legit = request.typo_metadata, request.legit_metadata
        answers: dict[str, Optional[bool]] = {}

        readme = typo.readme or ""
        answers["no_readme"] = len(readme.strip()) < 40

        fork_text = (typo.readme or typo.description or "").lower()
        fork_overlap = max(
            _jaccard(_tokens(typo.readme), _tokens(legit.readme)),
            _jaccard(_tokens(typo.description), _tokens(legit.description)),
        )
        answers["is_fork"] = fork_overlap > 0.8 or "fork of" in fork_text

        name_tokens = _tokens(request.typo_name) | _tokens(typo.description)
        answers["is_test"] = any(word in name_tokens for word in self.test_lexicon)

        t_desc, l_desc = _tokens(typo.description), _tokens(legit.description)
        if len(t_desc) >= 5 and len(l_desc) >= 5:
            answers["has_distinct_purpose"] = _jaccard(t_desc, l_desc) < 0.2
        else:
            answers["has_distinct_purpose"] = None

        answers["is_adversarial_name"] = (
            request.composite_max_score >= 0.9 and not request.name_length_unrelated
        )

        answers["obvious_not_typosquat"] = (
            answers["has_distinct_purpose"] is True
            and answers["is_adversarial_name"] is not True
        )

        if typo.description and legit.description:
            near_identical = _jaccard(t_desc, l_desc) >= 0.9 and len(t_desc) >= 3
            disjoint_maintainers = (
                bool(typo.maintainers)
                and bool(legit.maintainers)
                and not (
                    {m.lower() for m in typo.maintainers}
                    & {m.lower() for m in legit.maintainers}
                )
            )
            answers["has_suspicious_intent"] = near_identical and disjoint_maintainers
        else:
            answers["has_suspicious_intent"] = None

        answers["is_known_maintainer"] = any(
            m.lower() in self.reputable for m in typo.maintainers
        )

        answers["is_relocated_package"] = request.relocated
        return JudgeResponse(answers)


_TRUE_FALSE_RE = re.compile(
    r"(?P<directive>[a-z_]+)\W{0,8}(?P<answer>TRUE|FALSE)", re.IGNORECASE
)


def parse_judge_text(text: str) -> JudgeResponse:
    """Tolerant scan for "directive ... TRUE/FALSE" lines."""
    answers: dict[str, Optional[bool]] = {d: None for d in JUDGE_DIRECTIVES}
    for line in text.splitlines():
        for match in _TRUE_FALSE_RE.finditer(line):
            directive = match.group("directive").lower()
            if directive in answers:
                answers[directive] = match.group("answer").upper() == "TRUE"
    return JudgeResponse(answers)


def _load_prompt(name: str) -> str:
    return (_DATA_DIR / "prompts" / name).read_text(encoding="utf-8")


def render_prompts(request: JudgeRequest) -> tuple[str, str]:
    """Fill the system/user prompt templates for one pair."""
    system = _load_prompt("system.txt")
    user = _load_prompt("user.txt")
    fields = {
        "typo_name": request.typo_name,
        "typo_metadata": request.typo_metadata.render(),
        "legit_name": request.legit_name,
        "legit_metadata": request.legit_metadata.render(),
        "registry": request.registry,
    }
    for key, value in fields.items():
        user = user.replace("{" + key + "}", value)
    return system, user


class ExternalJudge:
    """Posts the judge prompt to an HTTP completion endpoint.

    Request body: JSON {model, system, user}; the response is scanned
    with the tolerant TRUE/FALSE parser. One retry on transport errors,
    then JudgeUnavailable.
    """

    name = "external"

    def __init__(self, endpoint: str, model: str = "judge", timeout: float = 30.0):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout

    def run(self, request: JudgeRequest) -> JudgeResponse:
        system, user = render_prompts(request)
        body = json.dumps({"model": self.model, "system": system, "user": user}).encode()
        last_error: Optional[Exception] = None
        for _ in range(2):
            try:
                req = urllib.request.Request(
                    self.endpoint,
                    data=body,
                    headers={"Content-Type": "application/json"},
                    method="POST",
                )
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    payload = resp.read().decode("utf-8", errors="replace")
                return parse_judge_text(_extract_text(payload))
            except (urllib.error.URLError, OSError, TimeoutError) as exc:
                last_error = exc
                logger.warning("external judge call failed: %s", exc)
        raise JudgeUnavailable(f"judge endpoint {self.endpoint} unreachable: {last_error}")


def _extract_text(payload: str) -> str:
    """Pull completion text out of common response shapes, else raw body."""
    try:
        data = json.loads(payload)
    except json.JSONDecodeError:
        return payload
    if isinstance(data, dict):
        choices = data.get("choices")
        if isinstance(choices, list) and choices:
            first = choices[0]
            if isinstance(first, dict):
                message = first.get("message")
                if isinstance(message, dict) and isinstance(message.get("content"), str):
                    return message["content"]
                if isinstance(first.get("text"), str):
                    return first["text"]
        for key in ("content", "text", "output", "answer"):
            if isinstance(data.get(key), str):
                return data[key]
    return payload
