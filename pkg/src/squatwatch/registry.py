"""Registry-aware package name parsing and attack-category classification.

Seven registries are supported. Flat registries (pypi, rubygems, unscoped
npm) identify a package by a single string; hierarchical registries carry
namespace components:

    maven        groupId:artifactId
    golang       domain/author/repo
    huggingface  author/model
    npm          @scope/name (scoped) or name (flat)
    nuget        Prefix.Rest (dotted) or name (flat)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import MalformedName, UnknownRegistry

DELIMITERS = "/:@-_."
_DELIM_RE = re.compile(r"[/:@\-_.]")
_LEGAL_RE = re.compile(r"^[A-Za-z0-9/:@\-_.]+$")


class RegistryId(str, Enum):
    NPM = "npm"
    PYPI = "pypi"
    RUBYGEMS = "rubygems"
    MAVEN = "maven"
    GOLANG = "golang"
    HUGGINGFACE = "huggingface"
    NUGET = "nuget"

    @classmethod
    def parse(cls, value: str) -> "RegistryId":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise UnknownRegistry(f"unsupported registry: {value!r}") from None


def normalize(text: str) -> str:
    """Lowercase and strip every delimiter character."""
    return _DELIM_RE.sub("", text.lower())


def split_tokens(text: str) -> list[str]:
    """Lowercased tokens of a name, split on the delimiter set."""
    return [t for t in _DELIM_RE.split(text.lower()) if t]


@dataclass(frozen=True)
class PackageRef:
    """A parsed, registry-aware package name.

    ``raw`` always reconstructs from the components with the registry's
    delimiter grammar; ``normalized`` is ``raw`` lowercased with all
    delimiters removed.
    """

    registry: RegistryId
    raw: str
    identifier: str
    namespace: Optional[str] = None
    domain: Optional[str] = None

    @property
    def normalized(self) -> str:
        return normalize(self.raw)

    @property
    def is_hierarchical(self) -> bool:
        return self.namespace is not None

    def key(self) -> tuple[str, str]:
        """Store key: exact registry + raw name."""
        return (self.registry.value, self.raw)

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return f"{self.registry.value}:{self.raw}"


class AttackCategory(str, Enum):
    ONE_STEP_LEVENSHTEIN = "one_step_levenshtein"
    SEQUENCE_REORDERING = "sequence_reordering"
    SCOPE_CONFUSION = "scope_confusion"
    SEMANTIC_SUBSTITUTION = "semantic_substitution"
    ALTERNATE_SPELLING = "alternate_spelling"
    IMPERSONATION_SQUATTING = "impersonation_squatting"
    COMPOUND_SQUATTING = "compound_squatting"
    DOMAIN_CONFUSION = "domain_confusion"
    OTHER_LEXICAL = "other_lexical"


def parse_name(registry: RegistryId | str, raw: str) -> PackageRef:
    """Parse ``raw`` according to the registry's naming grammar.

    Raises:
        UnknownRegistry: registry string is not supported.
        MalformedName: empty input, illegal characters, or the wrong
            number of hierarchical segments for the registry.
    """
    if isinstance(registry, str):
        registry = RegistryId.parse(registry)
    if not raw:
        raise MalformedName("package name is empty")
    if not _LEGAL_RE.match(raw):
        raise MalformedName(f"illegal characters in name: {raw!r}")

    if registry in (RegistryId.PYPI, RegistryId.RUBYGEMS):
        if "/" in raw or ":" in raw or "@" in raw:
            raise MalformedName(f"{registry.value} names are flat: {raw!r}")
        return PackageRef(registry, raw, identifier=raw)

    if registry is RegistryId.NPM:
        if raw.startswith("@"):
            segments = raw[1:].split("/")
            if len(segments) != 2 or not segments[0] or not segments[1]:
                raise MalformedName(f"scoped npm name must be @scope/name: {raw!r}")
            return PackageRef(registry, raw, identifier=segments[1], namespace=segments[0])
        if "/" in raw or "@" in raw or ":" in raw:
            raise MalformedName(f"unscoped npm name must be flat: {raw!r}")
        return PackageRef(registry, raw, identifier=raw)

    if registry is RegistryId.MAVEN:
        segments = raw.split(":")
        if len(segments) != 2 or not segments[0] or not segments[1]:
            raise MalformedName(f"maven name must be groupId:artifactId: {raw!r}")
        return PackageRef(registry, raw, identifier=segments[1], namespace=segments[0])

    if registry is RegistryId.GOLANG:
        segments = raw.split("/")
        # domain/author/repo, with any module sub-path folded into the
        # identifier so real module paths like host/a/b/v2 still parse.
        if len(segments) < 3 or not all(segments):
            raise MalformedName(f"golang name must be domain/author/repo: {raw!r}")
        return PackageRef(
            registry,
            raw,
            identifier="/".join(segments[2:]),
            namespace=segments[1],
            domain=segments[0],
        )

    if registry is RegistryId.HUGGINGFACE:
        segments = raw.split("/")
        if len(segments) != 2 or not all(segments):
            raise MalformedName(f"huggingface name must be author/model: {raw!r}")
        return PackageRef(registry, raw, identifier=segments[1], namespace=segments[0])

    if registry is RegistryId.NUGET:
        # Dotted names expose their first segment as a (possibly reserved)
        # prefix namespace; whether the prefix is *verified* is metadata.
        if "/" in raw or ":" in raw or "@" in raw:
            raise MalformedName(f"nuget names use dots only: {raw!r}")
        if "." in raw:
            prefix, rest = raw.split(".", 1)
            if not prefix or not rest:
                raise MalformedName(f"nuget name has empty dot segment: {raw!r}")
            return PackageRef(registry, raw, identifier=rest, namespace=prefix)
        return PackageRef(registry, raw, identifier=raw)

    raise UnknownRegistry(str(registry))  # pragma: no cover - enum is closed


def reconstruct(ref: PackageRef) -> str:
    """Rebuild the raw name from components (round-trip check helper)."""
    r = ref.registry
    if ref.namespace is None:
        return ref.identifier
    if r is RegistryId.MAVEN:
        return f"{ref.namespace}:{ref.identifier}"
    if r is RegistryId.GOLANG:
        return f"{ref.domain}/{ref.namespace}/{ref.identifier}"
    if r is RegistryId.HUGGINGFACE:
        return f"{ref.namespace}/{ref.identifier}"
    if r is RegistryId.NPM:
        return f"@{ref.namespace}/{ref.identifier}"
    if r is RegistryId.NUGET:
        return f"{ref.namespace}.{ref.identifier}"
    return ref.identifier  # pragma: no cover


# --- alternate-spelling substitution table -------------------------------

_BUILTIN_SUBSTITUTIONS: tuple[tuple[str, str], ...] = (
    ("our", "or"),      # colour/color
    ("ise", "ize"),
    ("yse", "yze"),
    ("isa", "iza"),
    ("ogue", "og"),
    ("ence", "ense"),
    ("ae", "e"),
    ("oe", "e"),
    ("re", "er"),       # centre/center
    ("ll", "l"),
    ("nn", "n"),
    ("mm", "m"),
    ("ss", "s"),
    ("tt", "t"),
    ("ee", "e"),
    ("oo", "o"),
    ("grey", "gray"),
    ("ph", "f"),
    ("ck", "k"),
    ("qu", "kw"),
    ("x", "ks"),
    ("0", "o"),
    ("1", "l"),
    ("1", "i"),
    ("3", "e"),
    ("4", "a"),
    ("5", "s"),
    ("7", "t"),
    ("8", "b"),
    ("rn", "m"),
    ("vv", "w"),
)


class SubstitutionTable:
    """Known visually or phonetically ambiguous spelling substitutions.

    File format: one ``from,to`` pair per line, UTF-8, ``#`` comments.
    """

    def __init__(self, pairs: Optional[list[tuple[str, str]]] = None):
        self.pairs: list[tuple[str, str]] = list(pairs or _BUILTIN_SUBSTITUTIONS)

    @classmethod
    def load(cls, path: str | Path) -> "SubstitutionTable":
        pairs: list[tuple[str, str]] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            frm, _, to = line.partition(",")
            if not frm or not to:
                continue
            pairs.append((frm.strip(), to.strip()))
        return cls(pairs)

    def explains(self, a: str, b: str) -> bool:
        """True if replacing one substitution occurrence turns a into b (or b into a)."""
        if a == b:
            return False
        for frm, to in self.pairs:
            if self._one_sub(a, b, frm, to) or self._one_sub(b, a, frm, to):
                return True
            if self._one_sub(a, b, to, frm) or self._one_sub(b, a, to, frm):
                return True
        return False

    @staticmethod
    def _one_sub(src: str, dst: str, frm: str, to: str) -> bool:
        start = 0
        while True:
            i = src.find(frm, start)
            if i < 0:
                return False
            if src[:i] + to + src[i + len(frm):] == dst:
                return True
            start = i + 1


_DEFAULT_TABLE = SubstitutionTable()


def _component_similar(a: str, b: str, cosine: Optional[float], cosine_min: float) -> bool:
    """Lexical or embedding proximity of one name component."""
    from .lexical import damerau_levenshtein

    if cosine is not None and cosine >= cosine_min:
        return True
    if damerau_levenshtein(a, b) <= 2:
        return True
    shorter, longer = sorted((a, b), key=len)
    return len(shorter) >= 4 and longer.startswith(shorter)


def classify_attack_category(
    suspect: PackageRef,
    target: PackageRef,
    lexical_distance: int,
    author_similarity: Optional[float] = None,
    substitutions: Optional[SubstitutionTable] = None,
    namespace_cosine_min: float = 0.90,
) -> AttackCategory:
    """Assign the single most specific attack category to a flagged pair.

    Precedence (most specific first): domain confusion, impersonation,
    compound, scope confusion, sequence reordering, one-step edit,
    alternate spelling, semantic substitution, other. Total on flagged
    pairs; exactly one category is returned.
    """
    table = substitutions or _DEFAULT_TABLE
    s_id = normalize(suspect.identifier)
    t_id = normalize(target.identifier)
    s_ns = normalize(suspect.namespace) if suspect.namespace else None
    t_ns = normalize(target.namespace) if target.namespace else None
    hierarchical = suspect.is_hierarchical or target.is_hierarchical

    if (
        suspect.domain is not None
        and target.domain is not None
        and suspect.domain.lower() != target.domain.lower()
        and s_id == t_id
        and s_ns == t_ns
    ):
        return AttackCategory.DOMAIN_CONFUSION

    if hierarchical and s_id == t_id and s_ns != t_ns:
        return AttackCategory.IMPERSONATION_SQUATTING

    if (
        s_ns is not None
        and t_ns is not None
        and s_ns != t_ns
        and s_id != t_id
        and _component_similar(s_ns, t_ns, author_similarity, namespace_cosine_min)
        and _component_similar(s_id, t_id, None, 1.0)
    ):
        return AttackCategory.COMPOUND_SQUATTING

    s_tokens = sorted(split_tokens(suspect.raw))
    t_tokens = sorted(split_tokens(target.raw))
    if suspect.is_hierarchical != target.is_hierarchical and s_tokens == t_tokens:
        return AttackCategory.SCOPE_CONFUSION

    if (
        s_tokens == t_tokens
        and len(s_tokens) >= 2
        and split_tokens(suspect.raw) != split_tokens(target.raw)
    ):
        return AttackCategory.SEQUENCE_REORDERING

    if lexical_distance == 1:
        return AttackCategory.ONE_STEP_LEVENSHTEIN

    if table.explains(suspect.normalized, target.normalized):
        return AttackCategory.ALTERNATE_SPELLING

    if lexical_distance > 2:
        return AttackCategory.SEMANTIC_SUBSTITUTION

    return AttackCategory.OTHER_LEXICAL
