"""Synthetic registries, attack generation, and the bundled name corpus.

The vocabulary is built from curated token sets that are pairwise far
apart in edit distance, so distinct generated names never collide by
accident. Synonym token families appear with heavily overlapping
context tokens, which is what lets a trained embedding model recognize
a synonym swap as the same package idea.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional

from .registry import AttackCategory, RegistryId, parse_name

# Interchangeable token pairs; both sides co-occur with shared contexts.
SYNONYM_FAMILIES = (
    ("fetch", "grab"),
    ("quick", "rapid"),
    ("image", "picture"),
    ("crypto", "cipher"),
    ("logger", "tracer"),
    ("config", "settings"),
    ("launch", "ignite"),
    ("bundle", "payload"),
    ("stream", "flowing"),
    ("search", "lookup"),
)

_SYNONYM_TOKENS = tuple(t for pair in SYNONYM_FAMILIES for t in pair)

SUBJECTS = _SYNONYM_TOKENS + (
    "color",
    "organize",
    "analyze",
    "gray",
    "monitor",
    "flavor",
    "json",
    "yaml",
    "socket",
    "vector",
    "matrix",
    "crawler",
    "token",
    "session",
    "cookie",
    "render",
    "canvas",
    "audio",
    "video",
    "pixel",
    "chart",
    "graphql",
    "binary",
    "buffer",
    "packet",
    "tunnel",
    "docker",
    "lambda",
    "mongo",
    "redis",
    "postgres",
    "sqlite",
    "kafka",
    "spark",
    "tensor",
    "neural",
    "random",
    "prime",
    "hashing",
    "signal",
    "retry",
    "backoff",
    "metrics",
    "tracing",
    "webhook",
    "markdown",
    "emoji",
    "unicode",
    "datetime",
    "timezone",
    "currency",
    "invoice",
    "payment",
    "geocode",
    "weather",
    "terrain",
)

CONTEXTS = (
    "utils",
    "core",
    "client",
    "server",
    "parser",
    "reader",
    "writer",
    "tools",
    "kit",
    "engine",
    "manager",
    "helper",
    "wrapper",
    "plugin",
    "loader",
    "cache",
    "auth",
    "model",
    "viewer",
    "agent",
    "worker",
    "runner",
    "builder",
    "watcher",
    "bridge",
    "adapter",
    "driver",
    "handler",
    "service",
    "studio",
)

ORGS = (
    "acmesoft",
    "bluepeak",
    "cloudforge",
    "datasmith",
    "eastwind",
    "fernlabs",
    "glowstack",
    "hilltop",
    "ironclad",
    "jadeworks",
    "kiteware",
    "lumenbyte",
    "meadowsoft",
    "nightowl",
    "oakridge",
    "pinecrest",
    "quartzio",
    "riverbend",
    "stonegate",
    "tidewater",
)

HF_VARIANTS = ("base", "large", "mini", "v2", "instruct")

ATTACK_DOMAINS = ("github.io", "gitlab.com", "bitbucket.org", "codeberg.org")

_EPOCH = datetime(2025, 6, 1, tzinfo=timezone.utc)

_CONTEXT_SUBSET_SIZE = 14
_PARTNER_HOLDOUT = 4


def contexts_for(subject: str) -> tuple[str, ...]:
    """The thematic context subset a subject's packages draw from.

    Synonym partners share their family head's subset, so the corpus
    teaches the model that the partners appear in the same surroundings;
    unrelated subjects see mostly different contexts and stay apart.
    """
    head = subject
    for a, b in SYNONYM_FAMILIES:
        if subject in (a, b):
            head = a
            break
    picker = random.Random(f"ctx:{head}")
    return tuple(picker.sample(CONTEXTS, _CONTEXT_SUBSET_SIZE))


def _held_out(subject: str, first_context: str) -> bool:
    """Combos reserved as landing space for synonym-swap attack names.

    The second member of each family never publishes under the first few
    contexts of the shared subset, so swapping it into a real package
    name yields a name that is guaranteed not to exist yet.
    """
    for a, b in SYNONYM_FAMILIES:
        if subject == b:
            return first_context in contexts_for(a)[:_PARTNER_HOLDOUT]
    return False


@dataclass(frozen=True)
class AttackSpec:
    registry: RegistryId
    name: str
    target: str
    category: AttackCategory


def _metadata_record(
    registry: RegistryId,
    name: str,
    description: str,
    downloads: Optional[int],
    ranking: Optional[float],
    maintainer: str,
    versions: int,
    readme: Optional[str],
    rng: random.Random,
) -> dict:
    published = []
    base = _EPOCH - timedelta(days=rng.randint(40, 900))
    for v in range(versions):
        ts = base + timedelta(days=v * rng.randint(5, 30))
        published.append({"version": f"{1 + v // 5}.{v % 5}.0", "published_at": ts.isoformat()})
    record = {
        "registry": registry.value,
        "name": name,
        "description": description,
        "readme": readme,
        "license": rng.choice(["MIT", "Apache-2.0", "BSD-3-Clause"]),
        "maintainers": [maintainer],
        "repository_url": f"https://example.com/{name.replace('@', '').replace(':', '/')}",
        "versions": published,
        "created_at": base.isoformat(),
    }
    if downloads is not None:
        record["weekly_downloads"] = downloads
    if ranking is not None:
        record["avg_ranking"] = ranking
    return record


def _describe(tokens: list[str]) -> str:
    head, rest = tokens[0], tokens[1:]
    tail = " ".join(rest) if rest else "general purpose"
    return f"A {tail} library for {head} workloads with batteries included"


def _readme_for(name: str, description: str) -> str:
    return (
        f"# {name}\n\n{description}.\n\n"
        "## Install\n\nUse your package manager of choice.\n\n"
        "## Usage\n\nImport the package and call the documented entry points.\n"
    )


def make_universe(
    seed: int,
    npm_count: int = 6000,
    golang_count: int = 2000,
    huggingface_count: int = 2000,
    trusted_fraction: float = 0.2,
) -> dict[RegistryId, list[dict]]:
    """Deterministic synthetic package universe keyed by registry.

    Roughly ``trusted_fraction`` of each registry clears its popularity
    threshold; everything else sits in the long tail.
    """
    rng = random.Random(seed)
    universe: dict[RegistryId, list[dict]] = {}

    def downloads_for(index: int, count: int, threshold: int) -> int:
        if index < count * trusted_fraction:
            return rng.randint(threshold, threshold * 400)
        return rng.randint(0, threshold - 1)

    # npm: flat subject-context names plus a scoped slice.
    names: list[tuple[str, list[str]]] = []
    seen = set()
    combos = []
    for s in SUBJECTS:
        subset = contexts_for(s)
        combos.extend((s, c, None) for c in subset if not _held_out(s, c))
        combos.extend(
            (s, c1, c2)
            for c1 in subset
            for c2 in subset
            if c1 != c2 and not _held_out(s, c1)
        )
    rng.shuffle(combos)
    scoped_budget = npm_count // 20
    for s, c1, c2 in combos:
        if len(names) >= npm_count - scoped_budget:
            break
        name = f"{s}-{c1}" if c2 is None else f"{s}-{c1}-{c2}"
        if name in seen:
            continue
        seen.add(name)
        names.append((name, name.split("-")))
    while len(names) < npm_count:
        org = rng.choice(ORGS)
        s, c1, _ = rng.choice(combos)
        name = f"@{org}/{s}-{c1}"
        if name in seen:
            continue
        seen.add(name)
        names.append((name, [org, s, c1]))
    rng.shuffle(names)
    records = []
    for i, (name, tokens) in enumerate(names):
        desc = _describe(tokens)
        records.append(
            _metadata_record(
                RegistryId.NPM,
                name,
                desc,
                downloads_for(i, npm_count, 5000),
                None,
                f"user{rng.randint(1, 4000)}@example.com",
                rng.randint(2, 9),
                _readme_for(name, desc),
                rng,
            )
        )
    universe[RegistryId.NPM] = records

    # golang: github.com/author/subject-context.
    records = []
    seen = set()
    authors = [f"{rng.choice(ORGS)}{rng.randint(1, 99)}" for _ in range(200)]
    while len(records) < golang_count:
        author = rng.choice(authors)
        s = rng.choice(SUBJECTS)
        c = rng.choice(contexts_for(s))
        name = f"github.com/{author}/{s}-{c}"
        if name in seen:
            continue
        seen.add(name)
        desc = _describe([s, c])
        ranking = (
            round(rng.uniform(0.5, 4.0), 2)
            if len(records) < golang_count * trusted_fraction
            else round(rng.uniform(4.5, 80.0), 2)
        )
        records.append(
            _metadata_record(
                RegistryId.GOLANG,
                name,
                desc,
                None,
                ranking,
                f"{author}@example.com",
                rng.randint(2, 9),
                _readme_for(name, desc),
                rng,
            )
        )
    universe[RegistryId.GOLANG] = records

    # huggingface: author/subject-context-variant.
    records = []
    seen = set()
    hf_authors = [f"{rng.choice(ORGS)}-ai{rng.randint(1, 60)}" for _ in range(150)]
    while len(records) < huggingface_count:
        author = rng.choice(hf_authors)
        s, c = rng.choice(SUBJECTS), rng.choice(HF_VARIANTS)
        name = f"{author}/{s}-{rng.choice(contexts_for(s))}-{c}"
        if name in seen:
            continue
        seen.add(name)
        desc = _describe([s, c])
        records.append(
            _metadata_record(
                RegistryId.HUGGINGFACE,
                name,
                desc,
                downloads_for(len(records), huggingface_count, 1000),
                None,
                f"{author}@example.com",
                rng.randint(1, 6),
                _readme_for(name, desc),
                rng,
            )
        )
    universe[RegistryId.HUGGINGFACE] = records
    return universe


def universe_names(universe: dict[RegistryId, list[dict]]) -> list[str]:
    return [record["name"] for records in universe.values() for record in records]


def trusted_names(
    universe: dict[RegistryId, list[dict]], registry: RegistryId
) -> list[str]:
    """Names clearing the registry threshold (mirrors the trust policy)."""
    result = []
    for record in universe[registry]:
        downloads = record.get("weekly_downloads")
        ranking = record.get("avg_ranking")
        if registry is RegistryId.GOLANG:
            if ranking is not None and ranking <= 4.0:
                result.append(record["name"])
        elif registry is RegistryId.HUGGINGFACE:
            if downloads is not None and downloads >= 1000:
                result.append(record["name"])
        elif downloads is not None and downloads >= 5000:
            result.append(record["name"])
    return result


# -- attack generation -------------------------------------------------------

_EDIT_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def one_edit(text: str, rng: random.Random) -> str:
    """One random character edit (insert, delete, substitute, transpose)."""
    while True:
        op = rng.choice(("insert", "delete", "substitute", "transpose"))
        i = rng.randrange(len(text))
        if op == "insert":
            result = text[:i] + rng.choice(_EDIT_ALPHABET) + text[i:]
        elif op == "delete" and len(text) > 2:
            result = text[:i] + text[i + 1 :]
        elif op == "substitute":
            result = text[:i] + rng.choice(_EDIT_ALPHABET) + text[i + 1 :]
        elif op == "transpose" and i + 1 < len(text) and text[i] != text[i + 1]:
            result = text[:i] + text[i + 1] + text[i] + text[i + 1 :]
        else:
            continue
        if result != text and result[0].isalnum():
            return result


_SPELLING_SWAPS = (
    ("or", "our"),
    ("ize", "ise"),
    ("yze", "yse"),
    ("gray", "grey"),
    ("qu", "kw"),
    ("ph", "f"),
    ("ck", "k"),
    ("o", "0"),
    ("l", "1"),
    ("e", "3"),
    ("s", "5"),
)


def generate_attack(
    registry: RegistryId,
    target: str,
    category: AttackCategory,
    rng: random.Random,
    taken: set[str],
) -> Optional[str]:
    """One attack name of the given category against ``target``.

    Returns None when the target is not eligible for the technique (the
    caller retries with another target).
    """
    ref = parse_name(registry, target)
    name: Optional[str] = None

    if category is AttackCategory.ONE_STEP_LEVENSHTEIN:
        # Flat names only: editing just the identifier of a hierarchical
        # name would leave the attack under the victim's own namespace,
        # which an attacker cannot publish to.
        if ref.namespace is not None:
            return None
        name = one_edit(target, rng)
    elif category is AttackCategory.SEQUENCE_REORDERING:
        if registry is not RegistryId.NPM or target.startswith("@"):
            return None
        tokens = target.split("-")
        if len(tokens) < 2:
            return None
        shuffled = tokens[:]
        rng.shuffle(shuffled)
        if shuffled == tokens:
            shuffled = tokens[::-1]
        name = "-".join(shuffled)
    elif category is AttackCategory.SCOPE_CONFUSION:
        if registry is not RegistryId.NPM:
            return None
        if target.startswith("@"):
            name = target[1:].replace("/", "-")
        else:
            tokens = target.split("-")
            if len(tokens) < 2:
                return None
            name = f"@{tokens[0]}/{'-'.join(tokens[1:])}"
    elif category is AttackCategory.SEMANTIC_SUBSTITUTION:
        if ref.namespace is not None:
            return None
        tokens = _split_terminal(ref)
        for a, b in SYNONYM_FAMILIES:
            for frm, to in ((a, b), (b, a)):
                if frm in tokens:
                    name = _rebuild(ref, [to if t == frm else t for t in tokens])
                    break
            if name:
                break
        if name is None:
            return None
    elif category is AttackCategory.ALTERNATE_SPELLING:
        if ref.namespace is not None:
            return None
        for frm, to in _SPELLING_SWAPS:
            if frm in ref.identifier:
                name = ref.identifier.replace(frm, to, 1)
                break
        if name is None:
            return None
    elif category is AttackCategory.IMPERSONATION_SQUATTING:
        if ref.namespace is None:
            return None
        squatted = one_edit(ref.namespace, rng)
        name = _with_namespace(ref, squatted, ref.identifier)
    elif category is AttackCategory.COMPOUND_SQUATTING:
        if ref.namespace is None:
            return None
        name = _with_namespace(ref, one_edit(ref.namespace, rng), one_edit(ref.identifier, rng))
    elif category is AttackCategory.DOMAIN_CONFUSION:
        if registry is not RegistryId.GOLANG:
            return None
        name = f"{rng.choice(ATTACK_DOMAINS)}/{ref.namespace}/{ref.identifier}"
    else:
        return None

    if name is None or name == target or name in taken:
        return None
    try:
        parse_name(registry, name)
    except Exception:
        return None
    return name


def _split_terminal(ref) -> list[str]:
    return ref.identifier.split("-")


def _rebuild(ref, tokens: list[str]) -> str:
    identifier = "-".join(tokens)
    if ref.namespace is None:
        return identifier
    return _with_namespace(ref, ref.namespace, identifier)


def _with_namespace(ref, namespace: str, identifier: str) -> str:
    registry = ref.registry
    if registry is RegistryId.GOLANG:
        return f"{ref.domain}/{namespace}/{identifier}"
    if registry is RegistryId.HUGGINGFACE:
        return f"{namespace}/{identifier}"
    if registry is RegistryId.NPM:
        return f"@{namespace}/{identifier}"
    if registry is RegistryId.MAVEN:
        return f"{namespace}:{identifier}"
    return f"{namespace}.{identifier}"


_CATEGORY_REGISTRIES = {
    AttackCategory.ONE_STEP_LEVENSHTEIN: (RegistryId.NPM,),
    AttackCategory.SEQUENCE_REORDERING: (RegistryId.NPM,),
    AttackCategory.SCOPE_CONFUSION: (RegistryId.NPM,),
    AttackCategory.SEMANTIC_SUBSTITUTION: (RegistryId.NPM,),
    AttackCategory.ALTERNATE_SPELLING: (RegistryId.NPM,),
    AttackCategory.IMPERSONATION_SQUATTING: (RegistryId.HUGGINGFACE, RegistryId.GOLANG),
    AttackCategory.COMPOUND_SQUATTING: (RegistryId.HUGGINGFACE, RegistryId.GOLANG),
    AttackCategory.DOMAIN_CONFUSION: (RegistryId.GOLANG,),
}


def generate_attacks(
    universe: dict[RegistryId, list[dict]],
    count: int,
    seed: int,
) -> list[AttackSpec]:
    """``count`` attacks cycling through every taxonomy technique."""
    rng = random.Random(seed)
    taken = set(universe_names(universe))
    trusted = {
        registry: trusted_names(universe, registry)
        for registry in (RegistryId.NPM, RegistryId.GOLANG, RegistryId.HUGGINGFACE)
    }
    categories = list(_CATEGORY_REGISTRIES)
    attacks: list[AttackSpec] = []
    attempts = 0
    while len(attacks) < count and attempts < count * 120:
        attempts += 1
        category = categories[len(attacks) % len(categories)]
        registry = rng.choice(_CATEGORY_REGISTRIES[category])
        pool = trusted[registry]
        if not pool:
            continue
        target = rng.choice(pool)
        name = generate_attack(registry, target, category, rng, taken)
        if name is None:
            continue
        taken.add(name)
        attacks.append(AttackSpec(registry, name, target, category))
    if len(attacks) < count:
        raise RuntimeError(f"could only generate {len(attacks)} of {count} attacks")
    return attacks


def attack_record(spec: AttackSpec, universe: dict[RegistryId, list[dict]], rng: random.Random) -> dict:
    """Store record for an attack package: fresh, sparse, copied blurb."""
    target_desc = ""
    for record in universe[spec.registry]:
        if record["name"] == spec.target:
            target_desc = record.get("description") or ""
            break
    published = (_EPOCH - timedelta(days=rng.randint(1, 10))).isoformat()
    record = {
        "registry": spec.registry.value,
        "name": spec.name,
        "description": target_desc,
        "readme": None,
        "license": None,
        "maintainers": [f"drop{rng.randint(1000, 9999)}@attacker.example"],
        "versions": [{"version": "0.0.1", "published_at": published}],
        "created_at": published,
    }
    if spec.registry is RegistryId.GOLANG:
        record["avg_ranking"] = round(rng.uniform(50.0, 99.0), 2)
    else:
        record["weekly_downloads"] = rng.randint(0, 300)
    return record


def write_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def corpus_names(seed: int = 20250601, count: int = 5000) -> list[str]:
    """The bundled training corpus: realistic multi-token names."""
    rng = random.Random(seed)
    names: list[str] = []
    seen: set[str] = set()
    combos = []
    for s in SUBJECTS:
        subset = contexts_for(s)
        combos.extend((s, c, None) for c in subset)
        combos.extend((s, c1, c2) for c1 in subset for c2 in subset if c1 != c2)
    rng.shuffle(combos)
    for s, c1, c2 in combos:
        name = f"{s}-{c1}" if c2 is None else f"{s}-{c1}-{c2}"
        if name not in seen:
            seen.add(name)
            names.append(name)
        if len(names) >= count * 0.9:
            break
    while len(names) < count:
        org = rng.choice(ORGS)
        s, c1, _ = rng.choice(combos)
        name = f"@{org}/{s}-{c1}"
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names[:count]
