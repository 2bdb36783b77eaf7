from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import pytest

from squatwatch.ann import build as build_ann
from squatwatch.embedder import TrainingParams, embed_text, train
from squatwatch.registry import RegistryId, normalize, parse_name
from squatwatch.search import SearchEngine, SearchThresholds, similarity_key
from squatwatch.store import MetadataStore
from squatwatch.trust import TrustPolicy, trusted_set

NOW = datetime(2025, 7, 1, tzinfo=timezone.utc)


def record(
    registry: str,
    name: str,
    downloads=None,
    ranking=None,
    description=None,
    readme=None,
    maintainers=("alice@example.com",),
    versions=3,
    days_ago=10,
    license="MIT",
    relocation_target=None,
    verified_prefix=False,
) -> dict:
    published = [
        {
            "version": f"1.{i}.0",
            "published_at": (NOW - timedelta(days=days_ago + 30 * (versions - 1 - i))).isoformat(),
        }
        for i in range(versions)
    ]
    data = {
        "registry": registry,
        "name": name,
        "description": description,
        "readme": readme,
        "license": license,
        "maintainers": list(maintainers),
        "versions": published,
        "created_at": published[0]["published_at"] if published else None,
    }
    if downloads is not None:
        data["weekly_downloads"] = downloads
    if ranking is not None:
        data["avg_ranking"] = ranking
    if relocation_target:
        data["relocation_target"] = relocation_target
    if verified_prefix:
        data["verified_prefix"] = True
    return data


def jsonl(records: list[dict]) -> list[str]:
    return [json.dumps(r) + "\n" for r in records]


@pytest.fixture()
def store(tmp_path) -> MetadataStore:
    return MetadataStore(tmp_path / "store.jsonl")


# A small but real trained model shared across the suite.
_TINY_CORPUS = [
    "bz2file", "requests", "lodash", "python-nmap", "colorama", "flask",
    "django-rest", "numpy-utils", "pandas-io", "crypto-kit", "cipher-kit",
    "http-client", "web-client", "json-parser", "yaml-parser", "socket-core",
    "vector-math", "redis-cache", "mongo-driver", "kafka-stream", "chart-view",
    "image-loader", "picture-loader", "token-auth", "session-auth", "render-core",
    "audio-mixer", "video-mixer", "pixel-draw", "graphql-server", "buffer-pool",
    "packet-sniff", "tunnel-proxy", "docker-cli", "lambda-run", "spark-job",
] * 4


@pytest.fixture(scope="session")
def tiny_model():
    return train(_TINY_CORPUS, TrainingParams(seed=5, epochs=3, dimension=32))


def make_engine(
    store: MetadataStore,
    model,
    registry: RegistryId,
    thresholds: SearchThresholds | None = None,
    policy: TrustPolicy | None = None,
) -> SearchEngine:
    """Engine with an ANN index freshly built over the trusted set."""
    policy = policy or TrustPolicy()
    refs = trusted_set(store, registry, policy)
    items = []
    for ref in refs:
        items.append((ref, "full", embed_text(model, similarity_key(ref))))
        if ref.namespace is not None:
            items.append((ref, "namespace", embed_text(model, normalize(ref.namespace))))
            items.append((ref, "identifier", embed_text(model, normalize(ref.identifier))))
    index = build_ann(items, seed=3) if items else None
    return SearchEngine(
        registry, store, model, index, thresholds=thresholds, trust_policy=policy
    )


@pytest.fixture()
def npm_fixture_store(store):
    """npm registry with a handful of trusted names and two suspects."""
    trusted = [
        record("npm", "bz2file", downloads=90000, description="bzip2 file interfaces"),
        record("npm", "lodash", downloads=2000000, description="utility toolbelt"),
        record("npm", "python-nmap", downloads=50000, description="nmap bindings"),
        record("npm", "colorama", downloads=70000, description="terminal colors"),
        record("npm", "requests", downloads=500000, description="http for humans"),
        record("npm", "@cicada/render", downloads=40000, description="render engine"),
        record("npm", "@scope/pkg", downloads=30000, description="scoped core"),
        record("npm", "@scope/pkg-utils", downloads=20000, description="scoped utils"),
    ]
    suspects = [
        record("npm", "bz2fiel", downloads=3, description="bzip2 file interfaces",
               maintainers=("mallory@evil.example",), versions=1, days_ago=2),
        record("npm", "unrelated-package-name", downloads=10,
               description="completely different thing entirely here"),
    ]
    store.ingest_snapshot(RegistryId.NPM, iter(jsonl(trusted + suspects)))
    return store


def parse(registry: str, name: str):
    return parse_name(RegistryId.parse(registry), name)
