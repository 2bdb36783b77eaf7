"""Seed a workspace with metadata and open alerts for the UI e2e test.

Usage: python3 seed.py <workspace-dir>
"""

import json
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from squatwatch.alerts import AlertStore
from squatwatch.benignity import BenignityFilter
from squatwatch.config import Config
from squatwatch.lexical import damerau_levenshtein
from squatwatch.registry import RegistryId, classify_attack_category, parse_name
from squatwatch.search import AlertDraft, CandidatePair, similarity_key
from squatwatch.similarity import typosim
from squatwatch.store import MetadataStore

NOW = datetime.now(timezone.utc)


def record(registry, name, downloads, description, maintainers, versions=3, readme=None):
    published = [
        {
            "version": f"1.{i}.0",
            "published_at": (NOW - timedelta(days=200 - i * 30)).isoformat(),
        }
        for i in range(versions)
    ]
    return {
        "registry": registry,
        "name": name,
        "description": description,
        "readme": readme,
        "license": "MIT",
        "maintainers": maintainers,
        "versions": published,
        "weekly_downloads": downloads,
        "created_at": published[0]["published_at"],
    }


PAIRS = [
    # (registry, suspect, target, shared description)
    ("npm", "bz2fiel", "bz2file", "bzip2 file reading and writing streams for node"),
    ("npm", "@acme-corp/render-kit", "@acme/render-kit", "declarative render kit with reactive bindings"),
    ("npm", "lodahs", "lodash", "modular utility toolbelt for arrays objects and strings"),
]


def main(workspace: Path) -> None:
    config = Config(workspace=workspace)
    workspace.mkdir(parents=True, exist_ok=True)
    store = MetadataStore(config.store_path)
    lines = []
    for registry, suspect, target, description in PAIRS:
        lines.append(json.dumps(record(
            registry, target, 500_000, description,
            [f"{target.split('/')[-1]}-team@good.example"],
            readme="well documented package with usage examples " * 3,
        )))
        lines.append(json.dumps(record(
            registry, suspect, 25, description,
            ["drop1234@attacker.example"], versions=1,
        )))
    store.ingest_snapshot(RegistryId.NPM, iter(line + "\n" for line in lines))

    alerts = AlertStore(config.alerts_path)
    benignity = BenignityFilter(store)
    for registry, suspect, target, _ in PAIRS:
        s = parse_name(registry, suspect)
        t = parse_name(registry, target)
        distance = damerau_levenshtein(similarity_key(s), similarity_key(t))
        pair = CandidatePair(
            suspect=s,
            target=t,
            lexical_distance=distance,
            cosine_full=0.97,
            composite=typosim(similarity_key(s), similarity_key(t)),
            category=classify_attack_category(s, t, distance),
            channel="lexical",
        )
        report = benignity.filter_pair(pair, now=NOW)
        assert report.verdict == "suspected_threat", (suspect, report.explanation)
        created = alerts.create(AlertDraft(suspect=s, pairs=(pair,)), report, "seed")
        assert created is not None
    print(json.dumps({"seeded": len(PAIRS), "workspace": str(workspace)}))


if __name__ == "__main__":
    main(Path(sys.argv[1]))
