import pytest
from hypothesis import given, strategies as st

from squatwatch.errors import NoSnapshot, SignalMissing
from squatwatch.registry import RegistryId
from squatwatch.store import PackageMetadata
from squatwatch.trust import (
    TrustPolicy,
    TrustSignal,
    is_more_trusted,
    is_trusted,
    trusted_set,
)

from .conftest import jsonl, parse, record

POLICY = TrustPolicy()


def meta(registry: str, name: str, downloads=None, ranking=None) -> PackageMetadata:
    return PackageMetadata(
        ref=parse(registry, name), weekly_downloads=downloads, avg_ranking=ranking
    )


class TestIsTrusted:
    def test_npm_boundary_inclusive(self):
        verdict = is_trusted(meta("npm", "pkg", downloads=5000), POLICY)
        assert verdict.trusted
        assert verdict.signal_used is TrustSignal.DOWNLOADS

    def test_npm_below(self):
        assert not is_trusted(meta("npm", "pkg", downloads=4999), POLICY).trusted

    def test_huggingface_threshold(self):
        assert not is_trusted(meta("huggingface", "a/b", downloads=999), POLICY).trusted
        assert is_trusted(meta("huggingface", "a/b", downloads=1000), POLICY).trusted

    def test_golang_ranking(self):
        assert is_trusted(meta("golang", "h/a/r", ranking=4.0), POLICY).trusted
        assert not is_trusted(meta("golang", "h/a/r", ranking=4.5), POLICY).trusted

    def test_maven_ranking(self):
        assert is_trusted(meta("maven", "g:a", ranking=10.0), POLICY).trusted
        assert not is_trusted(meta("maven", "g:a", ranking=10.5), POLICY).trusted

    def test_missing_signal_untrusted(self):
        verdict = is_trusted(meta("npm", "pkg"), POLICY)
        assert not verdict.trusted
        assert verdict.signal_used is TrustSignal.NONE

    @given(st.integers(min_value=0, max_value=10_000_000), st.integers(min_value=0, max_value=1000))
    def test_monotone_in_downloads(self, downloads, bump):
        low = is_trusted(meta("npm", "pkg", downloads=downloads), POLICY).trusted
        high = is_trusted(meta("npm", "pkg", downloads=downloads + bump), POLICY).trusted
        assert not (low and not high)


class TestIsMoreTrusted:
    def test_ten_times_downloads(self):
        assert is_more_trusted(
            meta("npm", "target", downloads=60000), meta("npm", "suspect", downloads=5000), POLICY
        )

    def test_just_below_dominance(self):
        assert not is_more_trusted(
            meta("npm", "target", downloads=49999), meta("npm", "suspect", downloads=5000), POLICY
        )

    def test_identical_not_more_trusted(self):
        a = meta("npm", "a", downloads=8000)
        b = meta("npm", "b", downloads=8000)
        assert not is_more_trusted(a, b, POLICY)

    def test_ranking_dominance(self):
        # score = 1/(1+r): target r=1 -> 0.5, suspect r=4 -> 0.2 (2.5x).
        assert is_more_trusted(
            meta("golang", "h/a/t", ranking=1.0), meta("golang", "h/a/s", ranking=4.0), POLICY
        )
        assert not is_more_trusted(
            meta("golang", "h/a/t", ranking=2.0), meta("golang", "h/a/s", ranking=3.0), POLICY
        )

    def test_antisymmetric_under_strict_dominance(self):
        a = meta("npm", "a", downloads=100000)
        b = meta("npm", "b", downloads=5000)
        assert is_more_trusted(a, b, POLICY)
        assert not is_more_trusted(b, a, POLICY)

    def test_signal_missing(self):
        with pytest.raises(SignalMissing):
            is_more_trusted(meta("npm", "a"), meta("npm", "b", downloads=10), POLICY)

    def test_cross_registry_rejected(self):
        with pytest.raises(ValueError):
            is_more_trusted(meta("npm", "a", downloads=1), meta("pypi", "b", downloads=1), POLICY)


class TestTrustedSet:
    def test_threshold_filter(self, store):
        rows = [
            record("pypi", "big1", downloads=6000),
            record("pypi", "tiny", downloads=100),
            record("pypi", "edge", downloads=5000),
        ]
        store.ingest_snapshot(RegistryId.PYPI, iter(jsonl(rows)))
        names = [r.raw for r in trusted_set(store, RegistryId.PYPI, POLICY)]
        assert names == ["big1", "edge"]  # descending downloads

    def test_empty_registry(self, store):
        with pytest.raises(NoSnapshot):
            trusted_set(store, RegistryId.PYPI, POLICY)

    def test_all_below_threshold(self, store):
        store.ingest_snapshot(
            RegistryId.PYPI, iter(jsonl([record("pypi", "low", downloads=3)]))
        )
        assert trusted_set(store, RegistryId.PYPI, POLICY) == []

    def test_equals_brute_force_filter(self, store):
        rows = [
            record("pypi", f"pkg{i:03d}", downloads=i * 37 % 9000) for i in range(200)
        ]
        store.ingest_snapshot(RegistryId.PYPI, iter(jsonl(rows)))
        got = {r.raw for r in trusted_set(store, RegistryId.PYPI, POLICY)}
        expected = {
            m.ref.raw
            for m in store.packages(RegistryId.PYPI)
            if is_trusted(m, POLICY).trusted
        }
        assert got == expected

    def test_denied_excluded(self, store):
        store.ingest_snapshot(
            RegistryId.PYPI, iter(jsonl([record("pypi", "popular", downloads=99999)]))
        )
        assert [r.raw for r in trusted_set(store, RegistryId.PYPI, POLICY)] == ["popular"]
        store.deny_trusted(parse("pypi", "popular"))
        assert trusted_set(store, RegistryId.PYPI, POLICY) == []

    def test_deterministic_order_ties_by_name(self, store):
        rows = [
            record("pypi", "zeta", downloads=7000),
            record("pypi", "alpha", downloads=7000),
        ]
        store.ingest_snapshot(RegistryId.PYPI, iter(jsonl(rows)))
        assert [r.raw for r in trusted_set(store, RegistryId.PYPI, POLICY)] == ["alpha", "zeta"]


class TestPolicyValidation:
    def test_rejects_nonpositive_thresholds(self):
        with pytest.raises(ValueError):
            TrustPolicy(download_threshold={RegistryId.NPM: 0})

    def test_rejects_dominance_not_above_one(self):
        with pytest.raises(ValueError):
            TrustPolicy(download_dominance=1.0)
