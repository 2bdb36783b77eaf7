import pytest
from hypothesis import given, strategies as st

from squatwatch.errors import MalformedName, UnknownRegistry
from squatwatch.lexical import damerau_levenshtein
from squatwatch.registry import (
    AttackCategory,
    RegistryId,
    SubstitutionTable,
    classify_attack_category,
    normalize,
    parse_name,
    reconstruct,
)


class TestParseName:
    def test_maven_coordinates(self):
        ref = parse_name("maven", "com.fnproject.fn:runtime")
        assert ref.namespace == "com.fnproject.fn"
        assert ref.identifier == "runtime"
        assert ref.domain is None

    def test_npm_scoped(self):
        ref = parse_name("npm", "@cicada/render")
        assert ref.namespace == "cicada"
        assert ref.identifier == "render"
        assert ref.normalized == "cicadarender"

    def test_golang_three_segments(self):
        ref = parse_name("golang", "github.com/prometheus/prometheus")
        assert ref.domain == "github.com"
        assert ref.namespace == "prometheus"
        assert ref.identifier == "prometheus"

    def test_golang_subpath_folds_into_identifier(self):
        ref = parse_name("golang", "github.com/pkg/errors/v2")
        assert ref.identifier == "errors/v2"
        assert ref.raw == reconstruct(ref)

    def test_pypi_flat(self):
        ref = parse_name("pypi", "requests")
        assert ref.namespace is None and ref.domain is None
        assert ref.normalized == "requests"

    def test_nuget_prefix(self):
        ref = parse_name("nuget", "Newtonsoft.Json")
        assert ref.namespace == "Newtonsoft"
        assert ref.identifier == "Json"
        assert ref.normalized == "newtonsoftjson"

    def test_nuget_flat(self):
        assert parse_name("nuget", "serilog").namespace is None

    def test_unknown_registry(self):
        with pytest.raises(UnknownRegistry):
            parse_name("cargo", "serde")

    @pytest.mark.parametrize(
        "registry,name",
        [
            ("maven", "no-colon-here"),
            ("maven", "a:b:c"),
            ("golang", "github.com/onlyauthor"),
            ("huggingface", "no-slash"),
            ("huggingface", "a/b/c"),
            ("npm", "@scope-without-slash"),
            ("pypi", ""),
            ("pypi", "has space"),
            ("pypi", "weird!chars"),
        ],
    )
    def test_malformed(self, registry, name):
        with pytest.raises(MalformedName):
            parse_name(registry, name)

    def test_normalized_is_delimiter_free(self):
        ref = parse_name("golang", "github.com/go-git/go-git")
        assert not set(ref.normalized) & set("/:@-_.")
        assert ref.normalized == "githubcomgogitgogit"


_IDENT = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1, max_size=12)


class TestRoundTrip:
    @given(_IDENT)
    def test_flat_round_trip(self, name):
        for registry in ("pypi", "rubygems", "npm", "nuget"):
            ref = parse_name(registry, name)
            assert reconstruct(ref) == name

    @given(_IDENT, _IDENT)
    def test_maven_round_trip(self, group, artifact):
        raw = f"{group}:{artifact}"
        ref = parse_name("maven", raw)
        assert reconstruct(ref) == raw
        assert ref.raw == raw

    @given(_IDENT, _IDENT, _IDENT)
    def test_golang_round_trip(self, domain, author, repo):
        raw = f"{domain}/{author}/{repo}"
        assert reconstruct(parse_name("golang", raw)) == raw

    @given(_IDENT, _IDENT)
    def test_scoped_npm_round_trip(self, scope, name):
        raw = f"@{scope}/{name}"
        assert reconstruct(parse_name("npm", raw)) == raw

    @given(_IDENT)
    def test_normalize_case_stable(self, name):
        assert normalize(name.upper()) == normalize(name)


class TestClassification:
    def _classify(self, registry, suspect, target, **kwargs):
        s = parse_name(registry, suspect)
        t = parse_name(registry, target)
        distance = damerau_levenshtein(s.normalized, t.normalized)
        return classify_attack_category(s, t, distance, **kwargs)

    def test_domain_confusion(self):
        got = self._classify(
            "golang",
            "git.luolix.top/prometheus/prometheus",
            "github.com/prometheus/prometheus",
        )
        assert got is AttackCategory.DOMAIN_CONFUSION

    def test_impersonation(self):
        got = self._classify(
            "huggingface",
            "facebook-llama/Llama-2-7b-chat-hf",
            "meta-llama/Llama-2-7b-chat-hf",
        )
        assert got is AttackCategory.IMPERSONATION_SQUATTING

    def test_sequence_reordering(self):
        assert (
            self._classify("pypi", "nmap-python", "python-nmap")
            is AttackCategory.SEQUENCE_REORDERING
        )

    def test_one_step(self):
        assert self._classify("pypi", "crypt", "crypto") is AttackCategory.ONE_STEP_LEVENSHTEIN

    def test_compound(self):
        got = self._classify(
            "npm", "@typescript_eslinter/eslint", "@typescript-eslint/eslint-plugin"
        )
        assert got is AttackCategory.COMPOUND_SQUATTING

    def test_scope_confusion(self):
        assert (
            self._classify("npm", "cicada-render", "@cicada/render")
            is AttackCategory.SCOPE_CONFUSION
        )

    def test_alternate_spelling_distance_two(self):
        # rn -> m is two edits, so the one-step rule does not preempt it.
        assert self._classify("pypi", "modern", "modem") is AttackCategory.ALTERNATE_SPELLING

    def test_semantic_substitution(self):
        assert self._classify("pypi", "bzip", "bz2file") is AttackCategory.SEMANTIC_SUBSTITUTION

    def test_other_lexical(self):
        assert self._classify("pypi", "reqxxsts", "requests") is AttackCategory.OTHER_LEXICAL

    def test_deterministic_and_total(self):
        pairs = [
            ("pypi", "crypt", "crypto"),
            ("pypi", "bzip", "bz2file"),
            ("npm", "cicada-render", "@cicada/render"),
        ]
        for registry, a, b in pairs:
            first = self._classify(registry, a, b)
            second = self._classify(registry, a, b)
            assert first is second


class TestSubstitutionTable:
    def test_builtin_size(self):
        assert len(SubstitutionTable().pairs) >= 20

    def test_colour_color(self):
        table = SubstitutionTable()
        assert table.explains("colourama", "colorama")
        assert table.explains("colorama", "colourama")

    def test_no_false_hit(self):
        assert not SubstitutionTable().explains("requests", "lodash")

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "subs.txt"
        path.write_text("# comment\nfoo,bar\n\nbaz,qux\n", encoding="utf-8")
        table = SubstitutionTable.load(path)
        assert table.pairs == [("foo", "bar"), ("baz", "qux")]
        assert table.explains("afoox", "abarx")
