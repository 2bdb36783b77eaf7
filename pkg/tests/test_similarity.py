import pytest
from hypothesis import given, strategies as st

from squatwatch.errors import EmptyString
from squatwatch.phonetics import metaphone, soundex
from squatwatch.similarity import typosim

_WORD = st.text(alphabet="abcdefgh12", min_size=1, max_size=12)


class TestTyposim:
    def test_identity_all_ones(self):
        breakdown = typosim("lodash", "lodash")
        assert breakdown.normalized_damerau_levenshtein == 1.0
        assert breakdown.ngram_jaccard == 1.0
        assert breakdown.phonetic == 1.0
        assert breakdown.substring == 1.0
        assert breakdown.fuzzy_ratio == 1.0
        assert breakdown.max_score == 1.0

    def test_crypto_crypt_distance_channel(self):
        breakdown = typosim("crypto", "crypt")
        assert breakdown.normalized_damerau_levenshtein == pytest.approx(1 - 1 / 6)

    def test_transposition_counts_once(self):
        breakdown = typosim("lodash", "lodahs")
        assert breakdown.normalized_damerau_levenshtein == pytest.approx(1 - 1 / 6)

    def test_bigram_jaccard_hand_computed(self):
        # bigrams(abc) = {ab, bc}; bigrams(abd) = {ab, bd}; J = 1/3.
        assert typosim("abc", "abd").ngram_jaccard == pytest.approx(1 / 3)

    def test_short_string_jaccard_zero(self):
        assert typosim("a", "a").ngram_jaccard == 0.0

    def test_substring_ratio(self):
        # longest common substring of abcxyz / zzabcz is "abc" (3 of 6).
        assert typosim("abcxyz", "zzabcz").substring == pytest.approx(0.5)

    def test_fuzzy_ratio_lcs(self):
        # LCS(abcd, abd) = 3 -> 2*3/(4+3).
        assert typosim("abcd", "abd").fuzzy_ratio == pytest.approx(6 / 7)

    def test_phonetic_indicator_values(self):
        assert typosim("color", "colour").phonetic == 1.0
        assert typosim("xyz", "aeiou").phonetic in (0.0, 0.5, 1.0)

    def test_empty_string_rejected(self):
        with pytest.raises(EmptyString):
            typosim("", "abc")
        with pytest.raises(EmptyString):
            typosim("abc", "")

    @given(_WORD, _WORD)
    def test_componentwise_symmetry(self, a, b):
        assert typosim(a, b) == typosim(b, a)

    @given(_WORD, _WORD)
    def test_components_in_unit_interval(self, a, b):
        breakdown = typosim(a, b)
        for value in (
            breakdown.normalized_damerau_levenshtein,
            breakdown.ngram_jaccard,
            breakdown.phonetic,
            breakdown.substring,
            breakdown.fuzzy_ratio,
        ):
            assert 0.0 <= value <= 1.0
        assert breakdown.max_score == max(
            breakdown.normalized_damerau_levenshtein,
            breakdown.ngram_jaccard,
            breakdown.phonetic,
            breakdown.substring,
            breakdown.fuzzy_ratio,
        )


class TestSoundex:
    @pytest.mark.parametrize(
        "word,code",
        [
            ("Robert", "R163"),
            ("Rupert", "R163"),
            ("Ashcraft", "A261"),
            ("Tymczak", "T522"),
            ("Pfister", "P236"),
            ("Honeyman", "H555"),
        ],
    )
    def test_reference_codes(self, word, code):
        assert soundex(word) == code

    def test_digits_ignored(self):
        assert soundex("bz2file") == soundex("bzfile")

    def test_empty(self):
        assert soundex("") == ""
        assert soundex("123") == ""


class TestMetaphone:
    def test_equal_sounding(self):
        assert metaphone("color") == metaphone("colour")
        assert metaphone("gray") == metaphone("grey")

    def test_distinct_words(self):
        assert metaphone("lodash") != metaphone("requests")

    def test_known_transforms(self):
        assert metaphone("phone").startswith("F")
        assert metaphone("knight")[0] == "N"
        assert metaphone("xavier")[0] == "S"

    def test_deterministic(self):
        assert metaphone("thompson") == metaphone("thompson")
