import pytest
from hypothesis import given, strategies as st

from squatwatch.lexical import (
    LengthBucketedScanner,
    damerau_levenshtein,
    damerau_levenshtein_within,
    longest_common_subsequence,
    longest_common_substring,
)

from .oracles import brute_force_within, dl_distance_oracle, lcs_oracle

_WORD = st.text(alphabet="abcdef-", min_size=0, max_size=14)


class TestDamerauLevenshtein:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("crypto", "crypt", 1),
            ("lodash", "lodahs", 1),  # transposition is one edit
            ("kitten", "sitting", 3),
            ("", "", 0),
            ("", "abc", 3),
            ("abc", "", 3),
            ("same", "same", 0),
            ("ab", "ba", 1),
            ("abcd", "badc", 2),
        ],
    )
    def test_known_distances(self, a, b, expected):
        assert damerau_levenshtein(a, b) == expected

    @given(_WORD, _WORD)
    def test_matches_oracle(self, a, b):
        assert damerau_levenshtein(a, b) == dl_distance_oracle(a, b)

    @given(_WORD, _WORD)
    def test_symmetry(self, a, b):
        assert damerau_levenshtein(a, b) == damerau_levenshtein(b, a)


class TestBandedVariant:
    @given(_WORD, _WORD, st.integers(min_value=1, max_value=4))
    def test_agrees_with_full_dp(self, a, b, k):
        truth = dl_distance_oracle(a, b)
        got = damerau_levenshtein_within(a, b, k)
        if truth <= k:
            assert got == truth
        else:
            assert got is None

    def test_early_exit_far_strings(self):
        assert damerau_levenshtein_within("aaaaaaaaaa", "bbbbbbbbbb", 2) is None

    def test_length_prefilter(self):
        assert damerau_levenshtein_within("ab", "abcdefg", 2) is None


class TestScanner:
    def test_matches_brute_force(self):
        names = ["bz2file", "requests", "request", "lodash", "lodahs", "numpy"]
        scanner = LengthBucketedScanner(names)
        for query in ["bz2fiel", "requests", "lodash", "zzz"]:
            got = {name for name, _ in scanner.within(query, 2)}
            assert got == brute_force_within(query, names, 2)

    def test_reports_distances(self):
        scanner = LengthBucketedScanner(["bz2file"])
        assert scanner.within("bz2fiel", 2) == [("bz2file", 1)]


class TestCommonSubstrings:
    @pytest.mark.parametrize(
        "a,b,expected",
        [("lodash", "lodash", 6), ("abcxyz", "xyzabc", 3), ("abc", "def", 0), ("", "abc", 0)],
    )
    def test_substring(self, a, b, expected):
        assert longest_common_substring(a, b) == expected

    @given(_WORD, _WORD)
    def test_subsequence_matches_oracle(self, a, b):
        assert longest_common_subsequence(a, b) == lcs_oracle(a, b)
