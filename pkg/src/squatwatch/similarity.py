"""Composite name-similarity score used to rank confusion candidates.

Five channels, each in [0, 1]:

    normalized_damerau_levenshtein   1 - DL(a,b) / max(|a|,|b|)
    ngram_jaccard                    bigram set Jaccard (0 if a side < 2 chars)
    phonetic                         mean of Soundex / Metaphone equality
    substring                        longest common substring / max length
    fuzzy_ratio                      2 * LCS(a,b) / (|a| + |b|)

The maximum over the channels is the ranking score.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyString
from .lexical import (
    damerau_levenshtein,
    longest_common_subsequence,
    longest_common_substring,
)
from .phonetics import metaphone, soundex


@dataclass(frozen=True)
class SimilarityBreakdown:
    normalized_damerau_levenshtein: float
    ngram_jaccard: float
    phonetic: float
    substring: float
    fuzzy_ratio: float

    @property
    def max_score(self) -> float:
        return max(
            self.normalized_damerau_levenshtein,
            self.ngram_jaccard,
            self.phonetic,
            self.substring,
            self.fuzzy_ratio,
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "normalized_damerau_levenshtein": self.normalized_damerau_levenshtein,
            "ngram_jaccard": self.ngram_jaccard,
            "phonetic": self.phonetic,
            "substring": self.substring,
            "fuzzy_ratio": self.fuzzy_ratio,
            "max_score": self.max_score,
        }


def _bigrams(s: str) -> set[str]:
    return {s[i : i + 2] for i in range(len(s) - 1)}


def typosim(a: str, b: str) -> SimilarityBreakdown:
    """Componentwise similarity of two normalized names.

    Raises:
        EmptyString: either input is empty.
    """
    if not a or not b:
        raise EmptyString("typosim requires non-empty strings")

    max_len = max(len(a), len(b))
    ndl = 1.0 - damerau_levenshtein(a, b) / max_len

    if len(a) < 2 or len(b) < 2:
        jac = 0.0
    else:
        ga, gb = _bigrams(a), _bigrams(b)
        jac = len(ga & gb) / len(ga | gb)

    phon = ((soundex(a) == soundex(b)) + (metaphone(a) == metaphone(b))) / 2.0

    sub = longest_common_substring(a, b) / max_len

    fuzzy = 2.0 * longest_common_subsequence(a, b) / (len(a) + len(b))

    return SimilarityBreakdown(ndl, jac, phon, sub, fuzzy)
