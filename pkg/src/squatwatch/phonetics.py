"""Soundex and Metaphone codes for the phonetic similarity channel.

Both functions operate on ASCII letters; digits and other characters are
dropped before encoding, so package names like "bz2file" encode their
letter skeleton. Empty input encodes to the empty string.
"""

from __future__ import annotations

_SOUNDEX_MAP = {
    "B": "1", "F": "1", "P": "1", "V": "1",
    "C": "2", "G": "2", "J": "2", "K": "2", "Q": "2", "S": "2", "X": "2", "Z": "2",
    "D": "3", "T": "3",
    "L": "4",
    "M": "5", "N": "5",
    "R": "6",
}

_VOWELS = set("AEIOU")


def _letters(text: str) -> str:
    return "".join(c for c in text.upper() if "A" <= c <= "Z")


def soundex(text: str) -> str:
    """American Soundex: first letter plus three digit codes, zero padded."""
    word = _letters(text)
    if not word:
        return ""
    code = word[0]
    last_digit = _SOUNDEX_MAP.get(word[0], "")
    for c in word[1:]:
        digit = _SOUNDEX_MAP.get(c, "")
        if digit:
            if digit != last_digit:
                code += digit
            last_digit = digit
        elif c not in "HW":
            # Vowels reset the duplicate check; H and W do not.
            last_digit = ""
    return (code + "000")[:4]


def metaphone(text: str, max_length: int = 8) -> str:
    """Classic Metaphone code (Philips' original rules, single code)."""
    word = _letters(text)
    if not word:
        return ""

    # Initial-letter exceptions.
    if word[:2] in ("AE", "GN", "KN", "PN", "WR"):
        word = word[1:]
    elif word[:1] == "X":
        word = "S" + word[1:]
    elif word[:2] == "WH":
        word = "W" + word[2:]

    n = len(word)
    out: list[str] = []

    def nxt(i: int, count: int = 1) -> str:
        return word[i + 1 : i + 1 + count]

    i = 0
    while i < n and len(out) < max_length:
        c = word[i]
        # Collapse doubled letters except C.
        if c != "C" and i > 0 and word[i - 1] == c:
            i += 1
            continue

        if c in _VOWELS:
            if i == 0:
                out.append(c)
        elif c == "B":
            if not (i == n - 1 and i > 0 and word[i - 1] == "M"):
                out.append("B")
        elif c == "C":
            if nxt(i, 2) == "IA" or nxt(i) == "H":
                out.append("X")
            elif nxt(i) in ("I", "E", "Y"):
                if not (i > 0 and word[i - 1] == "S"):
                    out.append("S")
            else:
                out.append("K")
        elif c == "D":
            if nxt(i) == "G" and nxt(i + 1) in ("E", "I", "Y"):
                out.append("J")
                i += 1
            else:
                out.append("T")
        elif c == "G":
            if nxt(i) == "H":
                if i + 2 < n and word[i + 2] in _VOWELS:
                    out.append("K")
                # Otherwise silent (e.g. "night").
                i += 1
            elif nxt(i) == "N":
                pass  # silent in "gnome"-like endings
            elif nxt(i) in ("I", "E", "Y"):
                out.append("J")
            else:
                out.append("K")
        elif c == "H":
            if i > 0 and word[i - 1] in _VOWELS and nxt(i) not in _VOWELS and nxt(i):
                pass  # silent between vowel and consonant
            elif i > 0 and word[i - 1] in "CSPTG":
                pass
            else:
                out.append("H")
        elif c in ("F", "J", "L", "M", "N", "R"):
            out.append(c)
        elif c == "K":
            if not (i > 0 and word[i - 1] == "C"):
                out.append("K")
        elif c == "P":
            if nxt(i) == "H":
                out.append("F")
                i += 1
            else:
                out.append("P")
        elif c == "Q":
            out.append("K")
        elif c == "S":
            if nxt(i) == "H":
                out.append("X")
                i += 1
            elif nxt(i, 2) in ("IO", "IA"):
                out.append("X")
            else:
                out.append("S")
        elif c == "T":
            if nxt(i) == "H":
                out.append("0")
                i += 1
            elif nxt(i, 2) in ("IO", "IA"):
                out.append("X")
            else:
                out.append("T")
        elif c == "V":
            out.append("F")
        elif c == "W":
            if nxt(i) in _VOWELS:
                out.append("W")
        elif c == "X":
            out.append("K")
            out.append("S")
        elif c == "Y":
            if nxt(i) in _VOWELS:
                out.append("Y")
        elif c == "Z":
            out.append("S")
        i += 1

    return "".join(out[:max_length])
