#!/usr/bin/env python3
"""Regenerates the bundled lexical data files under data/.

Requires the `emoji`, `english-words` and `scikit-learn` packages.
"""
import pathlib
import re

import emoji
from english_words import get_english_words_set
from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def alias_name(raw):
    name = raw.strip(":").lower()
    name = re.sub(r"[^a-z]+", "_", name).strip("_")
    return f":{name}:" if name else None


def emoji_table():
    rows = {}
    for seq, info in emoji.EMOJI_DATA.items():
        alias = alias_name(info["en"])
        if alias is None:
            continue
        key = " ".join(f"{ord(c):X}" for c in seq)
        rows[key] = alias
    lines = [f"{k}\t{v}" for k, v in sorted(rows.items())]
    (DATA / "emoji_aliases.tsv").write_text("\n".join(lines) + "\n")


def stopwords():
    words = sorted(ENGLISH_STOP_WORDS)
    (DATA / "stopwords.txt").write_text("\n".join(words) + "\n")


def english_words():
    words = sorted(w for w in get_english_words_set(["gcide"], lower=True, alpha=True)
                   if re.fullmatch(r"[a-z]+", w))
    (DATA / "english_words.txt").write_text("\n".join(words) + "\n")


if __name__ == "__main__":
    emoji_table()
    stopwords()
    english_words()
