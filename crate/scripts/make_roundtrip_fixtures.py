#!/usr/bin/env python3
"""Writes canonical extended-CoNLL files for byte-exact round-trip tests.

Canonical form: a `# id = ...` line per sentence, tab-separated
ID FORM UPOS CHUNK HEAD DEPREL NER rows, and a blank line after every
sentence. File 01 is the toy corpus; file 02 is empty; the rest are seeded
random corpora with unusual but valid content.

Usage: make_roundtrip_fixtures.py TOY_CONLL OUT_DIR
"""

import random
import shutil
import sys
from pathlib import Path

WORDS = [
    "the", "market", "rose", "Reuters", "said", "on", "Monday", ",", ".", "(", ")", "\"",
    "1996-08-22", "3.5", "%", "U.S.", "n't", "'s", "--", "&amp;", "#hashtag", "e-mail",
    "naïve", "Zürich", "São", "Paulo", "東京", "Москва", "😀", "x=y", "#", "==", "ID",
]
UPOS = ["NOUN", "VERB", "ADJ", "ADV", "PROPN", "DET", "ADP", "PUNCT", "NUM", "AUX", "X", "SYM"]
CHUNKS = ["B-NP", "I-NP", "B-VP", "I-VP", "B-PP", "O", "B-ADJP", "I-ADVP"]
DEPRELS = ["nsubj", "obj", "root", "det", "amod", "obl:tmod", "punct", "case", "compound:prt"]
TYPES = ["PER", "LOC", "ORG", "MISC", "DATE_1"]
IDS = ["s{n}", "doc{d}/p{n}", "news {n}", "id=={n}", "ü-{n}", "{n}"]


def sentence(rng, sid, length):
    lines = [f"# id = {sid}"]
    root = rng.randrange(length)
    for i in range(length):
        if i == root:
            head = 0
        else:
            head = rng.choice([h for h in range(length + 1) if h != i + 1])
        r = rng.random()
        ner = "O" if r < 0.6 else ("B-" if r < 0.85 else "I-") + rng.choice(TYPES)
        lines.append(
            "\t".join(
                [
                    str(i + 1),
                    rng.choice(WORDS),
                    rng.choice(UPOS),
                    rng.choice(CHUNKS),
                    str(head),
                    rng.choice(DEPRELS),
                    ner,
                ]
            )
        )
    return "\n".join(lines) + "\n\n"


def main():
    toy, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(toy, out / "rt01_toy.conll")
    (out / "rt02_empty.conll").write_text("")
    rng = random.Random(7)
    sizes = [1, 1, 2, 5, 10, 20, 30, 50, 75, 100, 150, 200, 300, 400, 400, 500, 600, 800]
    for n, size in enumerate(sizes, start=3):
        template = IDS[n % len(IDS)]
        parts = []
        for k in range(size):
            sid = template.format(n=k, d=k // 10)
            length = 1 if size == 1 and n == 3 else rng.randint(1, 60)
            parts.append(sentence(rng, sid, length))
        (out / f"rt{n:02d}_random.conll").write_text("".join(parts), encoding="utf-8")


if __name__ == "__main__":
    main()
