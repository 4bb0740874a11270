#!/usr/bin/env python3
"""Writes the 50-sentence toy corpus and the matching stub NER lexicon.

Ten hand-annotated sentence templates are each filled five times. Slot fillers
keep the part of speech of the slot, so the UPOS, chunk and dependency
annotation of a template holds for every fill. Every entity form carries a
single NER tag across the corpus, which lets the lexicon stub reproduce the
gold labels exactly.

Usage: make_toy_corpus.py OUT_DIR
"""

import sys
from pathlib import Path

# Rows: (form, upos, chunk, head, deprel, ner). Forms in braces are slots.
TEMPLATES = [
    (
        [
            ("{per}", "PROPN", "B-NP", 2, "nsubj", "B-PER"),
            ("makes", "VERB", "B-VP", 0, "root", "O"),
            ("good", "ADJ", "B-NP", 4, "amod", "O"),
            ("{noun}", "NOUN", "I-NP", 2, "obj", "O"),
            (".", "PUNCT", "O", 2, "punct", "O"),
        ],
        [
            dict(per="Wilson", noun="rackets"),
            dict(per="Smith", noun="shoes"),
            dict(per="Brown", noun="cars"),
            dict(per="Taylor", noun="boats"),
            dict(per="Clarke", noun="bikes"),
        ],
    ),
    (
        [
            ("The", "DET", "B-NP", 3, "det", "O"),
            ("United", "PROPN", "I-NP", 3, "compound", "B-ORG"),
            ("Nations", "PROPN", "I-NP", 4, "nsubj", "I-ORG"),
            ("opened", "VERB", "B-VP", 0, "root", "O"),
            ("a", "DET", "B-NP", 7, "det", "O"),
            ("new", "ADJ", "I-NP", 7, "amod", "O"),
            ("office", "NOUN", "I-NP", 4, "obj", "O"),
            ("in", "ADP", "B-PP", 9, "case", "O"),
            ("{loc}", "PROPN", "B-NP", 4, "obl", "B-LOC"),
            ("on", "ADP", "B-PP", 11, "case", "O"),
            ("{day}", "PROPN", "B-NP", 4, "obl", "O"),
            (".", "PUNCT", "O", 4, "punct", "O"),
        ],
        [
            dict(loc="Geneva", day="Monday"),
            dict(loc="Nairobi", day="Tuesday"),
            dict(loc="Vienna", day="Wednesday"),
            dict(loc="Bangkok", day="Thursday"),
            dict(loc="Lima", day="Friday"),
        ],
    ),
    (
        [
            ("{first}", "PROPN", "B-NP", 3, "nsubj", "B-PER"),
            ("{last}", "PROPN", "I-NP", 1, "flat", "I-PER"),
            ("criticized", "VERB", "B-VP", 0, "root", "O"),
            ("the", "DET", "B-NP", 6, "det", "O"),
            ("{nat}", "ADJ", "I-NP", 6, "amod", "B-MISC"),
            ("government", "NOUN", "I-NP", 3, "obj", "O"),
            ("strongly", "ADV", "B-ADVP", 3, "advmod", "O"),
            (".", "PUNCT", "O", 3, "punct", "O"),
        ],
        [
            dict(first="Maria", last="Lopez", nat="German"),
            dict(first="John", last="Carter", nat="French"),
            dict(first="Anna", last="Kowalski", nat="Polish"),
            dict(first="Peter", last="Jansen", nat="Dutch"),
            dict(first="Luis", last="Garcia", nat="Spanish"),
        ],
    ),
    (
        [
            ("Shares", "NOUN", "B-NP", 4, "nsubj", "O"),
            ("of", "ADP", "B-PP", 3, "case", "O"),
            ("{org}", "PROPN", "B-NP", 1, "nmod", "B-ORG"),
            ("fell", "VERB", "B-VP", 0, "root", "O"),
            ("{num}", "NUM", "B-NP", 6, "nummod", "O"),
            ("percent", "NOUN", "I-NP", 4, "obl", "O"),
            ("in", "ADP", "B-PP", 9, "case", "O"),
            ("early", "ADJ", "B-NP", 9, "amod", "O"),
            ("trading", "NOUN", "I-NP", 4, "obl", "O"),
            (".", "PUNCT", "O", 4, "punct", "O"),
        ],
        [
            dict(org="Siemens", num="3"),
            dict(org="Fiat", num="5"),
            dict(org="Reuters", num="2"),
            dict(org="Nestle", num="7"),
            dict(org="Volvo", num="4"),
        ],
    ),
    (
        [
            ("The", "DET", "B-NP", 4, "det", "O"),
            ("{l1}", "PROPN", "I-NP", 3, "compound", "B-LOC"),
            ("{l2}", "PROPN", "I-NP", 4, "compound", "I-LOC"),
            ("team", "NOUN", "I-NP", 5, "nsubj", "O"),
            ("won", "VERB", "B-VP", 0, "root", "O"),
            ("the", "DET", "B-NP", 8, "det", "O"),
            ("Olympic", "ADJ", "I-NP", 8, "amod", "B-MISC"),
            ("{noun}", "NOUN", "I-NP", 5, "obj", "O"),
            ("yesterday", "NOUN", "B-NP", 5, "obl:tmod", "O"),
            (".", "PUNCT", "O", 5, "punct", "O"),
        ],
        [
            dict(l1="New", l2="York", noun="title"),
            dict(l1="Los", l2="Angeles", noun="final"),
            dict(l1="San", l2="Diego", noun="match"),
            dict(l1="Hong", l2="Kong", noun="medal"),
            dict(l1="New", l2="Zealand", noun="race"),
        ],
    ),
    (
        [
            ("Officials", "NOUN", "B-NP", 4, "nsubj", "O"),
            ("in", "ADP", "B-PP", 3, "case", "O"),
            ("{loc}", "PROPN", "B-NP", 1, "nmod", "B-LOC"),
            ("said", "VERB", "B-VP", 0, "root", "O"),
            ("the", "DET", "B-NP", 7, "det", "O"),
            ("damaged", "ADJ", "I-NP", 7, "amod", "O"),
            ("{noun}", "NOUN", "I-NP", 9, "nsubj", "O"),
            ("would", "AUX", "B-VP", 9, "aux", "O"),
            ("reopen", "VERB", "I-VP", 4, "ccomp", "O"),
            ("soon", "ADV", "B-ADVP", 9, "advmod", "O"),
            (".", "PUNCT", "O", 4, "punct", "O"),
        ],
        [
            dict(loc="Paris", noun="bridge"),
            dict(loc="Madrid", noun="airport"),
            dict(loc="Cairo", noun="station"),
            dict(loc="Tokyo", noun="road"),
            dict(loc="Dublin", noun="harbour"),
        ],
    ),
    (
        [
            ("{per}", "PROPN", "B-NP", 2, "nsubj", "B-PER"),
            ("signed", "VERB", "B-VP", 0, "root", "O"),
            ("a", "DET", "B-NP", 5, "det", "O"),
            ("new", "ADJ", "I-NP", 5, "amod", "O"),
            ("contract", "NOUN", "I-NP", 2, "obj", "O"),
            ("with", "ADP", "B-PP", 7, "case", "O"),
            ("{org}", "PROPN", "B-NP", 2, "obl", "B-ORG"),
            ("last", "ADJ", "B-NP", 9, "amod", "O"),
            ("week", "NOUN", "I-NP", 2, "obl:tmod", "O"),
            (".", "PUNCT", "O", 2, "punct", "O"),
        ],
        [
            dict(per="Ronaldo", org="Barcelona"),
            dict(per="Beckham", org="Juventus"),
            dict(per="Henry", org="Arsenal"),
            dict(per="Figo", org="Chelsea"),
            dict(per="Kluivert", org="Ajax"),
        ],
    ),
    (
        [
            ("Heavy", "ADJ", "B-NP", 2, "amod", "O"),
            ("fighting", "NOUN", "I-NP", 3, "nsubj", "O"),
            ("erupted", "VERB", "B-VP", 0, "root", "O"),
            ("near", "ADP", "B-PP", 7, "case", "O"),
            ("the", "DET", "B-NP", 7, "det", "O"),
            ("{loc}", "PROPN", "I-NP", 7, "compound", "B-LOC"),
            ("border", "NOUN", "I-NP", 3, "obl", "O"),
            (",", "PUNCT", "O", 10, "punct", "O"),
            ("{org}", "PROPN", "B-NP", 10, "nsubj", "B-ORG"),
            ("reported", "VERB", "B-VP", 3, "parataxis", "O"),
            (".", "PUNCT", "O", 3, "punct", "O"),
        ],
        [
            dict(loc="Lebanon", org="Interfax"),
            dict(loc="Kosovo", org="AFP"),
            dict(loc="Chechnya", org="Itar-Tass"),
            dict(loc="Kashmir", org="Xinhua"),
            dict(loc="Somalia", org="Tanjug"),
        ],
    ),
    (
        [
            ("Prices", "NOUN", "B-NP", 2, "nsubj", "O"),
            ("rose", "VERB", "B-VP", 0, "root", "O"),
            ("sharply", "ADV", "B-ADVP", 2, "advmod", "O"),
            ("as", "SCONJ", "B-SBAR", 7, "mark", "O"),
            ("{noun}", "NOUN", "B-NP", 6, "compound", "O"),
            ("demand", "NOUN", "I-NP", 7, "nsubj", "O"),
            ("remained", "VERB", "B-VP", 2, "advcl", "O"),
            ("strong", "ADJ", "B-ADJP", 7, "xcomp", "O"),
            (".", "PUNCT", "O", 2, "punct", "O"),
        ],
        [
            dict(noun="oil"),
            dict(noun="grain"),
            dict(noun="steel"),
            dict(noun="coffee"),
            dict(noun="copper"),
        ],
    ),
    (
        [
            ("{p1}", "PROPN", "B-NP", 2, "nsubj", "B-PER"),
            ("beat", "VERB", "B-VP", 0, "root", "O"),
            ("{p2}", "PROPN", "B-NP", 2, "obj", "B-PER"),
            ("6-3", "NUM", "B-NP", 2, "obl", "O"),
            ("6-4", "NUM", "I-NP", 4, "conj", "O"),
            ("in", "ADP", "B-PP", 9, "case", "O"),
            ("the", "DET", "B-NP", 9, "det", "O"),
            ("second", "ADJ", "I-NP", 9, "amod", "O"),
            ("round", "NOUN", "I-NP", 2, "obl", "O"),
            (".", "PUNCT", "O", 2, "punct", "O"),
        ],
        [
            dict(p1="Sampras", p2="Agassi"),
            dict(p1="Graf", p2="Seles"),
            dict(p1="Becker", p2="Edberg"),
            dict(p1="Courier", p2="Chang"),
            dict(p1="Hingis", p2="Novotna"),
        ],
    ),
]


def build():
    sentences = []
    for rows, fills in TEMPLATES:
        for fill in fills:
            sentences.append([(r[0].format(**fill),) + r[1:] for r in rows])
    return sentences


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    sentences = build()
    assert len(sentences) == 50
    lexicon = {}
    lines = []
    for n, rows in enumerate(sentences, start=1):
        lines.append(f"# id = toy-{n:03d}")
        for i, (form, upos, chunk, head, deprel, ner) in enumerate(rows, start=1):
            assert head != i and 0 <= head <= len(rows)
            lines.append(f"{i}\t{form}\t{upos}\t{chunk}\t{head}\t{deprel}\t{ner}")
            if ner != "O":
                assert lexicon.setdefault(form, ner) == ner, form
        lines.append("")
    non_entity = {r[0] for rows in sentences for r in rows if r[5] == "O"}
    assert not non_entity & lexicon.keys(), non_entity & lexicon.keys()
    (out / "toy.conll").write_text("\n".join(lines) + "\n")
    with open(out / "lexicon.tsv", "w") as f:
        f.write("# form<TAB>tag for the lexicon stub; reproduces the toy gold labels\n")
        for form in sorted(lexicon):
            f.write(f"{form}\t{lexicon[form]}\n")


if __name__ == "__main__":
    main()
