#!/usr/bin/env python3
"""Cuts a WordNet subset covering the content words of a CoNLL file.

For every NOUN/VERB/ADJ/ADV/AUX form (lowercased) that has an index entry,
the index line and every data line it references are copied verbatim, along
with the license header of each file. Data lines keep their original offsets,
which no longer match byte positions in the cut files.

Usage: extract_mini_wordnet.py WORDNET_DIR CONLL_FILE OUT_DIR
"""

import sys
from pathlib import Path

POS = {"NOUN": "noun", "VERB": "verb", "AUX": "verb", "ADJ": "adj", "ADV": "adv"}


def main():
    src, conll, out = Path(sys.argv[1]), Path(sys.argv[2]), Path(sys.argv[3])
    out.mkdir(parents=True, exist_ok=True)
    wanted = {suffix: set() for suffix in set(POS.values())}
    for line in conll.read_text().splitlines():
        cols = line.split("\t")
        if len(cols) == 7 and cols[2] in POS:
            wanted[POS[cols[2]]].add(cols[1].lower())
    for suffix, lemmas in sorted(wanted.items()):
        header, index_lines, offsets = [], [], set()
        for line in (src / f"index.{suffix}").read_text().splitlines(keepends=True):
            if line.startswith("  "):
                header.append(line)
                continue
            fields = line.split()
            if fields[0] in lemmas:
                index_lines.append(line)
                synset_cnt = int(fields[2])
                offsets.update(fields[-synset_cnt:])
        (out / f"index.{suffix}").write_text("".join(header + index_lines))
        data = []
        for line in (src / f"data.{suffix}").read_text().splitlines(keepends=True):
            if line.startswith("  ") or line.split(" ", 1)[0] in offsets:
                data.append(line)
        (out / f"data.{suffix}").write_text("".join(data))
        print(f"{suffix}: {len(index_lines)} lemmas, {len(offsets)} synsets")


if __name__ == "__main__":
    main()
