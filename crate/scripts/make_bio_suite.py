#!/usr/bin/env python3
"""Writes BIO decoding cases with expected spans from seqeval.

seqeval's default (non-strict) decoding follows conlleval: an I- tag that
does not continue an open entity of the same type starts a new entity.
Spans are written as [start, end_exclusive, type].

Usage: make_bio_suite.py OUT_FILE
"""

import json
import random
import sys

from seqeval.metrics.sequence_labeling import get_entities

HAND = [
    [],
    ["O"],
    ["O", "O", "O"],
    ["B-PER"],
    ["I-PER"],
    ["I-PER", "I-PER"],
    ["O", "I-LOC", "O"],
    ["B-PER", "I-PER", "I-PER"],
    ["B-PER", "B-PER"],
    ["B-PER", "I-LOC"],
    ["B-PER", "I-PER", "I-LOC", "I-LOC"],
    ["I-ORG", "B-ORG", "I-ORG"],
    ["B-MISC", "O", "I-MISC"],
    ["I-LOC", "I-PER", "I-LOC"],
    ["B-ORG", "I-ORG", "O", "B-ORG"],
    ["O", "B-LOC", "I-LOC", "I-ORG", "O"],
    ["B-PER", "I-PER", "B-PER", "I-PER"],
    ["I-MISC", "O", "I-MISC", "I-MISC"],
    ["B-LOC", "O", "O", "I-LOC", "B-LOC"],
    ["B-A_1", "I-A_1", "I-B2"],
    ["O", "O", "B-PER"],
    ["I-PER", "B-LOC", "I-LOC", "I-LOC", "O", "I-ORG"],
]

TYPES = ["PER", "LOC", "ORG", "MISC"]


def random_case(rng):
    n = rng.randint(1, 12)
    tags = []
    for _ in range(n):
        r = rng.random()
        if r < 0.35:
            tags.append("O")
        elif r < 0.65:
            tags.append("B-" + rng.choice(TYPES[:2]))
        else:
            tags.append("I-" + rng.choice(TYPES[:2]))
    return tags


def main():
    rng = random.Random(20240501)
    cases = list(HAND)
    while len(cases) < 50:
        tags = random_case(rng)
        if tags not in cases:
            cases.append(tags)
    out = []
    for tags in cases:
        spans = [[start, end + 1, etype] for etype, start, end in get_entities(tags)]
        out.append({"tags": tags, "spans": spans})
    with open(sys.argv[1], "w") as f:
        for case in out:
            f.write(json.dumps(case) + "\n")


if __name__ == "__main__":
    main()
