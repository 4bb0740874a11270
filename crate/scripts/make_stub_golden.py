#!/usr/bin/env python3
"""Computes expected stub-backend outputs from the documented rules.

mask_fill: the key is the unmasked context tokens joined by single spaces,
then byte 0x1F, then the mask index in decimal. With h = FNV-1a 64 of the
key and V the vocabulary, candidate r is V[(h + r) mod |V|] with score
1 / (r + 1).

embed: each whitespace-separated word adds 1 to dimension
FNV-1a 64(word) mod embed_dim.

Usage: make_stub_golden.py OUT_FILE
"""

import json
import sys

VOCAB = (
    "thing place time way day world life part week work case point group problem fact "
    "home game city story result good new great little old big small large early young "
    "public strong quick make take find give show keep often never soon"
).split()


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def mask_fill(tokens, mask_index, top_k):
    context = [t for i, t in enumerate(tokens) if i != mask_index]
    key = " ".join(context).encode() + b"\x1f" + str(mask_index).encode()
    h = fnv1a64(key) % len(VOCAB)
    return [
        {"token": VOCAB[(h + r) % len(VOCAB)], "score": 1.0 / (r + 1)}
        for r in range(min(top_k, len(VOCAB)))
    ]


SENTENCES = [
    ["Wilson", "makes", "good", "rackets", "."],
    ["The", "United", "Nations", "opened", "a", "new", "office", "in", "Geneva", "on", "Monday", "."],
    ["Prices", "rose", "sharply", "as", "oil", "demand", "remained", "strong", "."],
    ["Sampras", "beat", "Agassi", "6-3", "6-4", "in", "the", "second", "round", "."],
    ["solo"],
    ["naïve", "café", "über"],
]


def main():
    cases = []
    for tokens in SENTENCES:
        for mask_index in range(len(tokens)):
            for top_k in (1, 5, 50):
                cases.append(
                    {
                        "tokens": tokens,
                        "mask_index": mask_index,
                        "top_k": top_k,
                        "candidates": mask_fill(tokens, mask_index, top_k),
                    }
                )
    words = sorted({t for s in SENTENCES for t in s})
    buckets = {w: fnv1a64(w.encode()) % 4096 for w in words}
    with open(sys.argv[1], "w") as f:
        json.dump({"vocab": VOCAB, "mask_fill": cases, "embed_dim": 4096, "embed_buckets": buckets}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
