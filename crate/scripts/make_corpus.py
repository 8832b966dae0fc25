#!/usr/bin/env python3
"""Build data/lee_lines.txt from the Lee background corpus shipped in gensim's test data.

Usage: pip download --no-deps --only-binary :all: gensim -d /tmp
       python3 scripts/make_corpus.py /tmp/gensim-*.whl data/lee_lines.txt

Sentences are split on terminal punctuation. Sentences longer than 64 bytes are
wrapped at word boundaries, preferring pieces of 60-64 bytes, so the evaluation
filter (60-64 bytes) keeps a few thousand lines. Every piece is written, so the
n-gram prior also sees the short remainders when training.
"""
import re
import sys
import zipfile


def wrap(sentence, lo=60, hi=64):
    words = sentence.split(" ")
    out, cur = [], ""
    for w in words:
        cand = w if not cur else cur + " " + w
        if len(cand.encode()) <= hi:
            cur = cand
            continue
        if cur:
            out.append(cur)
        cur = w
    if cur:
        out.append(cur)
    return out


def main(wheel, dest):
    z = zipfile.ZipFile(wheel)
    text = z.read("gensim/test/test_data/lee_background.cor").decode("utf-8", "replace")
    text = " ".join(text.split())
    sentences = re.split(r"(?<=[.!?])\s+", text)
    lines = []
    for s in sentences:
        if len(s.encode()) <= 64:
            lines.append(s)
        else:
            lines.extend(wrap(s))
    with open(dest, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")
    n_eval = sum(1 for l in lines if 60 <= len(l.encode()) <= 64)
    print(f"{len(lines)} lines, {n_eval} in 60-64 bytes", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
