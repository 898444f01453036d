#!/usr/bin/env python3
"""Builds the Hungarian desk corpus used by the acceptance suite.

No free Hungarian encyclopedia dump is bundled, so the corpus is assembled from
two openly licensed sources that ship inside PyPI wheels:

  * Hungarian gettext catalogues (msgstr strings) of several Python projects,
    grouped per catalogue into sentence-sized sequences;
  * the wordfreq Hungarian frequency list (CC BY-SA 4.0), sampled by frequency
    into synthetic sentences.

Usage:
  pip download --no-deps --dest wheels Django==5.2.18 wagtail Weblate==5.7.2 \
      plone.app.locales pretix postorius django-cms django-allauth hyperkitty \
      ckan sphinx kolibri wordfreq
  python3 build_desk_corpus.py --wheels wheels --out raw.txt

Output: one sequence per line, UTF-8, deterministic for a given seed and wheel set.
"""

import argparse
import gzip
import io
import pathlib
import random
import re
import zipfile

import msgpack
import polib

PLACEHOLDER = re.compile(
    r"%\([^)]*\)[-#0 +]*\d*(?:\.\d+)?[sdifrx]|%[-#0 +]*\d*(?:\.\d+)?[sdifrx%]|\{[^{}]*\}|<[^<>]*>|&[a-z]+;|\$\w+")
HU_WORD = re.compile(r"^[a-záéíóöőúüű]+$")


def catalogues(wheel_dir):
    for wheel in sorted(pathlib.Path(wheel_dir).glob("*.whl")):
        with zipfile.ZipFile(wheel) as zf:
            for name in sorted(zf.namelist()):
                if not name.endswith(".po"):
                    continue
                parts = name.split("/")
                if not any(p in ("hu", "hu_HU") for p in parts) and not name.endswith("/hu.po"):
                    continue
                text = zf.read(name).decode("utf-8", errors="replace")
                yield f"{wheel.name}:{name}", polib.pofile(text)


def clean_message(text):
    text = PLACEHOLDER.sub(" ", text)
    text = text.replace("_", " ").replace("\\n", " ")
    text = re.sub(r"[(\[]\s*[)\]]", " ", text)
    text = " ".join(text.split())
    return text.strip(" :")


def catalogue_sequences(wheel_dir, rng, seen):
    out = []
    for _, po in catalogues(wheel_dir):
        messages = []
        for entry in po:
            if entry.obsolete or "fuzzy" in entry.flags:
                continue
            texts = [entry.msgstr] + [v for _, v in sorted(entry.msgstr_plural.items())]
            for t in texts:
                t = clean_message(t)
                if len(t) < 3 or t in seen:
                    continue
                seen.add(t)
                messages.append(t)
        current = []
        target = rng.randint(60, 160)
        for m in messages:
            current.append(m if m[-1] in ".!?" else m + ".")
            if sum(len(c) + 1 for c in current) >= target:
                out.append(" ".join(current))
                current = []
                target = rng.randint(60, 160)
        if current:
            out.append(" ".join(current))
    return out


def wordfreq_words(wheel_dir):
    wheel = next(pathlib.Path(wheel_dir).glob("wordfreq-*.whl"))
    with zipfile.ZipFile(wheel) as zf:
        raw = gzip.GzipFile(fileobj=io.BytesIO(zf.read("wordfreq/data/small_hu.msgpack.gz"))).read()
    bins = msgpack.unpackb(raw, raw=False)[1:]
    words, weights = [], []
    for centibels, group in enumerate(bins):
        for w in group:
            if HU_WORD.match(w):
                words.append(w)
                weights.append(10.0 ** (-centibels / 100.0))
    return words, weights


def synthetic_sentences(words, weights, count, rng):
    out = []
    for _ in range(count):
        n = rng.randint(6, 20)
        picked = rng.choices(words, weights=weights, k=n)
        if rng.random() < 0.5:
            picked[rng.randrange(1, n - 1)] += ","
        sentence = " ".join(picked)
        out.append(sentence[0].upper() + sentence[1:] + rng.choice([".", ".", ".", "!", "?"]))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--wheels", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--lines", type=int, default=22000, help="total output lines")
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    seen = set()
    real = catalogue_sequences(args.wheels, rng, seen)
    words, weights = wordfreq_words(args.wheels)
    synth = synthetic_sentences(words, weights, max(0, args.lines - len(real)), rng)
    lines = real + synth
    rng.shuffle(lines)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")
    print(f"{len(real)} catalogue sequences, {len(synth)} synthetic sentences -> {args.out}")


if __name__ == "__main__":
    main()
