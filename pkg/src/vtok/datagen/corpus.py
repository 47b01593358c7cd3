"""Caption dedup, noun-chunk extraction, and frequency downsampling.

The chunker is a deterministic stop-word heuristic, not a parser: captions
split into word tokens, stop words and punctuation break runs, and each
maximal surviving run becomes one lowercase chunk. That keeps the whole
pipeline model-free and reproducible.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .records import CaptionRecord

_WORD = re.compile(r"[A-Za-z0-9']+")


@dataclass(frozen=True)
class ChunkStats:
    chunk: str
    frequency: int

    def __post_init__(self) -> None:
        if self.frequency < 1:
            raise ValueError(f"frequency must be >= 1, got {self.frequency}")


@lru_cache(maxsize=1)
def stop_words() -> frozenset[str]:
    text = resources.files("vtok.datagen").joinpath("config/stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def normalize_caption(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace; the dedup key."""
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text.lower())
    return " ".join(cleaned.split())


def dedup_captions(records: list[CaptionRecord]) -> list[CaptionRecord]:
    """Drop records whose normalized caption was already seen; first one wins."""
    seen: set[str] = set()
    kept = []
    for record in records:
        key = normalize_caption(record.caption)
        if key in seen:
            continue
        seen.add(key)
        kept.append(record)
    return kept


def extract_noun_chunks(caption: str) -> list[str]:
    """Maximal runs of consecutive non-stop words, lowercased.

    Runs break at stop words and wherever the gap between two words contains
    punctuation, so chunks never straddle a sentence boundary.
    """
    stops = stop_words()
    chunks: list[str] = []
    run: list[str] = []
    prev_end: int | None = None
    for match in _WORD.finditer(caption):
        word = match.group(0).lower()
        gap_breaks = prev_end is not None and caption[prev_end : match.start()].strip() != ""
        if gap_breaks and run:
            chunks.append(" ".join(run))
            run = []
        if word in stops:
            if run:
                chunks.append(" ".join(run))
                run = []
        else:
            run.append(word)
        prev_end = match.end()
    if run:
        chunks.append(" ".join(run))
    return chunks


def chunk_frequencies(records: list[CaptionRecord]) -> list[ChunkStats]:
    """Corpus chunk counts; each record counts a chunk at most once."""
    counts: Counter[str] = Counter()
    for record in records:
        counts.update(set(extract_noun_chunks(record.caption)))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [ChunkStats(chunk=c, frequency=f) for c, f in ranked]


def downsample_by_chunk_frequency(
    records: list[CaptionRecord], cap: int, seed: int
) -> list[CaptionRecord]:
    """Greedy pass in seeded-shuffled order, keeping a record only while every
    one of its chunks is still below ``cap`` among already-kept records.

    A chunk counts once per record, so the post-hoc per-chunk count over the
    kept set can never exceed the cap. Chunk-free records always survive.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    order = list(records)
    random.Random(seed).shuffle(order)
    counts: Counter[str] = Counter()
    kept = []
    for record in order:
        chunks = set(extract_noun_chunks(record.caption))
        if all(counts[c] < cap for c in chunks):
            kept.append(record)
            counts.update(chunks)
    return kept
