"""Shared synthetic caption corpus with planted faults.

Layout: 900 unique captions (300 of them sharing one hot chunk to skew the
chunk-frequency distribution) followed by 100 near-duplicate variants of the
first 100 captions, which normalize to the same dedup key.
"""

from vtok.datagen import CaptionRecord

HOT_CHUNK_RECORDS = 300
PLANTED_DUPLICATES = 100

_SUBJECTS = ("courier", "baker", "violinist", "gardener", "welder", "skater")
_PLACES = ("harbor", "market", "rooftop", "workshop", "orchard", "plaza")
_SOURCES = ("webvid", "internvid", "hdvila")


def planted_corpus() -> list[CaptionRecord]:
    records = []
    for i in range(900):
        if i < HOT_CHUNK_RECORDS:
            caption = f"golden retriever runs along the {_PLACES[i % 6]} fence line take {i:03d}"
        else:
            caption = (
                f"{_SUBJECTS[i % 6]} number {i:03d} crosses the {_PLACES[(i * 7) % 6]} "
                f"carrying a striped umbrella"
            )
        records.append(
            CaptionRecord(
                video_id=f"vid{i:04d}",
                caption=caption,
                duration_s=5.0 + (i % 40) * 3.5,
                source=_SOURCES[i % 3],
            )
        )
    for i in range(PLANTED_DUPLICATES):
        original = records[i]
        records.append(
            CaptionRecord(
                video_id=f"dup{i:04d}",
                caption=original.caption.upper() + ".",
                duration_s=original.duration_s,
                source=original.source,
            )
        )
    return records


def corpus_csv_text(records: list[CaptionRecord]) -> str:
    lines = ["video_id,caption,duration_s,source"]
    lines.extend(f'{r.video_id},"{r.caption}",{r.duration_s},{r.source}' for r in records)
    return "\n".join(lines) + "\n"
