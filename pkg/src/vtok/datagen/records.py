"""Caption and QA record types plus their CSV/JSONL wire formats."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

SOURCES: tuple[str, ...] = ("webvid", "internvid", "hdvila", "other")
CATEGORIES: tuple[str, ...] = ("perception", "general", "temporal", "reasoning", "formatting")

# Fixed JSONL key order keeps output diffs byte-stable.
_QA_KEYS = ("video_id", "question", "answer", "category", "frame_timestamps_s", "provenance")


@dataclass(frozen=True)
class CaptionRecord:
    video_id: str
    caption: str
    duration_s: float
    source: str

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if not self.duration_s > 0:
            raise ValueError(f"duration must be positive, got {self.duration_s}")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}, got {self.source!r}")


@dataclass(frozen=True)
class QARecord:
    """One synthetic question-answer pair.

    Question and answer may be empty on freshly parsed candidates; the
    response filter guarantees both are non-empty on everything it keeps.
    """

    video_id: str
    question: str
    answer: str
    category: str
    frame_timestamps_s: tuple[float, ...]
    provenance: str

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.category not in CATEGORIES:
            raise ValueError(f"category must be one of {CATEGORIES}, got {self.category!r}")
        object.__setattr__(self, "frame_timestamps_s", tuple(float(t) for t in self.frame_timestamps_s))

    def to_json_line(self) -> str:
        payload = {
            "video_id": self.video_id,
            "question": self.question,
            "answer": self.answer,
            "category": self.category,
            "frame_timestamps_s": list(self.frame_timestamps_s),
            "provenance": self.provenance,
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "QARecord":
        obj = json.loads(line)
        missing = [k for k in _QA_KEYS if k not in obj]
        if missing:
            raise ValueError(f"QA record is missing keys {missing}")
        return cls(
            video_id=obj["video_id"],
            question=obj["question"],
            answer=obj["answer"],
            category=obj["category"],
            frame_timestamps_s=tuple(obj["frame_timestamps_s"]),
            provenance=obj["provenance"],
        )


def _caption_from_mapping(obj: dict, where: str) -> CaptionRecord:
    missing = [k for k in ("video_id", "caption", "duration_s", "source") if k not in obj or obj[k] in (None, "")]
    if missing:
        raise ValueError(f"{where}: missing fields {missing}")
    return CaptionRecord(
        video_id=str(obj["video_id"]),
        caption=str(obj["caption"]),
        duration_s=float(obj["duration_s"]),
        source=str(obj["source"]),
    )


def read_caption_records(path: str | Path) -> list[CaptionRecord]:
    """Load CaptionRecords from a .csv or .jsonl file, chosen by extension."""
    path = Path(path)
    records = []
    if path.suffix.lower() == ".csv":
        with path.open(newline="", encoding="utf-8") as fh:
            for i, row in enumerate(csv.DictReader(fh), start=2):
                records.append(_caption_from_mapping(row, f"{path}:{i}"))
    elif path.suffix.lower() == ".jsonl":
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                records.append(_caption_from_mapping(json.loads(line), f"{path}:{i}"))
    else:
        raise ValueError(f"unsupported caption file extension {path.suffix!r} (want .csv or .jsonl)")
    return records


def qa_records_jsonl(records: list[QARecord]) -> str:
    """Render records as JSONL text, one fixed-key-order object per line."""
    return "".join(r.to_json_line() + "\n" for r in records)
