"""Response parsing and filtering for generated QA pairs.

Responses that fail JSON parsing, contain a refusal phrase, or carry empty
fields are dropped with a per-reason tally; survivors get their timestamp
markers normalized. Filtering is idempotent: re-filtering kept records
changes nothing.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from ..prompt import normalize_timestamps
from .records import QARecord

DROP_REASONS = ("parse", "refusal", "empty")


@lru_cache(maxsize=1)
def refusal_phrases() -> tuple[str, ...]:
    text = resources.files("vtok.datagen").joinpath("config/refusal_phrases.txt").read_text("utf-8")
    phrases = []
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            phrases.append(line)
    return tuple(phrases)


@dataclass
class FilterReport:
    kept: list[QARecord] = field(default_factory=list)
    drop_counts: dict[str, int] = field(default_factory=lambda: {r: 0 for r in DROP_REASONS})

    @property
    def dropped_total(self) -> int:
        return sum(self.drop_counts.values())


def parse_response(
    video_id: str,
    category: str,
    frame_timestamps_s: tuple[float, ...],
    raw_text: str,
    provenance: str,
) -> QARecord:
    """Candidate QARecord from a raw response; unparseable text yields empty
    question/answer fields and is culled later by the filter."""
    question = answer = ""
    parsed = _parse_qa(raw_text)
    if parsed is not None:
        question, answer = parsed
    return QARecord(
        video_id=video_id,
        question=question,
        answer=answer,
        category=category,
        frame_timestamps_s=frame_timestamps_s,
        provenance=provenance,
    )


def _parse_qa(raw_text: str) -> tuple[str, str] | None:
    try:
        obj = json.loads(raw_text)
    except (ValueError, TypeError):
        return None
    if not isinstance(obj, dict):
        return None
    question, answer = obj.get("question"), obj.get("answer")
    if not isinstance(question, str) or not isinstance(answer, str):
        return None
    return question, answer


def _is_refusal(text: str, phrases: tuple[str, ...]) -> bool:
    lowered = text.lower()
    return any(p in lowered for p in phrases)


def filter_responses(
    raw: list[tuple[QARecord, str]], phrases: tuple[str, ...] | None = None
) -> FilterReport:
    """Keep well-formed, non-refusal, non-empty pairs; normalize timestamps."""
    phrases = refusal_phrases() if phrases is None else phrases
    report = FilterReport()
    for record, raw_text in raw:
        parsed = _parse_qa(raw_text)
        if parsed is None:
            report.drop_counts["parse"] += 1
            continue
        question, answer = parsed
        if _is_refusal(question, phrases) or _is_refusal(answer, phrases):
            report.drop_counts["refusal"] += 1
            continue
        if not question.strip() or not answer.strip():
            report.drop_counts["empty"] += 1
            continue
        report.kept.append(
            dataclasses.replace(
                record,
                question=normalize_timestamps(question),
                answer=normalize_timestamps(answer),
            )
        )
    return report
