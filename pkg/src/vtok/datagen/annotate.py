"""Category prompt templates and annotation request construction.

Requests carry the rendered prompt plus structured fields; the caption field
is present only for sources that ship trustworthy captions (webvid).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..budget import FrameSamplePlan
from .records import CATEGORIES, CaptionRecord

HDVILA_FRAME_LIMIT = 256


@dataclass(frozen=True)
class AnnotationRequest:
    video_id: str
    source: str
    template_id: str
    prompt: str
    caption: str | None
    frame_timestamps_s: tuple[float, ...]
    duration_s: float

    def to_json(self) -> dict:
        payload = {
            "video_id": self.video_id,
            "source": self.source,
            "template_id": self.template_id,
            "prompt": self.prompt,
            "frame_timestamps_s": list(self.frame_timestamps_s),
            "duration_s": self.duration_s,
        }
        if self.caption is not None:
            payload["caption"] = self.caption
        return payload

    def user_content(self) -> str:
        frames = ", ".join(f"{t:g}" for t in self.frame_timestamps_s)
        return f"{self.prompt}\nFrame timestamps (s): {frames}"


def _strip_comment_lines(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


@lru_cache(maxsize=None)
def _builtin_template(category: str) -> str:
    path = resources.files("vtok.datagen").joinpath(f"config/templates/{category}.txt")
    return _strip_comment_lines(path.read_text("utf-8"))


def load_template(category: str, templates_dir: str | Path | None = None) -> str:
    """Template text for a category, from a directory override or package data."""
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}, expected one of {CATEGORIES}")
    if templates_dir is not None:
        return _strip_comment_lines((Path(templates_dir) / f"{category}.txt").read_text("utf-8"))
    return _builtin_template(category)


def render_template(template: str, *, frames: int, duration_s: float, caption: str | None) -> str:
    caption_block = f"Original caption: {caption}" if caption else ""
    rendered = template.format(frames=frames, duration=f"{duration_s:g}", caption=caption_block)
    return re.sub(r"\n{3,}", "\n\n", rendered).strip()


def build_annotation_request(
    record: CaptionRecord,
    category: str,
    plan: FrameSamplePlan,
    templates_dir: str | Path | None = None,
) -> AnnotationRequest:
    """Fill the category template for one record and its sampling plan."""
    template = load_template(category, templates_dir)
    if record.source == "hdvila" and plan.frame_count > HDVILA_FRAME_LIMIT:
        raise ValueError(
            f"hdvila videos are sampled up to {HDVILA_FRAME_LIMIT} frames, plan has {plan.frame_count}"
        )
    caption = record.caption if record.source == "webvid" else None
    prompt = render_template(
        template, frames=plan.frame_count, duration_s=record.duration_s, caption=caption
    )
    return AnnotationRequest(
        video_id=record.video_id,
        source=record.source,
        template_id=category,
        prompt=prompt,
        caption=caption,
        frame_timestamps_s=plan.timestamps_s,
        duration_s=record.duration_s,
    )
