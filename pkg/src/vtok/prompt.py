"""Model-input text layout for compressed videos, plus QA text normalization.

The video block interleaves whole-second timestamps with image slots,
"1s: <image>; 2s: <image>", and the instruction follows on its own line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .budget import FrameSamplePlan

SYSTEM_PROMPT = "You are a helpful visual assistant."
IMAGE_PLACEHOLDER = "<image>"
MULTICHOICE_SUFFIX = "Answer with only one letter"

_FRAME_MARKER = re.compile(r"<Frame (\d+)>")


@dataclass(frozen=True)
class TextSegment:
    text: str


@dataclass(frozen=True)
class ImageSlot:
    frame_index: int
    token_count: int


@dataclass(frozen=True)
class PromptLayout:
    """Ordered literal-text and image-slot segments with the instruction."""

    system_prompt: str
    segments: tuple[TextSegment | ImageSlot, ...]
    instruction: str

    @property
    def image_slots(self) -> list[ImageSlot]:
        return [s for s in self.segments if isinstance(s, ImageSlot)]

    @property
    def token_slot_total(self) -> int:
        return sum(s.token_count for s in self.image_slots)

    def video_text(self) -> str:
        """The timestamped video block with literal image placeholders."""
        return "".join(
            s.text if isinstance(s, TextSegment) else IMAGE_PLACEHOLDER for s in self.segments
        )

    def render_text(self) -> str:
        """Full model input; a single newline separates video from instruction."""
        video = self.video_text()
        return f"{video}\n{self.instruction}" if self.instruction else video

    def to_json(self) -> dict:
        segments = []
        for s in self.segments:
            if isinstance(s, TextSegment):
                segments.append({"type": "text", "text": s.text})
            else:
                segments.append({"type": "image", "frame_index": s.frame_index, "token_count": s.token_count})
        return {
            "system_prompt": self.system_prompt,
            "segments": segments,
            "instruction": self.instruction,
        }


def serialize_video_prompt(
    plan: FrameSamplePlan,
    tokens_per_frame: int,
    instruction: str,
    n_max: int | None = None,
) -> PromptLayout:
    """Lay out one image slot per sampled frame, in timestamp order.

    Timestamps render floored to whole seconds. When ``n_max`` is given, the
    total token-slot sum is checked against it.
    """
    if plan.frame_count < 1:
        raise ValueError("cannot serialize an empty sampling plan")
    if tokens_per_frame < 1:
        raise ValueError(f"tokens_per_frame must be positive, got {tokens_per_frame}")
    if n_max is not None and plan.frame_count * tokens_per_frame > n_max:
        raise ValueError(
            f"{plan.frame_count} frames x {tokens_per_frame} tokens exceeds budget {n_max}"
        )
    segments: list[TextSegment | ImageSlot] = []
    for i, t in enumerate(plan.timestamps_s):
        prefix = "" if i == 0 else "; "
        segments.append(TextSegment(f"{prefix}{math.floor(t)}s: "))
        segments.append(ImageSlot(frame_index=i, token_count=tokens_per_frame))
    return PromptLayout(system_prompt=SYSTEM_PROMPT, segments=tuple(segments), instruction=instruction)


def normalize_timestamps(text: str) -> str:
    """Rewrite every "<Frame N>" marker to "frame of Ns"; idempotent."""
    return _FRAME_MARKER.sub(lambda m: f"frame of {m.group(1)}s", text)


def format_multichoice(question: str) -> str:
    """Append the fixed answer-format directive for multiple-choice QA."""
    return f"{question}{MULTICHOICE_SUFFIX}"


def count_image_slots(text: str) -> int:
    """Number of image placeholders a rendered prompt contains."""
    return text.count(IMAGE_PLACEHOLDER)
