"""Visual-context budget arithmetic and frame-sampling plans.

The budget N_max caps the total visual tokens one video may occupy, so frame
count and tokens-per-frame trade off against each other. Training draws the
per-frame count from [16, min(N_max/T, 576)]; inference fixes it to the same
upper expression, floored at 16. A full 24x24 encoder grid is 576 tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .compressors import PoolShape

TOKENS_PER_FRAME_MIN = 16
TOKENS_PER_FRAME_MAX = 576
POOL_SIDE_MIN = 4
POOL_SIDE_FULL = 24

# Default cost-table pairs: three budgets crossed with five per-frame
# counts, where the 8000 block uses 140 in place of 144.
TABLE_PAIRS: tuple[tuple[int, int], ...] = (
    (36, 12000),
    (64, 12000),
    (100, 12000),
    (144, 12000),
    (256, 12000),
    (36, 8000),
    (64, 8000),
    (100, 8000),
    (140, 8000),
    (256, 8000),
    (36, 4000),
    (64, 4000),
    (100, 4000),
    (144, 4000),
    (256, 4000),
)

CSV_HEADER = "tokens_per_frame,n_max,max_frames"


@dataclass(frozen=True)
class CostRow:
    tokens_per_frame: int
    n_max: int
    max_frames: int


@dataclass(frozen=True)
class BudgetPlan:
    """A resolved allocation of the visual-token budget."""

    n_max: int
    frame_count: int
    tokens_per_frame: int
    realized_shape: PoolShape | None = None

    def __post_init__(self) -> None:
        if self.n_max < 1 or self.frame_count < 1:
            raise ValueError(f"n_max and frame_count must be positive, got {self.n_max}, {self.frame_count}")
        if not (TOKENS_PER_FRAME_MIN <= self.tokens_per_frame <= TOKENS_PER_FRAME_MAX):
            raise ValueError(
                f"tokens_per_frame must be in [{TOKENS_PER_FRAME_MIN}, {TOKENS_PER_FRAME_MAX}], "
                f"got {self.tokens_per_frame}"
            )
        if self.frame_count * self.tokens_per_frame > self.n_max:
            raise ValueError(
                f"{self.frame_count} frames x {self.tokens_per_frame} tokens exceeds budget {self.n_max}"
            )


@dataclass(frozen=True)
class FrameSamplePlan:
    """Sample timestamps for a video of known duration under a frame cap."""

    duration_s: float
    max_frames: int
    timestamps_s: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ValueError(f"duration must be positive, got {self.duration_s}")
        if self.max_frames < 1:
            raise ValueError(f"max_frames must be >= 1, got {self.max_frames}")
        ts = tuple(float(t) for t in self.timestamps_s)
        if not ts:
            raise ValueError("a sampling plan needs at least one timestamp")
        if len(ts) > self.max_frames:
            raise ValueError(f"{len(ts)} timestamps exceed max_frames={self.max_frames}")
        if any(t < 0 or t > self.duration_s for t in ts):
            raise ValueError("timestamps must lie within [0, duration]")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps_s", ts)

    @property
    def frame_count(self) -> int:
        return len(self.timestamps_s)


def training_token_interval(n_max: int, frame_count: int) -> tuple[int, int]:
    """Interval [16, min(floor(n_max/frame_count), 576)] for training-time draws."""
    if n_max < 1 or frame_count < 1:
        raise ValueError(f"n_max and frame_count must be positive, got {n_max}, {frame_count}")
    if TOKENS_PER_FRAME_MIN * frame_count > n_max:
        raise ValueError(
            f"budget {n_max} cannot give {frame_count} frames the minimum "
            f"{TOKENS_PER_FRAME_MIN} tokens each"
        )
    return TOKENS_PER_FRAME_MIN, min(n_max // frame_count, TOKENS_PER_FRAME_MAX)


def inference_tokens_per_frame(n_max: int, frame_count: int) -> int:
    """Fixed per-frame count at inference; clamps into [16, 576], never errors."""
    if n_max < 1 or frame_count < 1:
        raise ValueError(f"n_max and frame_count must be positive, got {n_max}, {frame_count}")
    return max(TOKENS_PER_FRAME_MIN, min(n_max // frame_count, TOKENS_PER_FRAME_MAX))


def max_frames(n_max: int, tokens_per_frame: int) -> int:
    """How many frames fit in the budget at a fixed per-frame count."""
    if n_max < 1 or tokens_per_frame < 1:
        raise ValueError(f"n_max and tokens_per_frame must be positive, got {n_max}, {tokens_per_frame}")
    return n_max // tokens_per_frame


def plan_inference(n_max: int, frame_count: int, snap: bool = True) -> BudgetPlan:
    """Budget plan for serving: fix tokens-per-frame, shed frames if needed.

    When the 16-token floor makes frame_count unaffordable, the frame count is
    reduced to what the budget supports rather than overrunning it.
    """
    tpf = inference_tokens_per_frame(n_max, frame_count)
    affordable = min(frame_count, max_frames(n_max, tpf))
    shape = snap_to_grid(tpf) if snap else None
    return BudgetPlan(n_max=n_max, frame_count=affordable, tokens_per_frame=tpf, realized_shape=shape)


def plan_frame_sampling(duration_s: float, max_frames: int) -> FrameSamplePlan:
    """Frame-center timestamps: 1 FPS when the video fits, else T uniform samples.

    Durations under one second still yield a single frame at the clip center.
    """
    if duration_s <= 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if max_frames < 1:
        raise ValueError(f"max_frames must be >= 1, got {max_frames}")
    if duration_s < max_frames:
        count = math.floor(duration_s)
        if count < 1:
            timestamps = (duration_s / 2.0,)
        else:
            timestamps = tuple(i + 0.5 for i in range(count))
    else:
        step = duration_s / max_frames
        timestamps = tuple((i + 0.5) * step for i in range(max_frames))
    return FrameSamplePlan(duration_s=duration_s, max_frames=max_frames, timestamps_s=timestamps)


def snap_to_grid(target_tokens: int) -> PoolShape:
    """Largest square pool shape not exceeding the target (never rounds up)."""
    if target_tokens < TOKENS_PER_FRAME_MIN:
        raise ValueError(f"target must be >= {TOKENS_PER_FRAME_MIN}, got {target_tokens}")
    side = math.isqrt(min(target_tokens, TOKENS_PER_FRAME_MAX))
    side = min(side, POOL_SIDE_FULL)
    return PoolShape(side, side)


def sweep_cost_table(n_max_values: list[int], tpf_values: list[int]) -> list[CostRow]:
    """Cross product of budgets and per-frame counts with max_frames applied."""
    if not n_max_values or not tpf_values:
        raise ValueError("sweep needs at least one n_max and one tokens_per_frame value")
    rows = []
    for n_max in n_max_values:
        for tpf in tpf_values:
            rows.append(CostRow(tokens_per_frame=tpf, n_max=n_max, max_frames=max_frames(n_max, tpf)))
    return rows


def table_rows() -> list[CostRow]:
    """The 15-row default cost table (the `sweep` preset)."""
    return [
        CostRow(tokens_per_frame=tpf, n_max=n_max, max_frames=max_frames(n_max, tpf))
        for tpf, n_max in TABLE_PAIRS
    ]


def cost_table_csv(rows: list[CostRow]) -> str:
    lines = [CSV_HEADER]
    lines.extend(f"{r.tokens_per_frame},{r.n_max},{r.max_frames}" for r in rows)
    return "\n".join(lines) + "\n"
