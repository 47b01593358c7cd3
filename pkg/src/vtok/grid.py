"""Core token-grid types and the synthetic fixture generator.

A video is encoded frame by frame into H x W grids of C-dimensional visual
tokens; compressors reduce each grid to an ordered token list with per-token
merge weights. All types validate on construction and are immutable
afterwards, so they are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng


@dataclass(frozen=True, eq=False)
class TokenGrid:
    """One frame's visual tokens: an (H, W, C) float32 array."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3:
            raise ValueError(f"token grid must be 3-dimensional (H, W, C), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"token grid dimensions must be positive, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("token grid contains non-finite values")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, height: int, width: int, channels: int, values) -> "TokenGrid":
        """Build from H*W*C flat values in (row, column, channel) order."""
        flat = np.asarray(values, dtype=np.float32).reshape(-1)
        expected = height * width * channels
        if flat.size != expected:
            raise ValueError(f"expected {expected} values for a {height}x{width}x{channels} grid, got {flat.size}")
        return cls(flat.reshape(height, width, channels))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def token_count(self) -> int:
        return self.height * self.width

    def tokens(self) -> np.ndarray:
        """Row-major (H*W, C) view of the grid."""
        return self.data.reshape(self.token_count, self.channels)

    def __repr__(self) -> str:
        return f"TokenGrid(height={self.height}, width={self.width}, channels={self.channels})"


@dataclass(frozen=True, eq=False)
class VideoFeatures:
    """Ordered per-frame token grids plus their sample timestamps."""

    frames: tuple[TokenGrid, ...]
    timestamps_s: np.ndarray

    def __post_init__(self) -> None:
        frames = tuple(self.frames)
        if not frames:
            raise ValueError("a video needs at least one frame")
        shape = frames[0].data.shape
        for i, frame in enumerate(frames):
            if frame.data.shape != shape:
                raise ValueError(f"frame {i} has shape {frame.data.shape}, expected {shape} like frame 0")
        ts = np.asarray(self.timestamps_s, dtype=np.float64).reshape(-1)
        if ts.size != len(frames):
            raise ValueError(f"{ts.size} timestamps for {len(frames)} frames")
        if not np.isfinite(ts).all():
            raise ValueError("timestamps contain non-finite values")
        if ts.size and ts[0] < 0:
            raise ValueError("timestamps must be non-negative")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        ts = ts.copy()
        ts.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "timestamps_s", ts)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        return self.frames[0].data.shape

    def __repr__(self) -> str:
        h, w, c = self.grid_shape
        return f"VideoFeatures(frames={self.frame_count}, grid={h}x{w}x{c})"


@dataclass(frozen=True, eq=False)
class CompressedTokenSet:
    """M output tokens with per-token merge weights (constituent counts).

    ``weights[j]`` counts the source tokens folded into output token j: every
    weight is 1 after pruning, the weights sum to ``source_count`` after
    merging, and they are bin cell counts after pooling (bins may overlap, so
    pooling weights can sum past ``source_count``).
    """

    tokens: np.ndarray
    weights: np.ndarray
    source_count: int

    def __post_init__(self) -> None:
        tokens = np.asarray(self.tokens, dtype=np.float32)
        if tokens.ndim != 2:
            raise ValueError(f"tokens must be a (M, C) array, got shape {tokens.shape}")
        if not np.isfinite(tokens).all():
            raise ValueError("tokens contain non-finite values")
        weights = np.asarray(self.weights, dtype=np.int64).reshape(-1)
        m = tokens.shape[0]
        if m < 1:
            raise ValueError("at least one output token required")
        if weights.size != m:
            raise ValueError(f"{weights.size} weights for {m} tokens")
        if np.any(weights < 1):
            raise ValueError("weights must be positive integers")
        if not (1 <= m <= self.source_count):
            raise ValueError(f"output count {m} outside [1, source_count={self.source_count}]")
        tokens = tokens.copy()
        tokens.setflags(write=False)
        weights = weights.copy()
        weights.setflags(write=False)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "source_count", int(self.source_count))

    @property
    def token_count(self) -> int:
        return self.tokens.shape[0]

    @property
    def channels(self) -> int:
        return self.tokens.shape[1]

    def __repr__(self) -> str:
        return (
            f"CompressedTokenSet(tokens={self.token_count}, channels={self.channels}, "
            f"source_count={self.source_count})"
        )


def synth_grid(seed: int, h: int, w: int, c: int) -> TokenGrid:
    """Deterministic pseudo-random grid with values in [-1, 1)."""
    if h < 1 or w < 1 or c < 1:
        raise ValueError(f"grid dimensions must be >= 1, got ({h}, {w}, {c})")
    values = rng.uniform_signed(seed, h * w * c).astype(np.float32)
    return TokenGrid(values.reshape(h, w, c))


def synth_video(seed: int, frames: int, h: int, w: int, c: int) -> VideoFeatures:
    """Deterministic multi-frame fixture, timestamped at 1 FPS frame centers."""
    if frames < 1:
        raise ValueError(f"frame count must be >= 1, got {frames}")
    per_frame = h * w * c
    grids = []
    for i in range(frames):
        values = rng.uniform_signed(seed, per_frame, start=i * per_frame).astype(np.float32)
        grids.append(TokenGrid(values.reshape(h, w, c)))
    timestamps = np.arange(frames, dtype=np.float64) + 0.5
    return VideoFeatures(tuple(grids), timestamps)
