"""Binary containers for token grids, scorer weights, and compressed tokens.

Three sibling formats share one little-endian layout idiom: a 4-byte magic,
a u16 version, shape fields, then a raw float32 payload. They are custom and
minimal so round trips are bit-exact and readable from any language.

VTOK (video features)
    magic "VTOK" | version u16 | frame count N u32 | H u16 | W u16 | C u16 |
    2 zero bytes | N timestamps f64 | N*H*W*C values f32 (frame-major,
    row-major within a frame)

VSCR (token scorer weights)
    magic "VSCR" | version u16 | C u16 | D u16 | 2 zero bytes |
    f32 payload: w1 (C*D row-major), b1 (D), w2 (D), b2 (1)

VCMP (compressed token sets)
    magic "VCMP" | version u16 | frame count N u32 | C u16 | 2 zero bytes |
    then per frame: timestamp f64 | source count u32 | M u32 |
    M weights u32 | M*C tokens f32
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compressors import ScorerParams
from .grid import CompressedTokenSet, TokenGrid, VideoFeatures

FEATURE_MAGIC = b"VTOK"
SCORER_MAGIC = b"VSCR"
COMPRESSED_MAGIC = b"VCMP"
FORMAT_VERSION = 1


class FeatureFileError(Exception):
    """Base class for malformed container files."""


class BadMagicError(FeatureFileError):
    pass


class UnsupportedVersionError(FeatureFileError):
    pass


class TruncatedFileError(FeatureFileError):
    pass


class NonFiniteDataError(FeatureFileError):
    pass


class TimestampOrderError(FeatureFileError):
    pass


def atomic_write_bytes(path: str | Path, payload: bytes) -> None:
    """Write via a same-directory temp file and rename; never leaves partials."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


class _Cursor:
    """Bounds-checked reader over one file's bytes."""

    def __init__(self, blob: bytes, path: Path):
        self.blob = blob
        self.path = path
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedFileError(f"{self.path}: truncated while reading {what} ({self.pos + n} > {len(self.blob)} bytes)")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def f32(self, count: int, what: str) -> np.ndarray:
        return np.frombuffer(self.take(4 * count, what), dtype="<f4")

    def done(self) -> None:
        if self.pos != len(self.blob):
            raise TruncatedFileError(f"{self.path}: {len(self.blob) - self.pos} unexpected trailing bytes")


def _check_header(cur: _Cursor, magic: bytes) -> None:
    got = cur.take(4, "magic")
    if got != magic:
        raise BadMagicError(f"{cur.path}: expected magic {magic!r}, found {got!r}")
    (version,) = cur.unpack("<H", "version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"{cur.path}: unsupported version {version}")


def write_feature_file(video: VideoFeatures, path: str | Path) -> None:
    h, w, c = video.grid_shape
    parts = [
        FEATURE_MAGIC,
        struct.pack("<HIHHH2x", FORMAT_VERSION, video.frame_count, h, w, c),
        video.timestamps_s.astype("<f8").tobytes(),
    ]
    for frame in video.frames:
        parts.append(frame.data.astype("<f4").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_feature_file(path: str | Path) -> VideoFeatures:
    path = Path(path)
    cur = _Cursor(path.read_bytes(), path)
    _check_header(cur, FEATURE_MAGIC)
    n, h, w, c = cur.unpack("<IHHH2x", "shape header")
    if n < 1:
        raise FeatureFileError(f"{path}: frame count must be >= 1, got {n}")
    if min(h, w, c) < 1:
        raise FeatureFileError(f"{path}: grid dimensions must be positive, got ({h}, {w}, {c})")
    timestamps = np.frombuffer(cur.take(8 * n, "timestamps"), dtype="<f8")
    if not np.isfinite(timestamps).all():
        raise TimestampOrderError(f"{path}: non-finite timestamp")
    if timestamps[0] < 0 or np.any(np.diff(timestamps) <= 0):
        raise TimestampOrderError(f"{path}: timestamps must be non-negative and strictly increasing")
    frames = []
    for i in range(n):
        values = cur.f32(h * w * c, f"frame {i}")
        if not np.isfinite(values).all():
            raise NonFiniteDataError(f"{path}: frame {i} contains non-finite values")
        frames.append(TokenGrid(values.reshape(h, w, c)))
    cur.done()
    return VideoFeatures(tuple(frames), timestamps)


def write_scorer_file(params: ScorerParams, path: str | Path) -> None:
    c, d = params.channels, params.hidden_dim
    payload = np.concatenate(
        [
            params.w1.reshape(-1),
            params.b1.reshape(-1),
            params.w2.reshape(-1),
            np.array([params.b2], dtype=np.float32),
        ]
    ).astype("<f4")
    blob = SCORER_MAGIC + struct.pack("<HHH2x", FORMAT_VERSION, c, d) + payload.tobytes()
    atomic_write_bytes(path, blob)


def read_scorer_file(path: str | Path) -> ScorerParams:
    path = Path(path)
    cur = _Cursor(path.read_bytes(), path)
    _check_header(cur, SCORER_MAGIC)
    c, d = cur.unpack("<HH2x", "shape header")
    if c < 1 or d < 1:
        raise FeatureFileError(f"{path}: scorer shape must be positive, got C={c}, D={d}")
    w1 = cur.f32(c * d, "w1").reshape(c, d)
    b1 = cur.f32(d, "b1")
    w2 = cur.f32(d, "w2")
    b2 = float(cur.f32(1, "b2")[0])
    cur.done()
    if not all(np.isfinite(p).all() for p in (w1, b1, w2)) or not np.isfinite(b2):
        raise NonFiniteDataError(f"{path}: scorer weights contain non-finite values")
    return ScorerParams(w1=w1, b1=b1, w2=w2, b2=b2)


@dataclass(frozen=True, eq=False)
class CompressedVideo:
    """Per-frame compressed token sets plus their source timestamps."""

    frame_sets: tuple[CompressedTokenSet, ...]
    timestamps_s: np.ndarray

    def __post_init__(self) -> None:
        if not self.frame_sets:
            raise ValueError("a compressed video needs at least one frame")
        channels = self.frame_sets[0].channels
        for i, fs in enumerate(self.frame_sets):
            if fs.channels != channels:
                raise ValueError(f"frame {i} has {fs.channels} channels, expected {channels}")
        ts = np.asarray(self.timestamps_s, dtype=np.float64).reshape(-1)
        if ts.size != len(self.frame_sets):
            raise ValueError(f"{ts.size} timestamps for {len(self.frame_sets)} frames")
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps_s", ts)

    @property
    def total_tokens(self) -> int:
        return sum(fs.token_count for fs in self.frame_sets)


def write_compressed_file(video: CompressedVideo, path: str | Path) -> None:
    channels = video.frame_sets[0].channels
    parts = [COMPRESSED_MAGIC, struct.pack("<HIH2x", FORMAT_VERSION, len(video.frame_sets), channels)]
    for ts, fs in zip(video.timestamps_s, video.frame_sets):
        parts.append(struct.pack("<dII", ts, fs.source_count, fs.token_count))
        parts.append(fs.weights.astype("<u4").tobytes())
        parts.append(fs.tokens.astype("<f4").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_compressed_file(path: str | Path) -> CompressedVideo:
    path = Path(path)
    cur = _Cursor(path.read_bytes(), path)
    _check_header(cur, COMPRESSED_MAGIC)
    n, channels = cur.unpack("<IH2x", "shape header")
    if n < 1:
        raise FeatureFileError(f"{path}: frame count must be >= 1, got {n}")
    timestamps = np.empty(n, dtype=np.float64)
    frame_sets = []
    for i in range(n):
        timestamps[i], source_count, m = cur.unpack("<dII", f"frame {i} header")
        weights = np.frombuffer(cur.take(4 * m, f"frame {i} weights"), dtype="<u4").astype(np.int64)
        tokens = cur.f32(m * channels, f"frame {i} tokens").reshape(m, channels)
        if not np.isfinite(tokens).all():
            raise NonFiniteDataError(f"{path}: frame {i} contains non-finite values")
        frame_sets.append(CompressedTokenSet(tokens=tokens, weights=weights, source_count=source_count))
    cur.done()
    return CompressedVideo(tuple(frame_sets), timestamps)
