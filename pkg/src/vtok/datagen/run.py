"""End-to-end dataset pipeline: dedup, downsample, annotate, filter, write.

Configuration is a flat key=value text file with ``VTOK_``-prefixed
environment overrides. Given one seed the whole run is deterministic, down
to the output bytes.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..budget import plan_frame_sampling
from ..feature_io import atomic_write_bytes
from .annotate import build_annotation_request
from .client import ClientConfig, HttpAnnotationClient, MockAnnotationClient
from .corpus import chunk_frequencies, dedup_captions, downsample_by_chunk_frequency
from .filters import filter_responses, parse_response
from .records import CATEGORIES, QARecord, qa_records_jsonl, read_caption_records

ENV_PREFIX = "VTOK_"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    input: Path
    output: Path
    report: Path | None = None
    plot: bool = True
    seed: int = 0
    chunk_cap: int = 100
    categories: tuple[str, ...] = CATEGORIES
    client: str = "mock"
    endpoint: str = ""
    api_token: str = ""
    model: str = "gpt-4o"
    temperature: float = 0.2
    timeout_s: float = 30.0
    max_retries: int = 3
    backoff_base_s: float = 0.5
    max_in_flight: int = 4
    frame_cap: int = 128
    long_frame_cap: int = 256
    long_fraction: float = 0.05
    templates_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.chunk_cap < 1:
            raise ConfigError(f"chunk_cap must be >= 1, got {self.chunk_cap}")
        if self.client not in ("mock", "live"):
            raise ConfigError(f"client must be 'mock' or 'live', got {self.client!r}")
        if not self.categories:
            raise ConfigError("at least one category required")
        for cat in self.categories:
            if cat not in CATEGORIES:
                raise ConfigError(f"unknown category {cat!r}, expected one of {CATEGORIES}")
        if self.frame_cap < 1 or self.long_frame_cap < self.frame_cap:
            raise ConfigError("frame caps must satisfy 1 <= frame_cap <= long_frame_cap")
        if not (0.0 <= self.long_fraction <= 1.0):
            raise ConfigError(f"long_fraction must be in [0, 1], got {self.long_fraction}")

    @property
    def report_path(self) -> Path:
        return self.report if self.report is not None else Path(str(self.output) + ".report.txt")

    @property
    def figure_path(self) -> Path:
        return self.output.with_suffix(".png")


_FIELD_PARSERS = {
    "input": Path,
    "output": Path,
    "report": Path,
    "plot": None,  # bool, handled below
    "seed": int,
    "chunk_cap": int,
    "categories": None,  # comma list, handled below
    "client": str,
    "endpoint": str,
    "api_token": str,
    "model": str,
    "temperature": float,
    "timeout_s": float,
    "max_retries": int,
    "backoff_base_s": float,
    "max_in_flight": int,
    "frame_cap": int,
    "long_frame_cap": int,
    "long_fraction": float,
    "templates_dir": Path,
}


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def load_pipeline_config(path: str | Path, env: dict | None = None) -> PipelineConfig:
    """Parse key=value lines, then apply VTOK_* environment overrides."""
    env = os.environ if env is None else env
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()
    for key in _FIELD_PARSERS:
        override = env.get(ENV_PREFIX + key.upper())
        if override is not None:
            raw[key] = override
    unknown = sorted(set(raw) - set(_FIELD_PARSERS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for required in ("input", "output"):
        if required not in raw:
            raise ConfigError(f"missing required config key {required!r}")
    kwargs: dict = {}
    for key, value in raw.items():
        try:
            if key == "plot":
                kwargs[key] = _parse_bool(value)
            elif key == "categories":
                kwargs[key] = tuple(c.strip() for c in value.split(",") if c.strip())
            else:
                kwargs[key] = _FIELD_PARSERS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return PipelineConfig(**kwargs)


@dataclass
class PipelineReport:
    input_count: int = 0
    dedup_dropped: int = 0
    downsample_dropped: int = 0
    requests_sent: int = 0
    drop_counts: dict[str, int] = field(default_factory=dict)
    kept_count: int = 0
    category_counts: dict[str, int] = field(default_factory=dict)
    max_chunk_frequency: int = 0

    def to_text(self) -> str:
        lines = [
            f"input={self.input_count}",
            f"dedup_dropped={self.dedup_dropped}",
            f"downsample_dropped={self.downsample_dropped}",
            f"requests_sent={self.requests_sent}",
        ]
        lines.extend(f"dropped_{reason}={count}" for reason, count in sorted(self.drop_counts.items()))
        lines.append(f"kept={self.kept_count}")
        lines.extend(f"kept_{cat}={count}" for cat, count in sorted(self.category_counts.items()))
        lines.append(f"max_chunk_frequency={self.max_chunk_frequency}")
        return "\n".join(lines) + "\n"


def make_client(config: PipelineConfig):
    if config.client == "mock":
        return MockAnnotationClient(seed=config.seed)
    return HttpAnnotationClient(
        ClientConfig(
            endpoint_url=config.endpoint,
            api_token=config.api_token,
            model=config.model,
            temperature=config.temperature,
            timeout_s=config.timeout_s,
            max_retries=config.max_retries,
            backoff_base_s=config.backoff_base_s,
            max_in_flight=config.max_in_flight,
        )
    )


def run_pipeline(config: PipelineConfig, client=None) -> tuple[list[QARecord], PipelineReport]:
    """Run all stages, write the JSONL/report/figure atomically, and return
    the surviving records plus stage counts."""
    client = make_client(config) if client is None else client
    records = read_caption_records(config.input)
    report = PipelineReport(input_count=len(records))

    deduped = dedup_captions(records)
    report.dedup_dropped = len(records) - len(deduped)

    sampled = downsample_by_chunk_frequency(deduped, cap=config.chunk_cap, seed=config.seed)
    report.downsample_dropped = len(deduped) - len(sampled)
    stats = chunk_frequencies(sampled)
    report.max_chunk_frequency = stats[0].frequency if stats else 0

    # Distinct derived seeds per decision stream keep runs reproducible.
    category_rng = random.Random(config.seed + 1)
    long_rng = random.Random(config.seed + 2)
    pairs = []
    for record in sampled:
        category = config.categories[category_rng.randrange(len(config.categories))]
        cap = config.frame_cap
        if record.source == "hdvila" and long_rng.random() < config.long_fraction:
            cap = config.long_frame_cap
        plan = plan_frame_sampling(record.duration_s, cap)
        request = build_annotation_request(record, category, plan, config.templates_dir)
        raw_text = client.send(request)
        report.requests_sent += 1
        candidate = parse_response(
            video_id=record.video_id,
            category=category,
            frame_timestamps_s=plan.timestamps_s,
            raw_text=raw_text,
            provenance=client.identity,
        )
        pairs.append((candidate, raw_text))

    filtered = filter_responses(pairs)
    report.drop_counts = dict(filtered.drop_counts)
    report.kept_count = len(filtered.kept)
    for cat in config.categories:
        report.category_counts[cat] = sum(1 for r in filtered.kept if r.category == cat)

    atomic_write_bytes(config.output, qa_records_jsonl(filtered.kept).encode("utf-8"))
    atomic_write_bytes(config.report_path, report.to_text().encode("utf-8"))
    if config.plot:
        from .. import plots  # deferred: matplotlib only loads when figures are wanted

        plots.save_pipeline_figure(report, config.figure_path)
    return filtered.kept, report
