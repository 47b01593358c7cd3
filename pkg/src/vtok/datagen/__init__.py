"""Synthetic video QA dataset construction: dedup, downsampling, templated
annotation requests, a mock/live annotation client, and response filtering."""

from .records import CATEGORIES, SOURCES, CaptionRecord, QARecord
from .corpus import dedup_captions, downsample_by_chunk_frequency, extract_noun_chunks
from .annotate import AnnotationRequest, build_annotation_request
from .client import HttpAnnotationClient, MockAnnotationClient
from .filters import filter_responses, parse_response
from .run import PipelineConfig, load_pipeline_config, run_pipeline

__all__ = [
    "CATEGORIES",
    "SOURCES",
    "CaptionRecord",
    "QARecord",
    "dedup_captions",
    "downsample_by_chunk_frequency",
    "extract_noun_chunks",
    "AnnotationRequest",
    "build_annotation_request",
    "HttpAnnotationClient",
    "MockAnnotationClient",
    "filter_responses",
    "parse_response",
    "PipelineConfig",
    "load_pipeline_config",
    "run_pipeline",
]
