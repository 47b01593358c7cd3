"""Dynamic visual-token compression for video language models.

Three interchangeable compressors reduce per-frame token grids to any
requested count, a budget planner splits a fixed visual context between
frame count and tokens per frame, serialization utilities produce the
timestamped model-input layout, and a dataset pipeline builds synthetic
video QA records.
"""

from .grid import CompressedTokenSet, TokenGrid, VideoFeatures, synth_grid, synth_video
from .compressors import (
    GumbelConfig,
    MergeRatio,
    PoolShape,
    ScorerParams,
    adaptive_avg_pool,
    bipartite_soft_match_merge,
    compress,
    cosine_similarity,
    prune_top_k,
    random_scorer,
    token_scores,
)
from .budget import (
    BudgetPlan,
    CostRow,
    FrameSamplePlan,
    inference_tokens_per_frame,
    max_frames,
    plan_frame_sampling,
    plan_inference,
    snap_to_grid,
    sweep_cost_table,
    table_rows,
    training_token_interval,
)
from .feature_io import (
    CompressedVideo,
    read_compressed_file,
    read_feature_file,
    read_scorer_file,
    write_compressed_file,
    write_feature_file,
    write_scorer_file,
)
from .prompt import (
    PromptLayout,
    format_multichoice,
    normalize_timestamps,
    serialize_video_prompt,
)

__version__ = "0.1.0"

__all__ = [
    "TokenGrid",
    "VideoFeatures",
    "CompressedTokenSet",
    "synth_grid",
    "synth_video",
    "PoolShape",
    "MergeRatio",
    "ScorerParams",
    "GumbelConfig",
    "adaptive_avg_pool",
    "bipartite_soft_match_merge",
    "cosine_similarity",
    "prune_top_k",
    "compress",
    "random_scorer",
    "token_scores",
    "BudgetPlan",
    "FrameSamplePlan",
    "CostRow",
    "training_token_interval",
    "inference_tokens_per_frame",
    "max_frames",
    "plan_frame_sampling",
    "plan_inference",
    "snap_to_grid",
    "sweep_cost_table",
    "table_rows",
    "read_feature_file",
    "write_feature_file",
    "read_scorer_file",
    "write_scorer_file",
    "read_compressed_file",
    "write_compressed_file",
    "CompressedVideo",
    "PromptLayout",
    "serialize_video_prompt",
    "normalize_timestamps",
    "format_multichoice",
    "__version__",
]
