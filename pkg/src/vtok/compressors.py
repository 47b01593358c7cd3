"""Three interchangeable token compressors: pooling, merging, pruning.

Each reduces one frame's token grid to a requested count M and reports
per-token merge weights. All operations are pure functions over immutable
inputs; accumulation happens in float64 and results are rounded to float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import erf

from . import rng
from .grid import CompressedTokenSet, TokenGrid

POOL_SIDE_MAX = 28
MERGE_RATIO_MAX = 49.0

CompressorName = Literal["pool", "merge", "prune"]
COMPRESSOR_NAMES: tuple[str, ...] = ("pool", "merge", "prune")


@dataclass(frozen=True)
class PoolShape:
    """Square output shape for adaptive pooling; M = out_h * out_w.

    The lower side bound is 1 here (the planner and CLI hold the production
    [4, 28] range) so that small identity and quadrant cases stay expressible.
    """

    out_h: int
    out_w: int

    def __post_init__(self) -> None:
        if self.out_h != self.out_w:
            raise ValueError(f"pool shape must be square, got {self.out_h}x{self.out_w}")
        if not (1 <= self.out_h <= POOL_SIDE_MAX):
            raise ValueError(f"pool side must be in [1, {POOL_SIDE_MAX}], got {self.out_h}")

    @property
    def token_count(self) -> int:
        return self.out_h * self.out_w


@dataclass(frozen=True)
class MergeRatio:
    """Reduction factor k; a grid of N tokens merges down to round(N/k)."""

    k: float

    def __post_init__(self) -> None:
        if not (1.0 <= self.k <= MERGE_RATIO_MAX):
            raise ValueError(f"merge ratio must be in [1, {MERGE_RATIO_MAX:g}], got {self.k}")

    def target_tokens(self, source_count: int) -> int:
        # round half up, clamped to at least one survivor
        return max(1, int(np.floor(source_count / self.k + 0.5)))


@dataclass(frozen=True)
class ScorerParams:
    """Two-layer perceptron scoring token importance: w2' gelu(w1' x + b1) + b2."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def __post_init__(self) -> None:
        w1 = np.asarray(self.w1, dtype=np.float32)
        if w1.ndim != 2 or min(w1.shape) < 1:
            raise ValueError(f"w1 must be a (C, D) matrix, got shape {w1.shape}")
        d = w1.shape[1]
        b1 = np.asarray(self.b1, dtype=np.float32).reshape(-1)
        if b1.size != d:
            raise ValueError(f"b1 must have {d} entries, got {b1.size}")
        w2 = np.asarray(self.w2, dtype=np.float32).reshape(-1)
        if w2.size != d:
            raise ValueError(f"w2 must have {d} entries, got {w2.size}")
        for name, arr in (("w1", w1), ("b1", b1), ("w2", w2)):
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")
            arr.setflags(write=False)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        # quantized like the on-disk payload: 32-bit floats throughout
        object.__setattr__(self, "b2", float(np.float32(self.b2)))

    @property
    def channels(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]


@dataclass(frozen=True)
class GumbelConfig:
    """Sampling knobs for soft token selection."""

    temperature: float = 1.0
    seed: int = 0
    mode: Literal["hard", "soft"] = "hard"

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.mode not in ("hard", "soft"):
            raise ValueError(f"mode must be 'hard' or 'soft', got {self.mode!r}")


def random_scorer(seed: int, channels: int, hidden_dim: int | None = None) -> ScorerParams:
    """Seeded scorer for tests and the CLI default; hidden width C/4 unless given."""
    if hidden_dim is None:
        hidden_dim = max(1, channels // 4)
    n1 = channels * hidden_dim
    scale1 = 1.0 / np.sqrt(channels)
    scale2 = 1.0 / np.sqrt(hidden_dim)
    w1 = rng.uniform_signed(seed, n1) * scale1
    b1 = rng.uniform_signed(seed, hidden_dim, start=n1) * scale1
    w2 = rng.uniform_signed(seed, hidden_dim, start=n1 + hidden_dim) * scale2
    b2 = float(rng.uniform_signed(seed, 1, start=n1 + 2 * hidden_dim)[0] * scale2)
    return ScorerParams(w1=w1.reshape(channels, hidden_dim), b1=b1, w2=w2, b2=b2)


def cosine_similarity(a, b) -> float:
    """Cosine of two vectors in [-1, 1]; zero vectors compare as 0."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"vector lengths differ: {a.size} vs {b.size}")
    aa = float(a @ a)
    bb = float(b @ b)
    if aa == 0.0 or bb == 0.0:
        return 0.0
    sim = float(a @ b) / float(np.sqrt(aa * bb))
    return min(1.0, max(-1.0, sim))


def adaptive_avg_pool(grid: TokenGrid, shape: PoolShape) -> CompressedTokenSet:
    """Average the grid into out_h x out_w bins; output order is row-major.

    Output cell (i, j) averages input rows [floor(i*H/out_h), ceil((i+1)*H/out_h))
    and the analogous column range, so neighbouring bins overlap whenever the
    output side does not divide the input side. Weights are bin cell counts.
    """
    h, w = grid.height, grid.width
    if shape.out_h > h or shape.out_w > w:
        raise ValueError(f"pool shape {shape.out_h}x{shape.out_w} exceeds grid {h}x{w}")
    data = grid.data.astype(np.float64)
    out = np.empty((shape.out_h, shape.out_w, grid.channels), dtype=np.float64)
    weights = np.empty(shape.out_h * shape.out_w, dtype=np.int64)
    for i in range(shape.out_h):
        r0 = (i * h) // shape.out_h
        r1 = ((i + 1) * h + shape.out_h - 1) // shape.out_h
        for j in range(shape.out_w):
            c0 = (j * w) // shape.out_w
            c1 = ((j + 1) * w + shape.out_w - 1) // shape.out_w
            out[i, j] = data[r0:r1, c0:c1].mean(axis=(0, 1))
            weights[i * shape.out_w + j] = (r1 - r0) * (c1 - c0)
    tokens = out.reshape(shape.token_count, grid.channels).astype(np.float32)
    return CompressedTokenSet(tokens=tokens, weights=weights, source_count=grid.token_count)


def _round_edges(means: np.ndarray, a_idx: np.ndarray, b_idx: np.ndarray, r: int) -> list[tuple[int, int]]:
    """One merge round's decisions: per-A best B, then the r strongest edges.

    Ties resolve toward the lower index, both when an A token picks its B
    partner and when edges are ranked by similarity.
    """
    norms = np.linalg.norm(means, axis=1)
    unit = np.divide(means, norms[:, None], out=np.zeros_like(means), where=norms[:, None] > 0)
    sim = unit[a_idx] @ unit[b_idx].T
    best_b = np.argmax(sim, axis=1)  # first max wins: lower B index on ties
    best_sim = sim[np.arange(a_idx.size), best_b]
    ranked = np.argsort(-best_sim, kind="stable")  # stable: lower A index on ties
    return [(int(a_idx[a]), int(b_idx[best_b[a]])) for a in ranked[:r]]


def bipartite_merge_with_trace(
    tokens: np.ndarray, target: int
) -> tuple[np.ndarray, np.ndarray, list[list[tuple[int, int]]]]:
    """Merge N tokens down to ``target`` by iterated bipartite rounds.

    Each round splits the current token list into A (even positions) and
    B (odd positions), links every A token to its most cosine-similar B token,
    and folds the r = min(|A|, excess) strongest edges into their B tokens by
    weight-proportional averaging. Survivors are reordered as all B tokens
    followed by unmerged A tokens, each group in ascending position order.

    Returns (means float64 (target, C), weights int64, per-round edge lists);
    edge indices refer to positions in that round's token list.
    """
    tokens = np.asarray(tokens, dtype=np.float64)
    n = tokens.shape[0]
    if not (1 <= target <= n):
        raise ValueError(f"target {target} outside [1, {n}]")
    sums = tokens.copy()
    weights = np.ones(n, dtype=np.int64)
    rounds: list[list[tuple[int, int]]] = []
    while sums.shape[0] > target:
        count = sums.shape[0]
        a_idx = np.arange(0, count, 2)
        b_idx = np.arange(1, count, 2)
        r = min(a_idx.size, count - target)
        means = sums / weights[:, None]
        edges = _round_edges(means, a_idx, b_idx, r)
        rounds.append(edges)
        merged_a = set()
        for a, b in edges:
            sums[b] = sums[b] + sums[a]
            weights[b] += weights[a]
            merged_a.add(a)
        keep = list(b_idx) + [int(a) for a in a_idx if int(a) not in merged_a]
        sums = sums[keep]
        weights = weights[keep]
    return sums / weights[:, None], weights, rounds


def bipartite_soft_match_merge(grid: TokenGrid, ratio: MergeRatio) -> CompressedTokenSet:
    """Reduce the flattened grid to round(N/k) tokens by similarity merging."""
    n = grid.token_count
    if n < 2 and ratio.k > 1:
        raise ValueError("cannot merge a single token further")
    target = ratio.target_tokens(n)
    means, weights, _ = bipartite_merge_with_trace(grid.tokens(), target)
    return CompressedTokenSet(tokens=means.astype(np.float32), weights=weights, source_count=n)


def token_scores(tokens: np.ndarray, params: ScorerParams) -> np.ndarray:
    """Importance score per token from the two-layer GELU perceptron."""
    tokens = np.asarray(tokens, dtype=np.float64)
    if tokens.ndim != 2 or tokens.shape[1] != params.channels:
        raise ValueError(f"tokens of shape {tokens.shape} do not match scorer channels {params.channels}")
    pre = tokens @ params.w1.astype(np.float64) + params.b1.astype(np.float64)
    hidden = 0.5 * pre * (1.0 + erf(pre / np.sqrt(2.0)))
    return hidden @ params.w2.astype(np.float64) + float(params.b2)


def _top_m_stable(values: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m largest values, ties to the lower index, ascending order."""
    ranked = np.argsort(-values, kind="stable")[:m]
    return np.sort(ranked)


def prune_indices(grid: TokenGrid, m: int, params: ScorerParams, cfg: GumbelConfig) -> np.ndarray:
    """Indices of the m tokens the pruner keeps, in original order.

    Hard mode ranks raw scores. Soft mode log-softmaxes them, adds seeded
    Gumbel noise, divides by the temperature, and keeps the top m of the
    perturbed scores. Ties go to the lower index in both modes.
    """
    n = grid.token_count
    if not (1 <= m <= n):
        raise ValueError(f"kept token count {m} outside [1, {n}]")
    scores = token_scores(grid.tokens(), params)
    if cfg.mode == "soft":
        log_probs = scores - np.log(np.sum(np.exp(scores - scores.max()))) - scores.max()
        scores = (log_probs + rng.gumbel(cfg.seed, n)) / cfg.temperature
    return _top_m_stable(scores, m)


def prune_top_k(grid: TokenGrid, m: int, params: ScorerParams, cfg: GumbelConfig) -> CompressedTokenSet:
    """Keep the m most important tokens; all kept tokens carry weight 1."""
    keep = prune_indices(grid, m, params, cfg)
    return CompressedTokenSet(
        tokens=grid.tokens()[keep], weights=np.ones(m, dtype=np.int64), source_count=grid.token_count
    )


def compress(
    grid: TokenGrid,
    method: CompressorName,
    target_tokens: int,
    *,
    pool_shape: PoolShape | None = None,
    scorer: ScorerParams | None = None,
    gumbel: GumbelConfig | None = None,
) -> CompressedTokenSet:
    """Dispatch to one compressor; the output count equals the realized M.

    Pooling needs a square target (or an explicit ``pool_shape``); merging
    derives its reduction factor as N / target; pruning needs scorer params.
    """
    n = grid.token_count
    if method == "pool":
        if pool_shape is None:
            side = math.isqrt(max(0, target_tokens))
            if side * side != target_tokens:
                raise ValueError(
                    f"pooling cannot realize {target_tokens} tokens: not a square count"
                )
            pool_shape = PoolShape(side, side)
        return adaptive_avg_pool(grid, pool_shape)
    if method == "merge":
        if not (1 <= target_tokens <= n):
            raise ValueError(f"merge target {target_tokens} outside [1, {n}]")
        return bipartite_soft_match_merge(grid, MergeRatio(n / target_tokens))
    if method == "prune":
        if scorer is None:
            raise ValueError("pruning requires scorer params")
        return prune_top_k(grid, target_tokens, scorer, gumbel or GumbelConfig())
    raise ValueError(f"unknown compressor {method!r}")
