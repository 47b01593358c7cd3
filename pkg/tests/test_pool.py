import math

import numpy as np
import pytest

from vtok import PoolShape, TokenGrid, adaptive_avg_pool, synth_grid


def pool_oracle(data: np.ndarray, out_h: int, out_w: int):
    """Naive double-loop bin averages, independent of the production path:
    float bin boundaries, fsum accumulation over explicit cell lists."""
    h, w, c = data.shape
    tokens = np.zeros((out_h * out_w, c))
    weights = np.zeros(out_h * out_w, dtype=int)
    for i in range(out_h):
        r0 = math.floor(i * h / out_h)
        r1 = math.ceil((i + 1) * h / out_h)
        for j in range(out_w):
            c0 = math.floor(j * w / out_w)
            c1 = math.ceil((j + 1) * w / out_w)
            cells = [data[r, col] for r in range(r0, r1) for col in range(c0, c1)]
            for ch in range(c):
                tokens[i * out_w + j, ch] = math.fsum(float(cell[ch]) for cell in cells) / len(cells)
            weights[i * out_w + j] = len(cells)
    return tokens, weights


def test_identity_shape_returns_input_exactly():
    grid = synth_grid(1, 6, 6, 4)
    out = adaptive_avg_pool(grid, PoolShape(6, 6))
    assert np.array_equal(out.tokens, grid.tokens())
    assert np.array_equal(out.weights, np.ones(36, dtype=np.int64))
    assert out.source_count == 36


def test_quadrant_means_4x4_to_2x2():
    grid = TokenGrid.from_flat(4, 4, 1, np.arange(1, 17, dtype=np.float32))
    out = adaptive_avg_pool(grid, PoolShape(2, 2))
    assert out.tokens.reshape(-1).tolist() == [3.5, 5.5, 11.5, 13.5]
    assert out.weights.tolist() == [4, 4, 4, 4]


def test_7x7_to_5x5_matches_oracle():
    grid = synth_grid(2, 7, 7, 3)
    out = adaptive_avg_pool(grid, PoolShape(5, 5))
    expect_tokens, expect_weights = pool_oracle(grid.data, 5, 5)
    assert np.abs(out.tokens - expect_tokens).max() <= 1e-6
    assert np.array_equal(out.weights, expect_weights)


def test_shape_larger_than_grid_rejected():
    grid = synth_grid(0, 4, 4, 1)
    with pytest.raises(ValueError, match="exceeds grid"):
        adaptive_avg_pool(grid, PoolShape(5, 5))


def test_pool_shape_must_be_square():
    with pytest.raises(ValueError, match="square"):
        PoolShape(4, 5)


@pytest.mark.parametrize("side", [0, 29])
def test_pool_shape_bounds(side):
    with pytest.raises(ValueError):
        PoolShape(side, side)


def test_divisible_bins_partition_and_preserve_mean():
    grid = synth_grid(3, 12, 8, 5)
    out = adaptive_avg_pool(grid, PoolShape(4, 4))
    assert out.weights.sum() == grid.token_count  # bins partition the grid
    weighted = (out.weights[:, None] * out.tokens.astype(np.float64)).sum(axis=0)
    weighted /= out.weights.sum()
    assert np.abs(weighted - grid.tokens().astype(np.float64).mean(axis=0)).max() <= 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_outputs_stay_within_bin_extremes(seed):
    h, w = 7 + seed, 9 + seed
    grid = synth_grid(seed, h, w, 3)
    side = 5
    out = adaptive_avg_pool(grid, PoolShape(side, side))
    data = grid.data
    for i in range(side):
        r0, r1 = (i * h) // side, -((-(i + 1) * h) // side)
        for j in range(side):
            c0, c1 = (j * w) // side, -((-(j + 1) * w) // side)
            block = data[r0:r1, c0:c1].reshape(-1, 3)
            got = out.tokens[i * side + j]
            assert (got >= block.min(axis=0) - 1e-6).all()
            assert (got <= block.max(axis=0) + 1e-6).all()


def test_larger_shape_never_yields_fewer_tokens():
    grid = synth_grid(4, 20, 20, 2)
    counts = [adaptive_avg_pool(grid, PoolShape(s, s)).token_count for s in (4, 7, 11, 16, 20)]
    assert counts == sorted(counts)
