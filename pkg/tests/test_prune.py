import math

import numpy as np
import pytest

from vtok import GumbelConfig, ScorerParams, TokenGrid, prune_top_k, random_scorer, synth_grid, token_scores
from vtok.compressors import prune_indices


def score_oracle(token, params: ScorerParams) -> float:
    """Sequential-sum reimplementation of the scorer MLP."""
    c, d = params.channels, params.hidden_dim
    total = float(params.b2)
    for j in range(d):
        pre = float(params.b1[j]) + sum(float(token[i]) * float(params.w1[i, j]) for i in range(c))
        gelu = 0.5 * pre * (1.0 + math.erf(pre / math.sqrt(2.0)))
        total += gelu * float(params.w2[j])
    return total


def top_m_oracle(scores, m):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return sorted(order[:m])


def identity_scorer() -> ScorerParams:
    # C=1, D=1, w=1, b=0: score = gelu(x), strictly increasing in x
    return ScorerParams(w1=[[1.0]], b1=[0.0], w2=[1.0], b2=0.0)


def column_grid(values) -> TokenGrid:
    arr = np.asarray(values, dtype=np.float32).reshape(1, -1, 1)
    return TokenGrid(arr)


class TestHardMode:
    def test_top_two_of_three_scores(self):
        grid = column_grid([0.9, 0.1, 0.5])
        out = prune_top_k(grid, 2, identity_scorer(), GumbelConfig(mode="hard"))
        assert out.tokens.reshape(-1).tolist() == pytest.approx([0.9, 0.5])
        assert out.weights.tolist() == [1, 1]

    def test_m_equal_n_is_identity(self):
        grid = synth_grid(0, 4, 4, 8)
        out = prune_top_k(grid, 16, random_scorer(1, 8), GumbelConfig())
        assert np.array_equal(out.tokens, grid.tokens())

    @pytest.mark.parametrize("m", [0, 17])
    def test_m_out_of_range(self, m):
        grid = synth_grid(0, 4, 4, 2)
        with pytest.raises(ValueError, match="outside"):
            prune_top_k(grid, m, random_scorer(1, 2), GumbelConfig())

    def test_param_shape_mismatch(self):
        grid = synth_grid(0, 4, 4, 8)
        with pytest.raises(ValueError, match="channels"):
            prune_top_k(grid, 4, random_scorer(1, 4), GumbelConfig())

    def test_ties_keep_lower_index(self):
        grid = column_grid([0.5, 0.5, 0.5, 0.1])
        kept = prune_indices(grid, 2, identity_scorer(), GumbelConfig())
        assert kept.tolist() == [0, 1]

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_full_sort_oracle(self, seed):
        grid = synth_grid(seed, 5, 6, 12)
        params = random_scorer(seed + 50, 12)
        m = 7 + seed
        kept = prune_indices(grid, m, params, GumbelConfig(mode="hard"))
        oracle_scores = [score_oracle(t, params) for t in grid.tokens()]
        assert kept.tolist() == top_m_oracle(oracle_scores, m)

    def test_permutation_covariance(self):
        grid = synth_grid(7, 4, 5, 6)
        params = random_scorer(8, 6)
        m = 6
        base = prune_indices(grid, m, params, GumbelConfig()).tolist()
        perm = np.random.RandomState(0).permutation(grid.token_count)
        permuted = TokenGrid(grid.tokens()[perm].reshape(grid.data.shape))
        kept_perm = prune_indices(permuted, m, params, GumbelConfig()).tolist()
        # position j in the permuted grid holds original token perm[j]
        assert sorted(perm[kept_perm].tolist()) == base


class TestScores:
    def test_matches_oracle(self):
        grid = synth_grid(3, 3, 3, 5)
        params = random_scorer(4, 5)
        got = token_scores(grid.tokens(), params)
        expect = [score_oracle(t, params) for t in grid.tokens()]
        assert np.abs(got - np.asarray(expect)).max() <= 1e-9

    def test_scorer_validation(self):
        with pytest.raises(ValueError, match="b1"):
            ScorerParams(w1=np.zeros((4, 2)), b1=np.zeros(3), w2=np.zeros(2), b2=0.0)
        with pytest.raises(ValueError, match="w2"):
            ScorerParams(w1=np.zeros((4, 2)), b1=np.zeros(2), w2=np.zeros(3), b2=0.0)
        with pytest.raises(ValueError, match="non-finite"):
            ScorerParams(w1=np.full((2, 1), np.nan), b1=np.zeros(1), w2=np.zeros(1), b2=0.0)


class TestSoftMode:
    def test_deterministic_per_seed(self):
        grid = synth_grid(2, 6, 6, 4)
        params = random_scorer(3, 4)
        cfg = GumbelConfig(temperature=0.7, seed=11, mode="soft")
        a = prune_top_k(grid, 9, params, cfg)
        b = prune_top_k(grid, 9, params, cfg)
        assert a.tokens.tobytes() == b.tokens.tobytes()

    def test_different_seeds_can_differ(self):
        grid = synth_grid(2, 6, 6, 4)
        params = random_scorer(3, 4)
        picks = {
            tuple(prune_indices(grid, 9, params, GumbelConfig(1.0, seed, "soft")).tolist())
            for seed in range(20)
        }
        assert len(picks) > 1

    def test_dominant_token_nearly_always_selected(self):
        # gelu(6) - gelu(0) = 6 raw-score margin -> >= 5 after log-softmax
        grid = column_grid([0.0, 0.0, 0.0, 6.0, 0.0, 0.0, 0.0, 0.0])
        params = identity_scorer()
        hits = 0
        draws = 2000
        for seed in range(draws):
            kept = prune_indices(grid, 2, params, GumbelConfig(0.1, seed, "soft"))
            hits += 3 in kept
        assert hits / draws >= 0.99

    def test_config_validation(self):
        with pytest.raises(ValueError, match="temperature"):
            GumbelConfig(temperature=0.0)
        with pytest.raises(ValueError, match="mode"):
            GumbelConfig(mode="warm")
