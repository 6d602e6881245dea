from __future__ import annotations

import numpy as np
import pytest

from alignment.revenue import (
    ProjectionG,
    TernaryRevenueConfig,
    build_characteristic_game,
    coalition_revenue,
    coalition_revenues,
    cosine_similarity,
    pair_revenue,
)
from data_collection.tokens import AnswerEmbedding, TokenSet
from game_core.coalitions import Coalition, PlayerUniverse
from game_core.errors import ConfigError, DegenerateInputError, ShapeError
from game_core.interactions import Estimator, interaction_matrix


def _random_inputs(seed, n_v=3, n_q=2, dim=4):
    rng = np.random.default_rng(seed)
    visual = TokenSet(rng.standard_normal((n_v, dim)))
    question = TokenSet(rng.standard_normal((n_q, dim)))
    answer = AnswerEmbedding(rng.standard_normal(dim))
    g = ProjectionG.random(dim, 2 * dim, seed=seed)
    return visual, question, answer, g


def _cos(a, b):
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


@pytest.mark.parametrize('a, b, expected', [
    ([1, 0], [0, 1], 0.0),
    ([3, 4], [3, 4], 1.0),
    ([1, 2], [2, 1], 0.8),
])
def test_cosine_similarity_examples(a, b, expected):
    assert cosine_similarity(a, b) == pytest.approx(expected, abs=1e-12)


def test_cosine_of_zero_vector_is_degenerate():
    with pytest.raises(DegenerateInputError):
        cosine_similarity([0.0, 0.0], [1.0, 0.0])


def test_cosine_shape_mismatch():
    with pytest.raises(ShapeError):
        cosine_similarity([1.0, 0.0], [1.0, 0.0, 0.0])


def test_pair_revenue_is_two_when_everything_aligns():
    v = np.array([0.6, 0.8])
    answer = AnswerEmbedding(v)
    g = ProjectionG.left_identity(2, 2)
    assert pair_revenue(v, v, answer, g) == pytest.approx(2.0, abs=1e-12)


def test_pair_revenue_is_zero_when_everything_is_orthogonal():
    v = np.array([1.0, 0.0, 0.0])
    q = np.array([0.0, 1.0, 0.0])
    answer = AnswerEmbedding([0.0, 0.0, 1.0])
    g = ProjectionG.left_identity(3, 3)
    assert pair_revenue(v, q, answer, g) == 0.0


def test_pair_revenue_matches_hand_recomputation():
    for seed in range(20):
        visual, question, answer, g = _random_inputs(seed)
        v, q = visual[0], question[1]
        projected = g.weights @ np.concatenate([v, q]) + g.bias
        expected = _cos(v, q) + _cos(answer.vector, projected)
        assert pair_revenue(v, q, answer, g) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_pair_revenue_dot_similarity():
    v = np.array([1.0, 2.0])
    q = np.array([3.0, -1.0])
    answer = AnswerEmbedding([0.5, 0.5])
    g = ProjectionG.left_identity(2, 2)
    cfg = TernaryRevenueConfig(similarity='dot')
    assert pair_revenue(v, q, answer, g, cfg) == pytest.approx(1.0 + 1.5)


def test_pair_revenue_rejects_zero_projection():
    g = ProjectionG(np.zeros((2, 4)), np.zeros(2))
    with pytest.raises(DegenerateInputError):
        pair_revenue([1.0, 0.0], [0.0, 1.0], AnswerEmbedding([1.0, 0.0]), g)


def test_pair_revenue_dimension_mismatch():
    g = ProjectionG.left_identity(2, 2)
    with pytest.raises(ShapeError):
        pair_revenue([1.0, 0.0], [0.0, 1.0, 0.0], AnswerEmbedding([1.0, 0.0]), g)


def test_unknown_similarity_is_a_config_error():
    with pytest.raises(ConfigError):
        TernaryRevenueConfig(similarity='euclid')


def test_one_sided_coalitions_earn_the_empty_payoff():
    visual, question, answer, g = _random_inputs(0)
    universe = PlayerUniverse(len(visual), len(question))
    assert coalition_revenue(Coalition.empty(5), universe, visual, question, answer, g) == 0.0
    single = Coalition.from_players([1], 5)
    assert coalition_revenue(single, universe, visual, question, answer, g) == 0.0
    questions_only = Coalition.from_players([3, 4], 5)
    assert coalition_revenue(questions_only, universe, visual, question, answer, g) == 0.0


def test_coalition_revenue_pools_by_mean():
    visual, question, answer, g = _random_inputs(1)
    universe = PlayerUniverse(3, 2)
    coalition = Coalition.from_players([0, 1, universe.question_player(0)], 5)
    expected = pair_revenue((visual[0] + visual[1]) / 2, question[0], answer, g)
    assert coalition_revenue(coalition, universe, visual, question, answer, g) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('similarity', ['cosine', 'dot'])
def test_batch_revenue_agrees_with_scalar(similarity):
    visual, question, answer, g = _random_inputs(2, n_v=3, n_q=3)
    universe = PlayerUniverse(3, 3)
    cfg = TernaryRevenueConfig(similarity=similarity)
    bits = np.arange(1 << 6, dtype=np.uint64)
    batch = coalition_revenues(bits, universe, visual, question, answer, g, cfg)
    scalar = [coalition_revenue(Coalition(int(b), 6), universe, visual, question, answer, g, cfg) for b in bits]
    np.testing.assert_allclose(batch, scalar, rtol=1e-12, atol=1e-12)


def test_one_plus_one_game_has_four_coalitions():
    visual, question, answer, g = _random_inputs(4, n_v=1, n_q=1)
    game = build_characteristic_game(visual, question, answer, g)
    table = game.table()
    assert table.shape == (4,)
    assert table[:3].tolist() == [0.0, 0.0, 0.0]
    assert table[3] == pytest.approx(pair_revenue(visual[0], question[0], answer, g), abs=1e-12)


def test_duplicated_visual_tokens_are_interchangeable():
    visual, question, answer, g = _random_inputs(5, n_v=3, n_q=2)
    tokens = visual.tokens.copy()
    tokens[1] = tokens[0]
    game = build_characteristic_game(TokenSet(tokens), question, answer, g)
    table = game.table()
    for bits in range(1 << 5):
        low = bits & 0b11
        swapped = bits if low in (0, 3) else bits ^ 0b11
        assert table[bits] == pytest.approx(table[swapped], abs=1e-15)


def test_orthogonal_construction_gives_zero_game_and_matrix():
    visual = TokenSet([[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0]])
    question = TokenSet([[0.0, 1.0, 0.0, 0.0], [0.0, 3.0, 0.0, 0.0]])
    answer = AnswerEmbedding([0.0, 0.0, 1.0, 0.0])
    g = ProjectionG.left_identity(4, 4)
    game = build_characteristic_game(visual, question, answer, g)
    assert not game.table().any()
    matrix = interaction_matrix(game, game.universe, 'banzhaf', Estimator.exact())
    assert not matrix.data.any()


def test_cosine_revenue_is_scale_invariant():
    for seed in range(10):
        visual, question, answer, g = _random_inputs(seed, n_v=3, n_q=3)
        base = build_characteristic_game(visual, question, answer, g).table()
        scaled = build_characteristic_game(visual.scaled(7.3), question.scaled(7.3), answer.scaled(7.3), g).table()
        np.testing.assert_allclose(scaled, base, rtol=0, atol=1e-12)


def test_planted_pairs_maximise_pair_revenue():
    rng = np.random.default_rng(8)
    dim = 32
    for _ in range(20):
        question = rng.standard_normal((4, dim))
        question /= np.linalg.norm(question, axis=1, keepdims=True)
        visual = question + rng.normal(0.0, 0.05, size=question.shape)
        answer = AnswerEmbedding(rng.standard_normal(dim))
        # second term depends only on the visual token
        g = ProjectionG.left_identity(dim, dim)
        for a in range(4):
            scores = [pair_revenue(visual[a], q, answer, g) for q in question]
            assert int(np.argmax(scores)) == a


def test_game_rejects_mismatched_projection():
    visual, question, answer, _ = _random_inputs(0)
    with pytest.raises(ShapeError):
        build_characteristic_game(visual, question, answer, ProjectionG.left_identity(4, 3))
