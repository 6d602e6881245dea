"""
Ternary revenue function over visual tokens, question tokens and the answer.
A pair earns phi(v, q) + phi(A, G(v, q)); a coalition earns the pair revenue of its
per-modality mean tokens, or a fixed payoff when one modality is missing.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from game_core.characteristic_game import CharacteristicGame
from game_core.coalitions import Coalition, PlayerUniverse, check_exact_capacity, membership_matrix
from game_core.errors import ArgumentError, ConfigError, DegenerateInputError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)


class Similarity(str, Enum):
    COSINE = 'cosine'
    DOT = 'dot'


@dataclass(frozen=True)
class TernaryRevenueConfig:
    """How the revenue function measures similarity and pools coalitions"""

    similarity: Similarity = Similarity.COSINE
    empty_side_payoff: float = 0.0
    aggregation: str = 'mean'

    def __post_init__(self):
        try:
            object.__setattr__(self, 'similarity', Similarity(self.similarity))
        except ValueError:
            raise ConfigError(f'unknown similarity {self.similarity!r}; expected cosine or dot') from None
        if self.aggregation != 'mean':
            raise ConfigError(f'unsupported aggregation {self.aggregation!r}; only mean pooling is defined')
        if not np.isfinite(self.empty_side_payoff):
            raise ConfigError('empty_side_payoff must be finite')

    def to_dict(self):
        return {
            'similarity': self.similarity.value,
            'empty_side_payoff': self.empty_side_payoff,
            'aggregation': self.aggregation,
        }


@dataclass(frozen=True, eq=False)
class ProjectionG:
    """Linear layer projecting concat(v, q) into the answer space"""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        bias = np.array(self.bias, dtype=np.float64)
        if weights.ndim != 2:
            raise ShapeError(f'projection weights must be 2-D, got shape {weights.shape}')
        if bias.shape != (weights.shape[0],):
            raise ShapeError(f'projection bias must have {weights.shape[0]} entries, got shape {bias.shape}')
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise NonFiniteError('projection contains NaN or infinite entries')
        weights.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'bias', bias)

    @classmethod
    def random(cls, dim_answer, dim_in, seed, with_bias=False):
        """Gaussian weights scaled by 1/sqrt(fan_in); zero bias unless requested."""
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(dim_in)
        weights = rng.normal(0.0, scale, size=(dim_answer, dim_in))
        bias = rng.normal(0.0, scale, size=dim_answer) if with_bias else np.zeros(dim_answer)
        return cls(weights, bias)

    @classmethod
    def left_identity(cls, dim_v, dim_q):
        """G(v, q) = v: identity on the visual half, zero on the question half."""
        weights = np.hstack([np.eye(dim_v), np.zeros((dim_v, dim_q))])
        return cls(weights, np.zeros(dim_v))

    @classmethod
    def from_dict(cls, payload):
        rows, cols = payload['rows'], payload['cols']
        projection = cls(payload['weights'], payload.get('bias', [0.0] * rows))
        if projection.weights.shape != (rows, cols):
            raise ShapeError(f'declared shape ({rows}, {cols}) but weights are {projection.weights.shape}')
        return projection

    @property
    def rows(self):
        return self.weights.shape[0]

    @property
    def cols(self):
        return self.weights.shape[1]

    def apply(self, concatenated):
        """Project a batch (m, cols) or a single vector (cols,)."""
        return concatenated @ self.weights.T + self.bias

    def to_dict(self):
        return {
            'rows': self.rows,
            'cols': self.cols,
            'weights': self.weights.tolist(),
            'bias': self.bias.tolist(),
        }


def cosine_similarity(a, b):
    """dot(a, b) / (|a| |b|), clipped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f'cosine similarity of vectors with shapes {a.shape} and {b.shape}')
    norms = np.linalg.norm(a) * np.linalg.norm(b)
    if not norms > 0:
        raise DegenerateInputError('cosine similarity of a zero-norm vector')
    return float(np.clip(np.dot(a, b) / norms, -1.0, 1.0))


def rowwise_similarity(a, b, similarity=Similarity.COSINE):
    """Similarity of matching rows of two (m, d) matrices."""
    dots = np.einsum('ij,ij->i', a, b)
    if Similarity(similarity) is Similarity.DOT:
        return dots
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    if not (norms > 0).all():
        raise DegenerateInputError('cosine similarity of a zero-norm vector')
    return np.clip(dots / norms, -1.0, 1.0)


def _similarity(a, b, similarity):
    if Similarity(similarity) is Similarity.DOT:
        if np.shape(a) != np.shape(b):
            raise ShapeError(f'dot similarity of vectors with shapes {np.shape(a)} and {np.shape(b)}')
        return float(np.dot(a, b))
    return cosine_similarity(a, b)


def check_revenue_shapes(dim_v, dim_q, answer, g):
    if dim_v != dim_q:
        raise ShapeError(f'visual dim {dim_v} and question dim {dim_q} must match for phi(v, q)')
    if g.cols != dim_v + dim_q:
        raise ShapeError(f'projection expects {g.cols} inputs, concat(v, q) has {dim_v + dim_q}')
    if g.rows != answer.dim:
        raise ShapeError(f'projection outputs {g.rows} values, answer space has dim {answer.dim}')


def pair_revenue(v, q, answer, g, cfg=None):
    """phi(v, q) + phi(A, G(concat(v, q)))."""
    cfg = cfg or TernaryRevenueConfig()
    v = np.asarray(v, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    check_revenue_shapes(v.size, q.size, answer, g)
    projected = g.apply(np.concatenate([v, q]))
    if cfg.similarity is Similarity.COSINE and not np.linalg.norm(projected) > 0:
        raise DegenerateInputError('projection G(v, q) has zero norm')
    return _similarity(v, q, cfg.similarity) + _similarity(answer.vector, projected, cfg.similarity)


def coalition_revenue(coalition, universe, visual, question, answer, g, cfg=None):
    """Pair revenue of the coalition's mean visual and mean question token."""
    cfg = cfg or TernaryRevenueConfig()
    if coalition.n != universe.n_players:
        raise ArgumentError(f'coalition is over {coalition.n} players, universe has {universe.n_players}')
    members = coalition.players()
    visual_idx = [k for k in members if k < universe.n_visual]
    question_idx = [k - universe.n_visual for k in members if k >= universe.n_visual]
    if not visual_idx or not question_idx:
        return cfg.empty_side_payoff
    v_bar = np.mean(visual.tokens[visual_idx], axis=0)
    q_bar = np.mean(question.tokens[question_idx], axis=0)
    return pair_revenue(v_bar, q_bar, answer, g, cfg)


def coalition_revenues(bits, universe, visual, question, answer, g, cfg=None):
    """Vectorized coalition_revenue over an array of coalition masks."""
    cfg = cfg or TernaryRevenueConfig()
    members = membership_matrix(bits, universe.n_players).astype(np.float64)
    in_visual = members[:, :universe.n_visual]
    in_question = members[:, universe.n_visual:]
    n_v = in_visual.sum(axis=1)
    n_q = in_question.sum(axis=1)
    payoffs = np.full(len(members), cfg.empty_side_payoff, dtype=np.float64)
    both = (n_v > 0) & (n_q > 0)
    if both.any():
        v_bar = in_visual[both] @ visual.tokens / n_v[both, None]
        q_bar = in_question[both] @ question.tokens / n_q[both, None]
        projected = g.apply(np.hstack([v_bar, q_bar]))
        if cfg.similarity is Similarity.COSINE and not (np.linalg.norm(projected, axis=1) > 0).all():
            raise DegenerateInputError('projection G(v, q) has zero norm for some coalition')
        targets = np.broadcast_to(answer.vector, projected.shape)
        payoffs[both] = (
            rowwise_similarity(v_bar, q_bar, cfg.similarity)
            + rowwise_similarity(targets, projected, cfg.similarity)
        )
    return payoffs


def build_characteristic_game(visual, question, answer, g, cfg=None, exact=True):
    """Memoized ternary game over the visual and question tokens."""
    cfg = cfg or TernaryRevenueConfig()
    check_revenue_shapes(visual.dim, question.dim, answer, g)
    universe = PlayerUniverse(len(visual), len(question))
    if exact:
        check_exact_capacity(universe.n_players)

    def evaluate(bits):
        return coalition_revenue(Coalition(bits, universe.n_players), universe, visual, question, answer, g, cfg)

    def evaluate_batch(bits):
        return coalition_revenues(bits, universe, visual, question, answer, g, cfg)

    logger.debug('ternary game over %d visual + %d question tokens', universe.n_visual, universe.n_question)
    return CharacteristicGame(universe.n_players, evaluate, evaluate_batch, universe=universe)
