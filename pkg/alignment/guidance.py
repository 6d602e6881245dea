"""
Teacher guidance matrix and student similarity prediction.
Both are row-normalized with a temperature softmax before distillation.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from alignment.revenue import TernaryRevenueConfig, build_characteristic_game, pair_revenue, rowwise_similarity
from game_core.errors import ConfigError, DegenerateInputError, NonFiniteError, ShapeError
from game_core.interactions import Estimator, InteractionMatrix, interaction_matrix

logger = logging.getLogger(__name__)

# banzhaf/shapley run the ternary game; pairwise is the fully-connected baseline
ALIGNMENT_METHODS = ('banzhaf', 'shapley', 'pairwise')


def check_temperature(tau):
    if not tau > 0:
        raise ConfigError(f'temperature must be positive, got {tau}')


def row_softmax(matrix, tau):
    """exp(m_ij / tau) / sum_k exp(m_ik / tau), stabilised by max subtraction."""
    check_temperature(tau)
    matrix = np.asarray(matrix, dtype=np.float64)
    if not np.isfinite(matrix).all():
        raise NonFiniteError('cannot normalize a matrix with non-finite entries')
    return softmax(matrix / tau, axis=1)


def _matrix_payload(data, method, tau, normalized):
    return {
        'rows': int(data.shape[0]),
        'cols': int(data.shape[1]),
        'data': data.tolist(),
        'method': method,
        'temperature': tau,
        'normalized': normalized,
    }


@dataclass(frozen=True, eq=False)
class GuidanceMatrix:
    """Teacher signal: raw interaction matrix and its row-stochastic form"""

    raw: InteractionMatrix
    normalized: np.ndarray
    temperature: float

    @property
    def shape(self):
        return self.normalized.shape

    def to_dict(self, normalized=True):
        data = self.normalized if normalized else self.raw.data
        return _matrix_payload(data, self.raw.method, self.temperature, normalized)


@dataclass(frozen=True, eq=False)
class StudentPrediction:
    """Student signal: cosine similarities between sparse visual and question tokens"""

    logits: np.ndarray
    normalized: np.ndarray
    temperature: float

    @property
    def shape(self):
        return self.normalized.shape

    def to_dict(self, normalized=True):
        data = self.normalized if normalized else self.logits
        return _matrix_payload(data, 'cosine', self.temperature, normalized)


def pairwise_revenue_matrix(visual, question, answer, g, cfg=None):
    """Revenue of every (v_a, q_b) pair with no coalition context."""
    data = [[pair_revenue(v, q, answer, g, cfg) for q in question.tokens] for v in visual.tokens]
    return np.array(data, dtype=np.float64)


def teacher_matrix(visual, question, answer, g, cfg=None, method='banzhaf', estimator=None, tau=0.1,
                   threads=1):
    """Guidance matrix from the ternary game (or the pairwise baseline)."""
    cfg = cfg or TernaryRevenueConfig()
    estimator = estimator or Estimator.exact()
    check_temperature(tau)
    if method not in ALIGNMENT_METHODS:
        raise ConfigError(f'unknown alignment method {method!r}; expected one of {", ".join(ALIGNMENT_METHODS)}')
    if method == 'pairwise':
        raw = InteractionMatrix(pairwise_revenue_matrix(visual, question, answer, g, cfg), method, estimator)
    else:
        game = build_characteristic_game(visual, question, answer, g, cfg, exact=estimator.is_exact)
        raw = interaction_matrix(game, game.universe, method, estimator, threads=threads)
    logger.info('teacher %s matrix %dx%d at tau=%g', method, raw.rows, raw.cols, tau)
    return GuidanceMatrix(raw, row_softmax(raw.data, tau), tau)


def cosine_matrix(visual, question):
    """logits_ij = cosine(v_i, q_j)."""
    if visual.dim != question.dim:
        raise ShapeError(f'visual dim {visual.dim} and question dim {question.dim} differ')
    v_norms = np.linalg.norm(visual.tokens, axis=1)
    q_norms = np.linalg.norm(question.tokens, axis=1)
    if not ((v_norms > 0).all() and (q_norms > 0).all()):
        raise DegenerateInputError('student similarity needs non-zero token norms')
    rows = np.repeat(visual.tokens, len(question), axis=0)
    cols = np.tile(question.tokens, (len(visual), 1))
    return rowwise_similarity(rows, cols).reshape(len(visual), len(question))


def student_matrix(visual, question, tau=0.1):
    """Row-normalized cosine similarity prediction."""
    logits = cosine_matrix(visual, question)
    return StudentPrediction(logits, row_softmax(logits, tau), tau)


def student_from_logits(logits, tau):
    logits = np.asarray(logits, dtype=np.float64)
    return StudentPrediction(logits, row_softmax(logits, tau), tau)
