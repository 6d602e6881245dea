"""
Synthetic token generation with planted visual-question alignments.
All randomness comes from numpy's PCG64 generator seeded by the spec.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np

from alignment.revenue import ProjectionG
from data_collection.tokens import AnswerEmbedding, TokenSet
from game_core.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticSpec:
    n_visual: int
    n_question: int
    dim: int = 64
    noise_std: float = 0.05
    planted: str = 'diagonal'
    seed: int = 0
    num_answers: int = 10

    def __post_init__(self):
        if self.planted not in ('diagonal', 'random', 'none'):
            raise ConfigError(f'planted must be diagonal, random or none, got {self.planted!r}')
        if self.n_visual < 1 or self.n_question < 1 or self.dim < 1:
            raise ConfigError('synthetic token counts and dim must be at least 1')
        if self.noise_std < 0:
            raise ConfigError(f'noise_std must be non-negative, got {self.noise_std}')
        if self.planted == 'diagonal' and self.n_visual != self.n_question:
            raise ConfigError(
                f'diagonal planting needs equal counts, got {self.n_visual} visual and {self.n_question} question'
            )
        if self.num_answers < 1:
            raise ConfigError(f'num_answers must be at least 1, got {self.num_answers}')

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SyntheticBundle:
    visual: TokenSet
    question: TokenSet
    answer: AnswerEmbedding
    projection: ProjectionG
    planted: np.ndarray | None
    label: int


def _unit_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def synth_generate(spec):
    """Unit-normalized question tokens, noisy visual copies, mean-question answer, random G."""
    rng = np.random.default_rng(spec.seed)
    question = _unit_rows(rng.standard_normal((spec.n_question, spec.dim)))
    if spec.planted == 'diagonal':
        planted = np.arange(spec.n_visual)
    elif spec.planted == 'random':
        planted = rng.integers(0, spec.n_question, size=spec.n_visual)
    else:
        planted = None
    if planted is None:
        visual = _unit_rows(rng.standard_normal((spec.n_visual, spec.dim)))
    else:
        noise = rng.normal(0.0, spec.noise_std, size=(spec.n_visual, spec.dim))
        visual = _unit_rows(question[planted] + noise)
    answer = question.mean(axis=0)
    answer = answer / np.linalg.norm(answer)
    projection = ProjectionG.random(spec.dim, 2 * spec.dim, seed=int(rng.integers(2**63)))
    label = int(rng.integers(spec.num_answers))
    logger.info('synthesized %d visual x %d question tokens (%s planting)', spec.n_visual, spec.n_question,
                spec.planted)
    return SyntheticBundle(TokenSet(visual), TokenSet(question), AnswerEmbedding(answer), projection, planted,
                           label)
