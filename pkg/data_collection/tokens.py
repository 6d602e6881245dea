"""
Token containers for the visual, question and answer modalities.
"""

from dataclasses import dataclass

import numpy as np

from game_core.errors import ArgumentError, DegenerateInputError, NonFiniteError, ShapeError


def _frozen_array(values, ndim, what):
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise ShapeError(f'{what} must be {ndim}-D, got shape {array.shape}')
    if not np.isfinite(array).all():
        raise NonFiniteError(f'{what} contains NaN or infinite entries')
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TokenSet:
    """Ordered embedding vectors of one modality, shape (count, dim)"""

    tokens: np.ndarray

    def __post_init__(self):
        tokens = _frozen_array(self.tokens, 2, 'token matrix')
        if tokens.shape[0] < 1:
            raise ArgumentError('a token set needs at least one token')
        if tokens.shape[1] < 1:
            raise ShapeError('token dimension must be at least 1')
        object.__setattr__(self, 'tokens', tokens)

    @property
    def dim(self):
        return self.tokens.shape[1]

    def __len__(self):
        return self.tokens.shape[0]

    def __getitem__(self, index):
        return self.tokens[index]

    def scaled(self, factor):
        return TokenSet(self.tokens * factor)

    def to_dict(self):
        return {'dim': self.dim, 'tokens': self.tokens.tolist()}


@dataclass(frozen=True, eq=False)
class AnswerEmbedding:
    """The single answer representation; fixed context of the revenue function"""

    vector: np.ndarray

    def __post_init__(self):
        vector = _frozen_array(self.vector, 1, 'answer vector')
        if vector.size < 1:
            raise ShapeError('answer dimension must be at least 1')
        if not np.linalg.norm(vector) > 0:
            raise DegenerateInputError('answer embedding has zero norm')
        object.__setattr__(self, 'vector', vector)

    @classmethod
    def from_token_set(cls, token_set):
        if len(token_set) != 1:
            raise ArgumentError(f'an answer file must hold exactly one token, got {len(token_set)}')
        return cls(token_set.tokens[0])

    @property
    def dim(self):
        return self.vector.size

    def scaled(self, factor):
        return AnswerEmbedding(self.vector * factor)

    def to_dict(self):
        return {'dim': self.dim, 'tokens': [self.vector.tolist()]}
