"""
Semantic fusion: cross-attention from sparse tokens onto the enhanced token sequence.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from data_collection.tokens import TokenSet
from game_core.errors import ArgumentError, NonFiniteError, ShapeError


PROJECTION_NAMES = ('query', 'key', 'value')


def _matrix(payload, name):
    weights = np.array(payload['weights'], dtype=np.float64)
    if weights.shape != (payload['rows'], payload['cols']):
        raise ShapeError(
            f'{name}: declared shape ({payload["rows"]}, {payload["cols"]}) but weights are {weights.shape}'
        )
    if not np.isfinite(weights).all():
        raise NonFiniteError(f'{name} projection contains NaN or infinite entries')
    return weights


@dataclass(frozen=True, eq=False)
class AttentionProjections:
    """Optional query/key/value matrices; None means identity"""

    query: np.ndarray = None
    key: np.ndarray = None
    value: np.ndarray = None

    @classmethod
    def from_dict(cls, payload):
        """{"query": M, "key": M, "value": M} with each M in the matrix JSON format; any may be omitted."""
        unknown = sorted(set(payload) - set(PROJECTION_NAMES))
        if unknown:
            raise ArgumentError(f'unknown attention projections: {", ".join(unknown)}')
        return cls(**{name: _matrix(payload[name], name) for name in PROJECTION_NAMES if name in payload})

    def to_dict(self):
        payload = {}
        for name in PROJECTION_NAMES:
            matrix = getattr(self, name)
            if matrix is not None:
                matrix = np.asarray(matrix, dtype=np.float64)
                payload[name] = {'rows': matrix.shape[0], 'cols': matrix.shape[1], 'weights': matrix.tolist()}
        return payload

    @staticmethod
    def _project(matrix, tokens):
        if matrix is None:
            return tokens
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[1] != tokens.shape[1]:
            raise ShapeError(f'projection expects dim {matrix.shape[1]}, tokens have dim {tokens.shape[1]}')
        return tokens @ matrix.T

    def queries(self, tokens):
        return self._project(self.query, tokens)

    def keys(self, tokens):
        return self._project(self.key, tokens)

    def values(self, tokens):
        return self._project(self.value, tokens)


def cross_attention_fuse(sparse, enhanced, scale=None, projections=None):
    """Each sparse token attends over the enhanced tokens: softmax(scale * <s, v>) @ v."""
    if enhanced is None or len(enhanced) == 0:
        raise ArgumentError('cross-attention needs at least one enhanced token')
    if sparse.dim != enhanced.dim:
        raise ShapeError(f'sparse dim {sparse.dim} and enhanced dim {enhanced.dim} differ')
    projections = projections or AttentionProjections()
    queries = projections.queries(sparse.tokens)
    keys = projections.keys(enhanced.tokens)
    if queries.shape[1] != keys.shape[1]:
        raise ShapeError(f'query dim {queries.shape[1]} and key dim {keys.shape[1]} differ')
    scale = 1.0 / np.sqrt(keys.shape[1]) if scale is None else scale
    if not scale > 0:
        raise ArgumentError(f'attention scale must be positive, got {scale}')
    weights = softmax(scale * queries @ keys.T, axis=1)
    return TokenSet(weights @ projections.values(enhanced.tokens))
