"""
Temporal context encoding: a 1-D convolution along the token axis.
Zero padding and stride 1 keep the token count unchanged.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from data_collection.tokens import TokenSet
from game_core.errors import ConfigError, NonFiniteError, ShapeError


@dataclass(frozen=True, eq=False)
class ConvKernel:
    """Odd-length taps, shared across channels (L,) or per channel (L, dim)"""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim not in (1, 2) or taps.shape[0] < 1:
            raise ConfigError(f'kernel taps must be (L,) or (L, dim), got shape {taps.shape}')
        if taps.shape[0] % 2 == 0:
            raise ConfigError(f'kernel needs an odd number of taps, got {taps.shape[0]}')
        if not np.isfinite(taps).all():
            raise NonFiniteError('kernel taps contain NaN or infinite entries')
        taps.setflags(write=False)
        object.__setattr__(self, 'taps', taps)

    @classmethod
    def identity(cls, length=3):
        taps = np.zeros(length)
        taps[length // 2] = 1.0
        return cls(taps)

    @classmethod
    def from_dict(cls, payload):
        """Kernel from the matrix JSON format: rows = taps, cols = 1 (shared) or dim."""
        taps = np.array(payload['weights'], dtype=np.float64)
        if taps.shape != (payload['rows'], payload['cols']):
            raise ShapeError(f'declared shape ({payload["rows"]}, {payload["cols"]}) but taps are {taps.shape}')
        return cls(taps[:, 0] if taps.shape[1] == 1 else taps)

    @property
    def length(self):
        return self.taps.shape[0]

    @property
    def shared(self):
        return self.taps.ndim == 1

    def to_dict(self):
        taps = self.taps[:, None] if self.shared else self.taps
        return {'rows': taps.shape[0], 'cols': taps.shape[1], 'weights': taps.tolist()}


def temporal_conv1d(tokens, kernel):
    """out[t] = sum_m taps[m] * in[t + m - L//2], with zeros outside the sequence."""
    x = tokens.tokens
    if kernel.shared:
        out = correlate1d(x, kernel.taps, axis=0, mode='constant', cval=0.0)
    else:
        if kernel.taps.shape[1] != tokens.dim:
            raise ShapeError(f'per-channel kernel has {kernel.taps.shape[1]} channels, tokens have {tokens.dim}')
        out = np.column_stack([
            correlate1d(x[:, c], kernel.taps[:, c], mode='constant', cval=0.0) for c in range(tokens.dim)
        ])
    return TokenSet(out)
