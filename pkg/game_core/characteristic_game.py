"""
Memoized characteristic functions.
A game maps each coalition bitmask to a finite float64 payoff and caches every value it computes.
"""

import logging

import numpy as np

from game_core.coalitions import (
    EXACT_PLAYER_LIMIT,
    MAX_PLAYERS,
    Coalition,
    check_exact_capacity,
)
from game_core.errors import ArgumentError, NonFiniteError

logger = logging.getLogger(__name__)

# Coalitions evaluated per batch when filling the dense table
TABLE_CHUNK = 1 << 16


class CharacteristicGame:
    """Characteristic function R: Coalition -> payoff with a shared memo.

    ``evaluator`` takes an int bitmask and returns a payoff. ``batch_evaluator``, if
    given, takes a uint64 array of bitmasks and returns an array of payoffs; it is
    preferred whenever several coalitions are needed at once.
    """

    def __init__(self, n_players, evaluator, batch_evaluator=None, universe=None):
        if not 1 <= n_players <= MAX_PLAYERS:
            raise ArgumentError(f'player count must be in 1..{MAX_PLAYERS}, got {n_players}')
        self.n_players = n_players
        self.universe = universe
        self._evaluator = evaluator
        self._batch_evaluator = batch_evaluator
        self._memo = {}
        self._table = None
        self.evaluations = 0

    @classmethod
    def from_table(cls, values):
        """Game whose payoff for coalition bits b is ``values[b]``."""
        values = np.asarray(values, dtype=np.float64)
        n_players = int(values.size).bit_length() - 1
        if values.ndim != 1 or values.size != 1 << n_players:
            raise ArgumentError(f'payoff table length must be a power of two, got {values.size}')
        return cls(n_players, lambda bits: values[bits], lambda bits: values[bits])

    def _evaluate(self, bits):
        """Run the evaluator on uint64 masks that are not memoized yet."""
        if self._batch_evaluator is not None:
            payoffs = np.asarray(self._batch_evaluator(bits), dtype=np.float64)
        else:
            payoffs = np.array([self._evaluator(int(b)) for b in bits], dtype=np.float64)
        bad = ~np.isfinite(payoffs)
        if bad.any():
            culprit = int(bits[np.argmax(bad)])
            raise NonFiniteError(f'payoff of coalition {culprit:#x} is {payoffs[bad][0]}')
        self.evaluations += len(bits)
        return payoffs

    def __call__(self, coalition):
        bits = coalition.bits if isinstance(coalition, Coalition) else int(coalition)
        return float(self.values(np.array([bits], dtype=np.uint64))[0])

    def values(self, bits):
        """Payoffs for an array of coalition masks, memoized."""
        bits = np.asarray(bits, dtype=np.uint64)
        if self._table is not None:
            return self._table[bits]
        unique, inverse = np.unique(bits, return_inverse=True)
        missing = np.array([b for b in unique.tolist() if b not in self._memo], dtype=np.uint64)
        if missing.size:
            self._memo.update(zip(missing.tolist(), self._evaluate(missing).tolist()))
        known = np.array([self._memo[b] for b in unique.tolist()], dtype=np.float64)
        return known[inverse.reshape(bits.shape)]

    def table(self):
        """Dense payoff array over all 2^n coalitions, evaluated once per game."""
        if self._table is None:
            check_exact_capacity(self.n_players)
            size = 1 << self.n_players
            table = np.empty(size, dtype=np.float64)
            for start in range(0, size, TABLE_CHUNK):
                chunk = np.arange(start, min(start + TABLE_CHUNK, size), dtype=np.uint64)
                table[start:start + len(chunk)] = self._evaluate(chunk)
            # earlier answers stay authoritative
            for bits, payoff in self._memo.items():
                table[bits] = payoff
            self._table = table
            self._memo = {}
            logger.debug('evaluated %d coalitions over %d players', size, self.n_players)
        return self._table

    @property
    def is_tabulated(self):
        return self._table is not None

    def __repr__(self):
        mode = 'dense' if self._table is not None else f'{len(self._memo)} memoized'
        exact = 'exact-capable' if self.n_players <= EXACT_PLAYER_LIMIT else 'sampled-only'
        return f'CharacteristicGame(n_players={self.n_players}, {mode}, {exact})'
