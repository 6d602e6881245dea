"""
Coalitions of token players encoded as fixed-width bitmasks.
Bit k set means player k is a member of the coalition.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from game_core.errors import ArgumentError, CapacityError

# Widest coalition a 64-bit mask can hold
MAX_PLAYERS = 64

# 2^24 memoized payoffs is about 128 MB of float64
EXACT_PLAYER_LIMIT = 24


class PlayerRole(str, Enum):
    """Modality a player token comes from"""

    VISUAL = 'visual'
    QUESTION = 'question'


def check_exact_capacity(n_players):
    """Raise CapacityError when exhaustive enumeration is out of reach."""
    if n_players > EXACT_PLAYER_LIMIT:
        raise CapacityError(
            f'exact enumeration supports at most {EXACT_PLAYER_LIMIT} players, got {n_players}; '
            f'use the sampled estimator'
        )


def _check_player_count(n):
    if not 1 <= n <= MAX_PLAYERS:
        raise ArgumentError(f'player count must be in 1..{MAX_PLAYERS}, got {n}')


@dataclass(frozen=True)
class Coalition:
    """A subset of the player universe {0, ..., n-1}"""

    bits: int
    n: int

    def __post_init__(self):
        _check_player_count(self.n)
        if self.bits < 0 or self.bits >> self.n:
            raise ArgumentError(f'coalition bits {self.bits:#x} exceed a universe of {self.n} players')

    @classmethod
    def empty(cls, n):
        return cls(0, n)

    @classmethod
    def from_players(cls, players, n):
        """Build a coalition from an iterable of player indices."""
        bits = 0
        for player in players:
            if not 0 <= player < n:
                raise ArgumentError(f'player {player} outside universe of {n} players')
            bits |= 1 << player
        return cls(bits, n)

    def _check_player(self, player):
        if not 0 <= player < self.n:
            raise ArgumentError(f'player {player} outside universe of {self.n} players')

    def _check_same_universe(self, other):
        if other.n != self.n:
            raise ArgumentError(f'coalitions over different universes ({self.n} vs {other.n} players)')

    def contains(self, player):
        self._check_player(player)
        return bool(self.bits >> player & 1)

    def add(self, player):
        self._check_player(player)
        return Coalition(self.bits | 1 << player, self.n)

    def remove(self, player):
        self._check_player(player)
        return Coalition(self.bits & ~(1 << player), self.n)

    def union(self, other):
        self._check_same_universe(other)
        return Coalition(self.bits | other.bits, self.n)

    def is_subset(self, other):
        self._check_same_universe(other)
        return self.bits & ~other.bits == 0

    @property
    def size(self):
        return self.bits.bit_count()

    def players(self):
        """Member indices in ascending order."""
        return tuple(k for k in range(self.n) if self.bits >> k & 1)

    def __contains__(self, player):
        return self.contains(player)

    def __len__(self):
        return self.size


@dataclass(frozen=True)
class PlayerUniverse:
    """Visual players 0..n_visual-1 followed by question players, contiguously.

    The answer embedding is fixed context of the revenue function and never a player.
    """

    n_visual: int
    n_question: int

    def __post_init__(self):
        if self.n_visual < 0 or self.n_question < 0:
            raise ArgumentError('player counts must be non-negative')
        _check_player_count(self.n_players)

    @property
    def n_players(self):
        return self.n_visual + self.n_question

    @property
    def roles(self):
        return (PlayerRole.VISUAL,) * self.n_visual + (PlayerRole.QUESTION,) * self.n_question

    def visual_player(self, index):
        if not 0 <= index < self.n_visual:
            raise ArgumentError(f'visual token {index} outside 0..{self.n_visual - 1}')
        return index

    def question_player(self, index):
        if not 0 <= index < self.n_question:
            raise ArgumentError(f'question token {index} outside 0..{self.n_question - 1}')
        return self.n_visual + index

    @property
    def visual_bits(self):
        return (1 << self.n_visual) - 1

    @property
    def question_bits(self):
        return ((1 << self.n_question) - 1) << self.n_visual


def subset_masks(excluded_bits, n):
    """All subsets of the universe minus ``excluded_bits`` as ascending uint64 masks.

    Counting k = 0, 1, ... and depositing the bits of k into the free positions is
    monotone, so the masks come out sorted.
    """
    _check_player_count(n)
    check_exact_capacity(n)
    free = [k for k in range(n) if not excluded_bits >> k & 1]
    counter = np.arange(1 << len(free), dtype=np.uint64)
    masks = np.zeros_like(counter)
    for slot, position in enumerate(free):
        masks |= ((counter >> np.uint64(slot)) & np.uint64(1)) << np.uint64(position)
    return masks


def enumerate_subsets(excluded, n):
    """Yield every coalition of the universe minus ``excluded`` once, ascending by bits."""
    if excluded.n != n:
        raise ArgumentError(f'excluded coalition is over {excluded.n} players, universe has {n}')
    for bits in subset_masks(excluded.bits, n):
        yield Coalition(int(bits), n)


def membership_matrix(bits, n):
    """Boolean (len(bits), n) matrix; row r marks the members of coalition bits[r]."""
    bits = np.asarray(bits, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    return ((bits[:, None] >> shifts[None, :]) & np.uint64(1)).astype(bool)
