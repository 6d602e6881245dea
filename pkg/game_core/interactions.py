"""
Pairwise interaction indices (Banzhaf and Shapley) and the bipartite interaction matrix.
Exact values enumerate every coalition of the remaining players; sampled values
average the same bracket over random coalitions.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from joblib import Parallel, delayed
from scipy.special import comb

from game_core.coalitions import check_exact_capacity, subset_masks
from game_core.errors import ArgumentError

logger = logging.getLogger(__name__)


class InteractionMethod(str, Enum):
    BANZHAF = 'banzhaf'
    SHAPLEY = 'shapley'


@dataclass(frozen=True)
class Estimator:
    """Exact enumeration, or Monte-Carlo sampling with a fixed budget and seed"""

    kind: str = 'exact'
    num_samples: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ('exact', 'sampled'):
            raise ArgumentError(f'unknown estimator kind {self.kind!r}')
        if self.kind == 'sampled' and self.num_samples < 1:
            raise ArgumentError(f'num_samples must be at least 1, got {self.num_samples}')
        if self.seed < 0:
            raise ArgumentError(f'seed must be non-negative, got {self.seed}')

    @classmethod
    def exact(cls):
        return cls('exact')

    @classmethod
    def sampled(cls, num_samples, seed):
        return cls('sampled', num_samples, seed)

    @property
    def is_exact(self):
        return self.kind == 'exact'

    def to_dict(self):
        if self.is_exact:
            return {'kind': 'exact'}
        return {'kind': 'sampled', 'num_samples': self.num_samples, 'seed': self.seed}


@dataclass(frozen=True)
class SampledEstimate:
    value: float
    std_error: float
    num_samples: int


@dataclass(frozen=True)
class InteractionMatrix:
    """Interaction index for every (visual player, question player) pair"""

    data: np.ndarray
    method: str
    estimator: Estimator

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ArgumentError(f'interaction matrix must be 2-D, got shape {data.shape}')
        if not np.isfinite(data).all():
            raise ArgumentError('interaction matrix contains non-finite entries')
        object.__setattr__(self, 'data', data)

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def to_dict(self):
        return {
            'rows': self.rows,
            'cols': self.cols,
            'data': self.data.tolist(),
            'method': self.method,
            'estimator': self.estimator.to_dict(),
        }


def _check_pair(game, i, j):
    n = game.n_players
    if i == j:
        raise ArgumentError(f'interaction needs two distinct players, got ({i}, {j})')
    for player in (i, j):
        if not 0 <= player < n:
            raise ArgumentError(f'player {player} outside universe of {n} players')


def _brackets(values, coalitions, i, j):
    """R(C+i+j) + R(C) - R(C+i) - R(C+j), grouped so swapping i and j is exact."""
    bit_i = np.uint64(1 << i)
    bit_j = np.uint64(1 << j)
    joint = values(coalitions | bit_i | bit_j) + values(coalitions)
    single = values(coalitions | bit_i) + values(coalitions | bit_j)
    return joint - single


def _shapley_weights(n, coalitions):
    # |C|!(n-|C|-2)!/(n-1)! == 1 / ((n-1) * C(n-2, |C|))
    sizes = np.bitwise_count(coalitions).astype(np.float64)
    return 1.0 / ((n - 1) * comb(n - 2, sizes))


def _table_lookup(game):
    table = game.table()
    return lambda bits: table[bits]


def banzhaf_interaction_exact(game, i, j):
    """Banzhaf interaction of players i and j, every coalition weighted 1/2^(n-2)."""
    _check_pair(game, i, j)
    n = game.n_players
    check_exact_capacity(n)
    coalitions = subset_masks(1 << i | 1 << j, n)
    brackets = _brackets(_table_lookup(game), coalitions, i, j)
    return math.fsum(brackets.tolist()) / 2.0 ** (n - 2)


def shapley_interaction_exact(game, i, j):
    """Shapley interaction of players i and j with positional weights."""
    _check_pair(game, i, j)
    n = game.n_players
    check_exact_capacity(n)
    coalitions = subset_masks(1 << i | 1 << j, n)
    brackets = _brackets(_table_lookup(game), coalitions, i, j)
    return math.fsum((_shapley_weights(n, coalitions) * brackets).tolist())


def _free_positions(n, i, j):
    return np.array([k for k in range(n) if k not in (i, j)], dtype=np.uint64)


def _pack(included, free):
    """Collapse a (samples, free) inclusion matrix into uint64 masks."""
    if free.size == 0:
        return np.zeros(included.shape[0], dtype=np.uint64)
    return (included.astype(np.uint64) << free[None, :]).sum(axis=1, dtype=np.uint64)


def _sample_banzhaf_coalitions(rng, free, num_samples):
    # every free player joins independently with probability 1/2
    included = rng.random((num_samples, free.size)) < 0.5
    return _pack(included, free)


def _sample_shapley_coalitions(rng, free, num_samples):
    # size uniform on 0..n-2, then a uniform subset of that size
    sizes = rng.integers(0, free.size + 1, size=num_samples)
    keys = rng.random((num_samples, free.size))
    ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
    return _pack(ranks < sizes[:, None], free)


def estimate_interaction(game, i, j, method, num_samples, seed):
    """Monte-Carlo interaction estimate with its empirical standard error."""
    _check_pair(game, i, j)
    if num_samples < 1:
        raise ArgumentError(f'num_samples must be at least 1, got {num_samples}')
    method = InteractionMethod(method)
    rng = np.random.default_rng(seed)
    free = _free_positions(game.n_players, i, j)
    if method is InteractionMethod.BANZHAF:
        coalitions = _sample_banzhaf_coalitions(rng, free, num_samples)
    else:
        coalitions = _sample_shapley_coalitions(rng, free, num_samples)
    values = _table_lookup(game) if game.is_tabulated else game.values
    brackets = _brackets(values, coalitions, i, j)
    mean = math.fsum(brackets.tolist()) / num_samples
    if num_samples > 1:
        std_error = float(np.std(brackets, ddof=1)) / math.sqrt(num_samples)
    else:
        std_error = math.inf
    return SampledEstimate(mean, std_error, num_samples)


def banzhaf_interaction_sampled(game, i, j, num_samples, seed):
    """Unbiased sampled estimate of the Banzhaf interaction."""
    return estimate_interaction(game, i, j, InteractionMethod.BANZHAF, num_samples, seed).value


def shapley_interaction_sampled(game, i, j, num_samples, seed):
    """Unbiased sampled estimate of the Shapley interaction."""
    return estimate_interaction(game, i, j, InteractionMethod.SHAPLEY, num_samples, seed).value


def pair_interaction(game, i, j, method, estimator, entry_seed=None):
    """Dispatch one pair to the chosen index and estimator."""
    method = InteractionMethod(method)
    if estimator.is_exact:
        if method is InteractionMethod.BANZHAF:
            return banzhaf_interaction_exact(game, i, j)
        return shapley_interaction_exact(game, i, j)
    seed = estimator.seed if entry_seed is None else entry_seed
    return estimate_interaction(game, i, j, method, estimator.num_samples, seed).value


def interaction_matrix(game, universe, method, estimator, threads=1):
    """Interaction between every visual player (rows) and question player (cols)."""
    method = InteractionMethod(method)
    if universe.n_visual < 1 or universe.n_question < 1:
        raise ArgumentError('interaction matrix needs at least one visual and one question player')
    if universe.n_players != game.n_players:
        raise ArgumentError(
            f'universe has {universe.n_players} players but the game has {game.n_players}'
        )
    if estimator.is_exact:
        check_exact_capacity(game.n_players)
        game.table()

    def entry(a, b):
        # per-entry streams keep sampled output independent of scheduling
        entry_seed = None if estimator.is_exact else [estimator.seed, a, b]
        return pair_interaction(
            game, universe.visual_player(a), universe.question_player(b), method, estimator, entry_seed
        )

    pairs = [(a, b) for a in range(universe.n_visual) for b in range(universe.n_question)]
    values = Parallel(n_jobs=max(1, threads), prefer='threads')(delayed(entry)(a, b) for a, b in pairs)
    data = np.array(values, dtype=np.float64).reshape(universe.n_visual, universe.n_question)
    logger.info(
        '%s %s matrix %dx%d over %d players',
        estimator.kind, method.value, universe.n_visual, universe.n_question, game.n_players,
    )
    return InteractionMatrix(data, method.value, estimator)
