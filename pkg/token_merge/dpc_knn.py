"""
Sparse token generation by density-peaks clustering with kNN density (DPC-KNN),
plus the random and temporal clustering strategies used for ablation.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from game_core.errors import ArgumentError, ConfigError

logger = logging.getLogger(__name__)

DEFAULT_K_NEIGHBORS = 5


class MergeStrategy(str, Enum):
    DPCKNN = 'dpcknn'
    RANDOM = 'random'
    TEMPORAL = 'temporal'


@dataclass(frozen=True)
class MergeConfig:
    """Target token count and clustering strategy for one modality"""

    target_count: int
    k_neighbors: int = DEFAULT_K_NEIGHBORS
    strategy: MergeStrategy = MergeStrategy.DPCKNN
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, 'strategy', MergeStrategy(self.strategy))
        except ValueError:
            raise ConfigError(f'unknown merge strategy {self.strategy!r}') from None
        if self.target_count < 1:
            raise ConfigError(f'target_count must be at least 1, got {self.target_count}')
        if self.k_neighbors < 1:
            raise ConfigError(f'k_neighbors must be at least 1, got {self.k_neighbors}')

    def to_dict(self):
        return {
            'target_count': self.target_count,
            'k_neighbors': self.k_neighbors,
            'strategy': self.strategy.value,
            'seed': self.seed,
        }


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Selected center tokens, the center each token belongs to, and per-token scores"""

    centers: np.ndarray
    labels: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if not np.isin(labels, centers).all():
            raise ArgumentError('every label must point at a selected center')
        if (labels[centers] != centers).any():
            raise ArgumentError('each center must be labelled with itself')
        object.__setattr__(self, 'centers', centers)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'scores', np.asarray(self.scores, dtype=np.float64))

    def members(self, center):
        return np.flatnonzero(self.labels == center)

    def to_dict(self):
        return {'centers': self.centers.tolist(), 'labels': self.labels.tolist()}


def _ranked(values):
    """Indices by descending value, lower index first on ties."""
    return np.lexsort((np.arange(len(values)), -values))


def _check_target(tokens, target_count):
    if target_count > len(tokens):
        raise ArgumentError(f'target_count {target_count} exceeds the {len(tokens)} input tokens')


def local_density(distances, k):
    """rho_i = exp(-mean squared distance to the k nearest other tokens)."""
    n = distances.shape[0]
    k = min(k, n - 1)
    if k == 0:
        return np.ones(n)
    # column 0 of each sorted row is the token itself
    nearest = np.sort(distances, axis=1)[:, 1:k + 1]
    return np.exp(-np.mean(nearest ** 2, axis=1))


def peak_distance(distances, rho):
    """delta_i = distance to the nearest token ranked denser; the densest gets the max distance."""
    order = _ranked(rho)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    denser = rank[None, :] < rank[:, None]
    delta = np.where(denser, distances, np.inf).min(axis=1)
    delta[order[0]] = distances.max()
    return delta


def assign_to_centers(distances, centers):
    """Label every token with its nearest center; centers keep themselves."""
    centers = np.sort(np.asarray(centers, dtype=np.int64))
    labels = centers[np.argmin(distances[:, centers], axis=1)]
    labels[centers] = centers
    return labels


def dpc_knn_cluster(tokens, cfg):
    """Pick target_count density peaks by gamma = rho * delta and assign the rest."""
    _check_target(tokens, cfg.target_count)
    distances = cdist(tokens.tokens, tokens.tokens)
    rho = local_density(distances, cfg.k_neighbors)
    delta = peak_distance(distances, rho)
    gamma = rho * delta
    centers = np.sort(_ranked(gamma)[:cfg.target_count])
    labels = assign_to_centers(distances, centers)
    logger.debug('dpc-knn picked centers %s from %d tokens', centers.tolist(), len(tokens))
    return ClusterAssignment(centers, labels, gamma)


def random_cluster(tokens, cfg):
    """Seeded random centers, nearest-center assignment."""
    _check_target(tokens, cfg.target_count)
    rng = np.random.default_rng(cfg.seed)
    centers = np.sort(rng.choice(len(tokens), size=cfg.target_count, replace=False))
    distances = cdist(tokens.tokens, tokens.tokens)
    return ClusterAssignment(centers, assign_to_centers(distances, centers), np.zeros(len(tokens)))


def temporal_cluster(tokens, cfg):
    """Contiguous index blocks of (near) equal size; each block's first token is its center."""
    _check_target(tokens, cfg.target_count)
    blocks = np.array_split(np.arange(len(tokens)), cfg.target_count)
    centers = np.array([block[0] for block in blocks], dtype=np.int64)
    labels = np.concatenate([np.full(len(block), block[0]) for block in blocks])
    return ClusterAssignment(centers, labels, np.zeros(len(tokens)))


CLUSTERERS = {
    MergeStrategy.DPCKNN: dpc_knn_cluster,
    MergeStrategy.RANDOM: random_cluster,
    MergeStrategy.TEMPORAL: temporal_cluster,
}


def cluster_tokens(tokens, cfg):
    return CLUSTERERS[cfg.strategy](tokens, cfg)
