"""
Token merge network: temporal encoding, sparse token generation, semantic fusion.
"""

import logging
from dataclasses import dataclass

import numpy as np

from data_collection.tokens import TokenSet
from game_core.errors import ArgumentError
from token_merge.dpc_knn import ClusterAssignment, cluster_tokens
from token_merge.fusion import cross_attention_fuse
from token_merge.temporal_conv import temporal_conv1d

logger = logging.getLogger(__name__)


def merge_tokens(tokens, assignment):
    """One mean token per cluster, ordered by ascending center index."""
    if len(assignment.labels) != len(tokens):
        raise ArgumentError(f'assignment covers {len(assignment.labels)} tokens, input has {len(tokens)}')
    merged = [tokens.tokens[assignment.members(center)].mean(axis=0) for center in np.sort(assignment.centers)]
    return TokenSet(np.array(merged))


@dataclass(frozen=True, eq=False)
class MergeResult:
    enhanced: TokenSet
    assignment: ClusterAssignment
    sparse: TokenSet
    fused: TokenSet


def run_merge(tokens, kernel, cfg, scale=None, projections=None):
    """Full merge network; ``kernel=None`` skips the temporal convolution."""
    enhanced = tokens if kernel is None else temporal_conv1d(tokens, kernel)
    assignment = cluster_tokens(enhanced, cfg)
    sparse = merge_tokens(enhanced, assignment)
    fused = cross_attention_fuse(sparse, enhanced, scale=scale, projections=projections)
    logger.info('merged %d tokens into %d with %s', len(tokens), len(fused), cfg.strategy.value)
    return MergeResult(enhanced, assignment, sparse, fused)


def merge_pipeline(tokens, kernel, cfg, scale=None, projections=None):
    """Sparse, attention-refined tokens for one modality."""
    return run_merge(tokens, kernel, cfg, scale, projections).fused
