"""
Console summaries printed after each command.
"""

import numpy as np


def print_guidance_report(guidance):
    """Summarize the teacher matrix"""
    raw = guidance.raw.data
    print('\n=== TEACHER GUIDANCE MATRIX ===\n')
    print(f'Method: {guidance.raw.method} ({guidance.raw.estimator.kind})')
    print(f'Shape: {raw.shape[0]} visual x {raw.shape[1]} question')
    print(f'Temperature: {guidance.temperature}')
    print(f'Raw interaction range: {raw.min():.6f} to {raw.max():.6f}')
    print(f'Row argmax: {raw.argmax(axis=1).tolist()}')
    row_sums = guidance.normalized.sum(axis=1)
    print(f'Max row-sum deviation: {np.max(np.abs(row_sums - 1.0)):.2e}')


def print_merge_report(metadata):
    """Summarize one merge run"""
    print('\n=== TOKEN MERGE ===\n')
    print(f'Strategy: {metadata["strategy"]}')
    print(f'Tokens: {metadata["input_count"]} -> {metadata["target_count"]}')
    print(f'Centers: {metadata["centers"]}')


def print_loss_report(report, grad_check=None):
    """Summarize the objective"""
    print('\n=== LOSSES ===\n')
    print(f'L_vqa: {report.l_vqa:.6f}')
    print(f'L_TG: {report.l_tg:.6f}')
    print(f'alpha: {report.alpha}')
    print(f'Total: {report.total:.6f}')
    if grad_check is not None:
        print(f'Gradient check max-abs diff: {grad_check:.3e}')


def print_ablation_report(alignment, cluster):
    """Print the alignment and cluster strategy tables"""
    print('\n=== ALIGNMENT STRATEGY ===\n')
    print(alignment.to_string(index=False, float_format=lambda x: f'{x:.4f}'))
    print('\n=== CLUSTER STRATEGY ===\n')
    print(cluster.to_string(index=False, float_format=lambda x: f'{x:.4f}'))
