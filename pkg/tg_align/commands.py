"""
CLI commands composing ingestion, token merging, the ternary game and the losses.
Every command validates its RunConfig first, computes everything, and only then
writes its artifact.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from sklearn.metrics import adjusted_rand_score

from alignment.answer_head import AnswerHead, answer_forward, predict_answer
from alignment.guidance import student_matrix, teacher_matrix
from alignment.losses import cross_entropy, finite_difference_grad, tg_loss_with_grad, total_loss
from alignment.revenue import TernaryRevenueConfig
from data_collection.config import METHODS, STRATEGIES, Config
from data_collection.embeddings import (
    load_answer,
    load_attention,
    load_embeddings,
    load_head,
    load_kernel,
    load_projection,
    save_embeddings,
    write_json_atomic,
)
from data_collection.synthetic import SyntheticSpec, synth_generate
from game_core.errors import ConfigError
from game_core.interactions import Estimator
from tg_align import reports
from token_merge.dpc_knn import MergeConfig
from token_merge.pipeline import run_merge
from token_merge.temporal_conv import ConvKernel

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Inputs:
    visual: object
    question: object
    answer: object
    projection: object
    label: int | None = None
    planted: np.ndarray | None = None


def revenue_config(config):
    return TernaryRevenueConfig(similarity=config.similarity)


def estimator_for(config):
    if config.exact:
        return Estimator.exact()
    return Estimator.sampled(config.num_samples, config.seed)


def kernel_for(config):
    if config.kernel:
        return load_kernel(config.kernel)
    return ConvKernel(config.taps if config.taps is not None else Config.DEFAULT_TAPS)


def projections_for(config):
    return load_attention(config.attention) if config.attention else None


def synthetic_spec(config, seed=None):
    return SyntheticSpec(
        n_visual=config.n_visual,
        n_question=config.n_question,
        dim=config.dim,
        noise_std=config.noise_std,
        planted=config.planted,
        seed=config.seed if seed is None else seed,
        num_answers=config.num_answers,
    )


def load_inputs(config):
    """Synthetic bundle or the four input files named in the config."""
    if config.synthetic:
        bundle = synth_generate(synthetic_spec(config))
        label = config.label if config.label is not None else bundle.label
        return Inputs(bundle.visual, bundle.question, bundle.answer, bundle.projection, label, bundle.planted)
    missing = [flag for flag, path in (('--video', config.video), ('--question', config.question),
                                       ('--answer', config.answer), ('--g', config.g)) if not path]
    if missing:
        raise ConfigError(f'missing inputs {", ".join(missing)} (or pass --synthetic)')
    return Inputs(
        load_embeddings(config.video),
        load_embeddings(config.question),
        load_answer(config.answer),
        load_projection(config.g),
        config.label,
    )


def merge_config(config, target, n_tokens):
    return MergeConfig(
        target_count=min(target or n_tokens, n_tokens),
        k_neighbors=config.k_neighbors,
        strategy=config.strategy,
        seed=config.seed,
    )


def merge_modalities(config, visual, question):
    """Run the merge network on both modalities when merging is enabled."""
    if not config.merge:
        return visual, question, None
    kernel = kernel_for(config)
    projections = projections_for(config)
    v_cfg = merge_config(config, config.target_v, len(visual))
    q_cfg = merge_config(config, config.target_q, len(question))
    v_result = run_merge(visual, kernel, v_cfg, projections=projections)
    q_result = run_merge(question, kernel if config.conv_question else None, q_cfg, projections=projections)
    metadata = {
        'strategy': config.strategy,
        'kernel': kernel.to_dict(),
        'visual': {'input_count': len(visual), **v_cfg.to_dict(), **v_result.assignment.to_dict()},
        'question': {'input_count': len(question), **q_cfg.to_dict(), **q_result.assignment.to_dict()},
    }
    return v_result.fused, q_result.fused, metadata


def guidance_for(config, inputs, visual, question):
    return teacher_matrix(
        visual, question, inputs.answer, inputs.projection,
        cfg=revenue_config(config),
        method=config.method,
        estimator=estimator_for(config),
        tau=config.tau,
        threads=Config.get_threads(),
    )


def _teacher_payload(config, guidance):
    return {
        'similarity': config.similarity,
        'estimator': guidance.raw.estimator.to_dict(),
        'raw': guidance.to_dict(normalized=False),
        'normalized': guidance.to_dict(normalized=True),
    }


def _write(config, payload):
    if config.out:
        write_json_atomic(config.out, payload)
        print(f'Saved: {config.out}')
    return payload


def _prepare(config):
    config.validate()
    inputs = load_inputs(config)
    config.check_capacity(len(inputs.visual), len(inputs.question))
    return inputs


def cmd_interact(config):
    """Teacher guidance matrix (raw and normalized) for one input triple."""
    inputs = _prepare(config)
    visual, question, merge_meta = merge_modalities(config, inputs.visual, inputs.question)
    guidance = guidance_for(config, inputs, visual, question)
    reports.print_guidance_report(guidance)
    payload = {'config': config.to_dict(), **_teacher_payload(config, guidance)}
    if merge_meta is not None:
        payload['merge'] = merge_meta
    return _write(config, payload)


def cmd_merge(config):
    """Merged token set for one modality, with strategy and target metadata."""
    config.validate()
    if not config.tokens:
        raise ConfigError('missing input --tokens')
    tokens = load_embeddings(config.tokens)
    kernel = kernel_for(config)
    cfg = merge_config(config, config.target_v, len(tokens))
    result = run_merge(tokens, kernel, cfg, projections=projections_for(config))
    metadata = {'input_count': len(tokens), 'kernel': kernel.to_dict(), **cfg.to_dict(),
                **result.assignment.to_dict()}
    reports.print_merge_report(metadata)
    payload = {**result.fused.to_dict(), 'metadata': metadata, 'config': config.to_dict()}
    return _write(config, payload)


def _loss_section(config, inputs, visual, question, guidance):
    """Student prediction, L_TG with gradient, optional answer loss and the total."""
    student = student_matrix(visual, question, config.tau)
    l_tg, grad = tg_loss_with_grad(guidance, student)
    answer = None
    l_vqa = 0.0
    if config.head or inputs.label is not None:
        if config.head:
            head = load_head(config.head)
        else:
            head = AnswerHead.random(visual.dim, question.dim, config.num_answers, config.seed)
        logits = answer_forward(visual, question, head)
        answer = {
            'logits': logits.tolist(),
            'predicted': predict_answer(visual, question, head),
            'label': inputs.label,
        }
        if inputs.label is not None:
            l_vqa = cross_entropy(logits, inputs.label)
    report = total_loss(l_vqa, l_tg, config.alpha, grad)
    section = {
        'student': {
            'logits': student.to_dict(normalized=False),
            'normalized': student.to_dict(normalized=True),
        },
        'losses': report.to_dict(),
        'answer': answer,
    }
    check = None
    if config.check_grad:
        numeric = finite_difference_grad(guidance.normalized, student.logits, config.tau)
        check = float(np.max(np.abs(numeric - grad)))
        section['grad_check_max_abs_diff'] = check
    reports.print_loss_report(report, check)
    return section


def cmd_losses(config):
    """L_TG with its gradient, optional answer loss, and the weighted total."""
    inputs = _prepare(config)
    visual, question, merge_meta = merge_modalities(config, inputs.visual, inputs.question)
    guidance = guidance_for(config, inputs, visual, question)
    payload = {'config': config.to_dict(), 'teacher': _teacher_payload(config, guidance),
               **_loss_section(config, inputs, visual, question, guidance)}
    if merge_meta is not None:
        payload['merge'] = merge_meta
    return _write(config, payload)


def cmd_pipeline(config):
    """Input, merge, teacher and student, losses: one consolidated artifact."""
    config.merge = True
    inputs = _prepare(config)
    visual, question, merge_meta = merge_modalities(config, inputs.visual, inputs.question)
    guidance = guidance_for(config, inputs, visual, question)
    reports.print_guidance_report(guidance)
    payload = {
        'config': config.to_dict(),
        'shapes': {
            'visual_in': [len(inputs.visual), inputs.visual.dim],
            'question_in': [len(inputs.question), inputs.question.dim],
            'visual_merged': [len(visual), visual.dim],
            'question_merged': [len(question), question.dim],
            'answer_dim': inputs.answer.dim,
            'teacher': [guidance.raw.rows, guidance.raw.cols],
        },
        'merge': merge_meta,
        'teacher': _teacher_payload(config, guidance),
        **_loss_section(config, inputs, visual, question, guidance),
    }
    return _write(config, payload)


def cmd_synth(config):
    """Write a synthetic input set (video, question, answer, g, planted) into a directory."""
    config.synthetic = True
    config.validate()
    if not config.out:
        raise ConfigError('synth needs --out DIRECTORY')
    bundle = synth_generate(synthetic_spec(config))
    out_dir = Path(config.out)
    save_embeddings(bundle.visual, out_dir / 'video.json')
    save_embeddings(bundle.question, out_dir / 'question.json')
    write_json_atomic(out_dir / 'answer.json', bundle.answer.to_dict())
    write_json_atomic(out_dir / 'g.json', bundle.projection.to_dict())
    planted = None if bundle.planted is None else bundle.planted.tolist()
    write_json_atomic(out_dir / 'planted.json', {'planted': planted, 'label': bundle.label,
                                                 'config': config.to_dict()})
    print(f'Saved synthetic inputs to {out_dir}')
    return bundle


def _native(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _records(frame):
    return [{key: _native(value) for key, value in row.items()} for row in frame.to_dict(orient='records')]


def _distortion(enhanced, assignment):
    """Mean squared distance from each token to its cluster mean."""
    total = 0.0
    for center in assignment.centers:
        members = enhanced.tokens[assignment.members(center)]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total / len(enhanced)


def cmd_ablate(config):
    """Alignment-strategy and cluster-strategy comparison over seeded synthetic data."""
    config.synthetic = True
    config.validate()
    config.check_capacity(config.n_visual, config.n_question)
    estimator = estimator_for(config)
    kernel = kernel_for(config)
    rows = []
    for seed in range(config.seed, config.seed + config.ablation_seeds):
        bundle = synth_generate(synthetic_spec(config, seed))
        student = student_matrix(bundle.visual, bundle.question, config.tau)
        for method in METHODS:
            guidance = teacher_matrix(bundle.visual, bundle.question, bundle.answer, bundle.projection,
                                      cfg=revenue_config(config), method=method, estimator=estimator,
                                      tau=config.tau, threads=Config.get_threads())
            l_tg, _ = tg_loss_with_grad(guidance, student)
            recovery = math.nan
            if bundle.planted is not None:
                recovery = float(np.mean(guidance.raw.data.argmax(axis=1) == bundle.planted))
            rows.append({'table': 'alignment', 'variant': method, 'seed': seed, 'recovery': recovery,
                         'l_tg': l_tg})

        if bundle.planted is not None:
            target = config.target_v or len(np.unique(bundle.planted))
        else:
            target = config.target_v or len(bundle.visual)
        for strategy in ('none',) + STRATEGIES:
            if strategy == 'none':
                labels = np.arange(len(bundle.visual))
                distortion = 0.0
            else:
                cfg = MergeConfig(target_count=min(target, len(bundle.visual)),
                                  k_neighbors=config.k_neighbors, strategy=strategy, seed=seed)
                result = run_merge(bundle.visual, kernel, cfg)
                labels = result.assignment.labels
                distortion = _distortion(result.enhanced, result.assignment)
            ari = math.nan if bundle.planted is None else float(adjusted_rand_score(bundle.planted, labels))
            rows.append({'table': 'cluster', 'variant': strategy, 'seed': seed, 'ari': ari,
                         'distortion': distortion})

    frame = pd.DataFrame(rows)
    alignment = (frame[frame['table'] == 'alignment']
                 .groupby('variant', sort=False)
                 .agg(recovery=('recovery', 'mean'), l_tg=('l_tg', 'mean'), runs=('seed', 'count'))
                 .reset_index())
    cluster = (frame[frame['table'] == 'cluster']
               .groupby('variant', sort=False)
               .agg(ari=('ari', 'mean'), distortion=('distortion', 'mean'), runs=('seed', 'count'))
               .reset_index())
    reports.print_ablation_report(alignment, cluster)
    payload = {
        'config': config.to_dict(),
        'alignment': _records(alignment),
        'cluster': _records(cluster),
        'runs': _records(frame),
    }
    return _write(config, payload)


COMMANDS = {
    'interact': cmd_interact,
    'merge': cmd_merge,
    'losses': cmd_losses,
    'pipeline': cmd_pipeline,
    'synth': cmd_synth,
    'ablate': cmd_ablate,
}
