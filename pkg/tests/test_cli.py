from __future__ import annotations

import json

import numpy as np
import pytest

from alignment.revenue import ProjectionG
from data_collection.embeddings import save_embeddings, write_json_atomic
from data_collection.tokens import TokenSet
from tg_align.cli import main

SYNTH_4X4 = ['--n-visual', '4', '--n-question', '4', '--planted', 'diagonal']


def _load(path):
    with open(path) as f:
        return json.load(f)


@pytest.fixture
def inputs_dir(tmp_path):
    out = tmp_path / 'inputs'
    assert main(['synth', '--out', str(out), '--seed', '3', *SYNTH_4X4]) == 0
    return out


def _file_flags(directory):
    return ['--video', str(directory / 'video.json'), '--question', str(directory / 'question.json'),
            '--answer', str(directory / 'answer.json'), '--g', str(directory / 'g.json')]


def test_synth_writes_every_input_file(inputs_dir):
    names = sorted(p.name for p in inputs_dir.iterdir())
    assert names == ['answer.json', 'g.json', 'planted.json', 'question.json', 'video.json']
    assert _load(inputs_dir / 'planted.json')['planted'] == [0, 1, 2, 3]


def test_synth_is_deterministic(tmp_path, inputs_dir):
    again = tmp_path / 'again'
    assert main(['synth', '--out', str(again), '--seed', '3', *SYNTH_4X4]) == 0
    for path in inputs_dir.iterdir():
        assert (again / path.name).read_bytes() == path.read_bytes()


def test_interact_from_files(tmp_path, inputs_dir, capsys):
    out = tmp_path / 'm.json'
    code = main(['interact', *_file_flags(inputs_dir), '--method', 'banzhaf', '--exact', '--tau', '0.1',
                 '--out', str(out)])
    assert code == 0
    payload = _load(out)
    normalized = np.array(payload['normalized']['data'])
    assert normalized.shape == (payload['normalized']['rows'], payload['normalized']['cols']) == (4, 4)
    np.testing.assert_allclose(normalized.sum(axis=1), 1.0, atol=1e-12)
    assert payload['estimator'] == {'kind': 'exact'}
    assert '=== TEACHER GUIDANCE MATRIX ===' in capsys.readouterr().out


def test_sampled_interact_is_reproducible_and_reruns_from_config(tmp_path, inputs_dir):
    first, second, rerun = tmp_path / 'a.json', tmp_path / 'b.json', tmp_path / 'c.json'
    flags = ['interact', *_file_flags(inputs_dir), '--samples', '2000', '--seed', '7']
    assert main([*flags, '--out', str(first)]) == 0
    assert main([*flags, '--out', str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert main(['interact', '--config', str(first), '--out', str(rerun)]) == 0
    assert rerun.read_bytes() == first.read_bytes()


def test_constant_game_gives_uniform_rows(tmp_path):
    def token_file(name, rows):
        return str(save_embeddings(TokenSet(rows), tmp_path / name))

    g = write_json_atomic(tmp_path / 'g.json', ProjectionG.left_identity(3, 3).to_dict())
    out = tmp_path / 'm.json'
    code = main([
        'interact',
        '--video', token_file('v.json', [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]),
        '--question', token_file('q.json', [[0.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.5, 0.0]]),
        '--answer', token_file('a.json', [[0.0, 0.0, 1.0]]),
        '--g', str(g),
        '--out', str(out),
    ])
    assert code == 0
    np.testing.assert_allclose(_load(out)['normalized']['data'], np.full((2, 3), 1 / 3))


def test_merge_temporal_blocks(tmp_path):
    tokens = tmp_path / 't.json'
    save_embeddings(TokenSet(np.arange(12, dtype=float).reshape(6, 2)), tokens)
    out = tmp_path / 'merged.json'
    code = main(['merge', '--tokens', str(tokens), '--target', '3', '--strategy', 'temporal', '--out', str(out)])
    assert code == 0
    payload = _load(out)
    assert len(payload['tokens']) == 3
    assert payload['metadata']['centers'] == [0, 2, 4]
    assert payload['metadata']['labels'] == [0, 0, 2, 2, 4, 4]


def test_merge_needs_tokens(capsys):
    assert main(['merge', '--target', '2']) == 1
    assert capsys.readouterr().err.startswith('config:')


def test_losses_with_gradient_check(tmp_path, capsys):
    out = tmp_path / 'l.json'
    code = main(['losses', '--synthetic', '--n-visual', '3', '--n-question', '3', '--planted', 'diagonal',
                 '--tau', '0.5', '--check-grad', '--out', str(out)])
    assert code == 0
    payload = _load(out)
    assert payload['grad_check_max_abs_diff'] < 1e-6
    assert payload['answer']['label'] is not None
    assert payload['losses']['l_vqa'] > 0
    assert 'Gradient check max-abs diff' in capsys.readouterr().out


def test_losses_without_alpha_total_is_answer_loss(tmp_path):
    out = tmp_path / 'l.json'
    assert main(['losses', '--synthetic', '--alpha', '0', '--label', '2', '--out', str(out)]) == 0
    losses = _load(out)['losses']
    assert losses['total'] == losses['l_vqa']


def test_pipeline_eight_by_six(tmp_path):
    out = tmp_path / 'p.json'
    assert main(['pipeline', '--synthetic', '--n-visual', '8', '--n-question', '6', '--method', 'banzhaf',
                 '--exact', '--out', str(out)]) == 0
    payload = _load(out)
    normalized = np.array(payload['teacher']['normalized']['data'])
    assert normalized.shape == tuple(payload['shapes']['teacher'])
    np.testing.assert_allclose(normalized.sum(axis=1), 1.0, atol=1e-12)
    assert payload['config']['merge'] is True
    assert payload['merge']['visual']['input_count'] == 8


def test_pipeline_with_merging_targets(tmp_path):
    out = tmp_path / 'p.json'
    assert main(['pipeline', '--synthetic', '--n-visual', '8', '--n-question', '6', '--target-v', '4',
                 '--target-q', '3', '--out', str(out)]) == 0
    shapes = _load(out)['shapes']
    assert shapes['visual_merged'][0] == 4
    assert shapes['question_merged'][0] == 3
    assert shapes['teacher'] == [4, 3]


def test_single_pair_pipeline(tmp_path):
    out = tmp_path / 'p.json'
    assert main(['pipeline', '--synthetic', '--n-visual', '1', '--n-question', '1', '--out', str(out)]) == 0
    assert _load(out)['teacher']['normalized']['data'] == [[1.0]]


@pytest.mark.parametrize('command', ['interact', 'pipeline'])
def test_exact_beyond_the_cap_fails_fast(tmp_path, capsys, command):
    out = tmp_path / 'p.json'
    code = main([command, '--synthetic', '--n-visual', '13', '--n-question', '12', '--exact', '--out', str(out)])
    assert code == 1
    assert capsys.readouterr().err.startswith('capacity:')
    assert not out.exists()


def test_missing_inputs_name_the_flags(capsys):
    assert main(['interact', '--video', 'v.json']) == 1
    err = capsys.readouterr().err
    assert err.startswith('config:') and '--question' in err


def test_unreadable_input_is_a_parse_error(tmp_path, inputs_dir, capsys):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"dim": 2, "tokens": [[1, 2], [3]]}')
    flags = _file_flags(inputs_dir)
    flags[1] = str(broken)
    assert main(['interact', *flags]) == 1
    assert capsys.readouterr().err.startswith('parse:')


def test_ablate_tables(tmp_path, capsys):
    out = tmp_path / 'ablate.json'
    assert main(['ablate', '--seeds', '2', *SYNTH_4X4, '--out', str(out)]) == 0
    payload = _load(out)
    assert [row['variant'] for row in payload['alignment']] == ['banzhaf', 'shapley', 'pairwise']
    assert [row['variant'] for row in payload['cluster']] == ['none', 'dpcknn', 'random', 'temporal']
    assert all(row['runs'] == 2 for row in payload['alignment'] + payload['cluster'])
    assert all(0.0 <= row['recovery'] <= 1.0 for row in payload['alignment'])
    assert payload['cluster'][0]['ari'] == 1.0
    printed = capsys.readouterr().out
    assert '=== ALIGNMENT STRATEGY ===' in printed and '=== CLUSTER STRATEGY ===' in printed


def test_merge_with_attention_projections(tmp_path):
    tokens = tmp_path / 't.json'
    save_embeddings(TokenSet([[1.0, 2.0], [3.0, 4.0]]), tokens)
    swap = {'rows': 2, 'cols': 2, 'weights': [[0.0, 1.0], [1.0, 0.0]]}
    attention = write_json_atomic(tmp_path / 'attn.json', {'value': swap})
    out = tmp_path / 'merged.json'
    code = main(['merge', '--tokens', str(tokens), '--target', '1', '--taps', '0,1,0', '--attention', str(attention),
                 '--out', str(out)])
    assert code == 0
    fused = np.array(_load(out)['tokens'])
    assert fused.shape == (1, 2)
    # swapped values put the larger coordinate first
    assert fused[0, 0] > fused[0, 1]


def test_undecodable_input_is_a_parse_error(tmp_path, inputs_dir, capsys):
    broken = tmp_path / 'binary.json'
    broken.write_bytes(b'{"dim": 1, "tokens": [[1]]} \xff\xfe')
    flags = _file_flags(inputs_dir)
    flags[1] = str(broken)
    assert main(['interact', *flags]) == 1
    err = capsys.readouterr().err
    assert err.startswith('parse:') and len(err.strip().splitlines()) == 1


def test_pipeline_reruns_from_its_echoed_config(tmp_path):
    first, rerun = tmp_path / 'a.json', tmp_path / 'b.json'
    assert main(['pipeline', '--synthetic', '--n-visual', '8', '--n-question', '6', '--method', 'banzhaf',
                 '--exact', '--seed', '5', '--out', str(first)]) == 0
    assert main(['pipeline', '--config', str(first), '--out', str(rerun)]) == 0
    assert rerun.read_bytes() == first.read_bytes()


def test_losses_report_the_head_prediction(tmp_path):
    out = tmp_path / 'l.json'
    assert main(['losses', '--synthetic', '--label', '1', '--out', str(out)]) == 0
    answer = _load(out)['answer']
    assert answer['predicted'] == int(np.argmax(answer['logits']))
