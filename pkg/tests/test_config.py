from __future__ import annotations

import pytest

from data_collection.config import Config, RunConfig
from game_core.errors import CapacityError, ConfigError


def test_defaults_validate():
    config = RunConfig().validate()
    assert config.exact and config.method == 'banzhaf'
    assert config.tau == Config.DEFAULT_TAU


@pytest.mark.parametrize('changes', [
    {'method': 'owen'},
    {'strategy': 'kmeans'},
    {'tau': 0.0},
    {'alpha': -1.0},
    {'exact': False, 'num_samples': 0},
    {'k_neighbors': 0},
    {'target_v': 0},
    {'taps': [0.5, 0.5]},
    {'label': 10},
    {'synthetic': True, 'planted': 'diagonal', 'n_visual': 3, 'n_question': 4},
])
def test_invalid_settings_are_config_errors(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes).validate()


def test_echo_omits_output_path_and_reloads():
    config = RunConfig(seed=7, exact=False, num_samples=500, out='m.json')
    echo = config.to_dict()
    assert 'out' not in echo
    assert RunConfig.from_dict(echo) == RunConfig(seed=7, exact=False, num_samples=500)
    assert RunConfig.from_dict({'config': echo, 'raw': {}}).seed == 7


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError, match='bogus'):
        RunConfig.from_dict({'bogus': 1})


def test_capacity_counts_players_after_merging():
    with pytest.raises(CapacityError, match='24'):
        RunConfig().check_capacity(13, 12)
    RunConfig(exact=False).check_capacity(13, 12)
    RunConfig(method='pairwise').check_capacity(13, 12)
    RunConfig(merge=True, target_v=6, target_q=6).check_capacity(13, 12)


def test_thread_count_follows_environment(monkeypatch):
    monkeypatch.setenv('TG_ALIGN_THREADS', '3')
    assert Config.get_threads() == 3
    monkeypatch.setenv('TG_ALIGN_THREADS', '0')
    assert Config.get_threads() == 1
