"""
Configuration module for ternary-game alignment runs.
Loads parallelism and logging settings from environment variables.
"""

import os
from dataclasses import asdict, dataclass, fields

from dotenv import load_dotenv

from game_core.coalitions import EXACT_PLAYER_LIMIT
from game_core.errors import CapacityError, ConfigError

# Load environment variables from .env file
load_dotenv()


class Config:
    """Defaults shared by every command"""

    # Worker threads for interaction-matrix entries
    THREADS = max(1, int(os.getenv('TG_ALIGN_THREADS', '1')))

    LOG_LEVEL = os.getenv('TG_ALIGN_LOG_LEVEL', 'WARNING').upper()
    DEFAULT_SEED = int(os.getenv('TG_ALIGN_SEED', '0'))

    # Numeric defaults
    DEFAULT_TAU = 0.1
    DEFAULT_ALPHA = 0.5
    DEFAULT_NUM_SAMPLES = 100_000
    DEFAULT_K_NEIGHBORS = 5
    DEFAULT_TAPS = (0.25, 0.5, 0.25)
    DEFAULT_NUM_ANSWERS = 10

    # Synthetic data settings
    DEFAULT_DIM = 64
    DEFAULT_NOISE_STD = 0.05
    DEFAULT_N_VISUAL = 8
    DEFAULT_N_QUESTION = 6
    ABLATION_SEEDS = 10

    EXACT_PLAYER_LIMIT = EXACT_PLAYER_LIMIT

    @classmethod
    def get_threads(cls):
        """Thread cap for parallel sections, re-read so tests can patch the environment"""
        return max(1, int(os.getenv('TG_ALIGN_THREADS', str(cls.THREADS))))


METHODS = ('banzhaf', 'shapley', 'pairwise')
STRATEGIES = ('dpcknn', 'random', 'temporal')
SIMILARITIES = ('cosine', 'dot')
PLANTED_MODES = ('diagonal', 'random', 'none')


@dataclass
class RunConfig:
    """Fully-resolved settings of one CLI run; echoed into every artifact"""

    method: str = 'banzhaf'
    exact: bool = True
    num_samples: int = Config.DEFAULT_NUM_SAMPLES
    seed: int = Config.DEFAULT_SEED
    tau: float = Config.DEFAULT_TAU
    alpha: float = Config.DEFAULT_ALPHA
    similarity: str = 'cosine'
    # token merge
    merge: bool = False
    strategy: str = 'dpcknn'
    k_neighbors: int = Config.DEFAULT_K_NEIGHBORS
    target_v: int | None = None
    target_q: int | None = None
    taps: list | None = None
    conv_question: bool = False
    # inputs
    video: str | None = None
    question: str | None = None
    answer: str | None = None
    g: str | None = None
    tokens: str | None = None
    kernel: str | None = None
    attention: str | None = None
    head: str | None = None
    label: int | None = None
    num_answers: int = Config.DEFAULT_NUM_ANSWERS
    check_grad: bool = False
    # synthetic inputs
    synthetic: bool = False
    n_visual: int = Config.DEFAULT_N_VISUAL
    n_question: int = Config.DEFAULT_N_QUESTION
    dim: int = Config.DEFAULT_DIM
    noise_std: float = Config.DEFAULT_NOISE_STD
    planted: str = 'random'
    ablation_seeds: int = Config.ABLATION_SEEDS
    # outputs (not echoed)
    out: str | None = None

    ECHO_EXCLUDED = ('out',)

    @classmethod
    def from_dict(cls, payload):
        """Rebuild from an echoed config, or from an artifact holding one under 'config'."""
        payload = payload.get('config', payload)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f'unknown run config keys: {", ".join(unknown)}')
        return cls(**payload)

    def to_dict(self):
        echo = asdict(self)
        for key in self.ECHO_EXCLUDED:
            echo.pop(key)
        return echo

    def validate(self):
        """Check every precondition before any computation starts."""
        if self.method not in METHODS:
            raise ConfigError(f'method must be one of {", ".join(METHODS)}, got {self.method!r}')
        if self.strategy not in STRATEGIES:
            raise ConfigError(f'strategy must be one of {", ".join(STRATEGIES)}, got {self.strategy!r}')
        if self.similarity not in SIMILARITIES:
            raise ConfigError(f'similarity must be one of {", ".join(SIMILARITIES)}, got {self.similarity!r}')
        if self.planted not in PLANTED_MODES:
            raise ConfigError(f'planted must be one of {", ".join(PLANTED_MODES)}, got {self.planted!r}')
        if not self.tau > 0:
            raise ConfigError(f'tau must be positive, got {self.tau}')
        if not self.alpha >= 0:
            raise ConfigError(f'alpha must be non-negative, got {self.alpha}')
        if not self.exact and self.num_samples < 1:
            raise ConfigError(f'num_samples must be at least 1, got {self.num_samples}')
        if self.seed < 0:
            raise ConfigError(f'seed must be non-negative, got {self.seed}')
        if self.k_neighbors < 1:
            raise ConfigError(f'k must be at least 1, got {self.k_neighbors}')
        for name in ('target_v', 'target_q'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f'{name} must be at least 1, got {value}')
        if self.taps is not None and len(self.taps) % 2 == 0:
            raise ConfigError(f'taps needs an odd length, got {len(self.taps)}')
        if self.num_answers < 1:
            raise ConfigError(f'num_answers must be at least 1, got {self.num_answers}')
        if self.label is not None and not 0 <= self.label < self.num_answers:
            raise ConfigError(f'label must be in 0..{self.num_answers - 1}, got {self.label}')
        if self.synthetic:
            if self.n_visual < 1 or self.n_question < 1 or self.dim < 1:
                raise ConfigError('synthetic token counts and dim must be at least 1')
            if self.noise_std < 0:
                raise ConfigError(f'noise_std must be non-negative, got {self.noise_std}')
            if self.planted == 'diagonal' and self.n_visual != self.n_question:
                raise ConfigError('diagonal planting needs n_visual == n_question')
        return self

    def player_count(self, n_visual, n_question):
        """Players of the game after optional merging."""
        if self.merge:
            n_visual = min(n_visual, self.target_v or n_visual)
            n_question = min(n_question, self.target_q or n_question)
        return n_visual + n_question

    def check_capacity(self, n_visual, n_question):
        """Fail fast when exact enumeration would exceed the player cap."""
        n = self.player_count(n_visual, n_question)
        if self.exact and self.method != 'pairwise' and n > EXACT_PLAYER_LIMIT:
            raise CapacityError(
                f'exact enumeration supports at most {EXACT_PLAYER_LIMIT} players, got {n}; '
                f'use --samples N'
            )


# Print configuration when run directly (for verification)
if __name__ == '__main__':
    print('Ternary Game Alignment - Configuration')
    print(f'Threads: {Config.get_threads()}')
    print(f'Log level: {Config.LOG_LEVEL}')
    print(f'Default seed: {Config.DEFAULT_SEED}')
    print(f'Default tau: {Config.DEFAULT_TAU}')
    print(f'Default alpha: {Config.DEFAULT_ALPHA}')
    print(f'Exact player limit: {Config.EXACT_PLAYER_LIMIT}')
