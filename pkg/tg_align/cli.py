"""
Command-line entry point: tg-align {interact,merge,losses,pipeline,synth,ablate}.
"""

import argparse
import logging
import sys

from data_collection.config import METHODS, PLANTED_MODES, SIMILARITIES, STRATEGIES, Config, RunConfig
from data_collection.embeddings import read_json
from game_core.errors import TernaryGameError
from tg_align.commands import COMMANDS

logger = logging.getLogger(__name__)


def _taps(text):
    try:
        return [float(value) for value in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f'taps must be comma-separated numbers, got {text!r}') from None


def _shared_flags():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--seed', type=int, default=Config.DEFAULT_SEED,
                        help='Seed for sampling and synthesis (env: TG_ALIGN_SEED)')
    parser.add_argument('--tau', type=float, default=Config.DEFAULT_TAU, help='Softmax temperature')
    parser.add_argument('--alpha', type=float, default=Config.DEFAULT_ALPHA, help='Weight of L_TG in the total')
    parser.add_argument('--method', choices=METHODS, default='banzhaf', help='Interaction index')
    estimator = parser.add_mutually_exclusive_group()
    estimator.add_argument('--exact', dest='samples', action='store_const', const=None,
                           help='Enumerate every coalition (default)')
    estimator.add_argument('--samples', type=int, default=None, metavar='N',
                           help='Monte-Carlo estimate with N coalitions per entry')
    parser.add_argument('--strategy', choices=STRATEGIES, default='dpcknn', help='Clustering strategy')
    parser.add_argument('--k', dest='k_neighbors', type=int, default=Config.DEFAULT_K_NEIGHBORS,
                        help='Neighbours for the DPC-KNN density')
    parser.add_argument('--target-v', type=int, default=None, help='Sparse visual token count')
    parser.add_argument('--target-q', type=int, default=None, help='Sparse question token count')
    parser.add_argument('--similarity', choices=SIMILARITIES, default='cosine', help='phi in the revenue')
    parser.add_argument('--taps', type=_taps, default=None, help='Temporal kernel taps, e.g. 0.25,0.5,0.25')
    parser.add_argument('--kernel', default=None, help='Temporal kernel JSON file')
    parser.add_argument('--attention', default=None, help='Query/key/value projection JSON for the fusion step')
    parser.add_argument('--config', default=None, help='Rerun from an echoed config or artifact')
    parser.add_argument('--out', default=None, help='Output path')
    return parser


def _input_flags():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--video', default=None, help='Visual token JSON')
    parser.add_argument('--question', default=None, help='Question token JSON')
    parser.add_argument('--answer', default=None, help='Answer embedding JSON (one token)')
    parser.add_argument('--g', default=None, help='Projection G JSON')
    parser.add_argument('--merge', action='store_true', help='Run the token merge network first')
    parser.add_argument('--conv-question', action='store_true', help='Also convolve question tokens')
    return parser


def _synthetic_flags():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--synthetic', action='store_true', help='Generate inputs instead of loading files')
    parser.add_argument('--n-visual', type=int, default=Config.DEFAULT_N_VISUAL)
    parser.add_argument('--n-question', type=int, default=Config.DEFAULT_N_QUESTION)
    parser.add_argument('--dim', type=int, default=Config.DEFAULT_DIM)
    parser.add_argument('--noise-std', type=float, default=Config.DEFAULT_NOISE_STD)
    parser.add_argument('--planted', choices=PLANTED_MODES, default='random')
    return parser


def _answer_flags():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--head', default=None, help='Answer head JSON')
    parser.add_argument('--label', type=int, default=None, help='Ground-truth answer index')
    parser.add_argument('--num-answers', type=int, default=Config.DEFAULT_NUM_ANSWERS)
    parser.add_argument('--check-grad', action='store_true', help='Compare the gradient to finite differences')
    return parser


def build_parser():
    parser = argparse.ArgumentParser(prog='tg-align', description='Ternary-game visual-linguistic alignment')
    commands = parser.add_subparsers(dest='command', required=True)
    shared, inputs, synthetic, answer = _shared_flags(), _input_flags(), _synthetic_flags(), _answer_flags()

    commands.add_parser('interact', parents=[shared, inputs, synthetic],
                        help='Teacher guidance matrix from the ternary game')
    merge = commands.add_parser('merge', parents=[shared], help='Merge one token set')
    merge.add_argument('--tokens', default=None, help='Token JSON to merge')
    merge.add_argument('--target', dest='target_v', type=int, default=None, help='Sparse token count')
    commands.add_parser('losses', parents=[shared, inputs, synthetic, answer], help='L_TG, L_vqa and total')
    commands.add_parser('pipeline', parents=[shared, inputs, synthetic, answer], help='End-to-end run')
    commands.add_parser('synth', parents=[shared, synthetic, answer], help='Write synthetic inputs')
    ablate = commands.add_parser('ablate', parents=[shared, synthetic], help='Strategy ablation tables')
    ablate.add_argument('--seeds', dest='ablation_seeds', type=int, default=Config.ABLATION_SEEDS)
    return parser


def config_from_args(args):
    """Resolve a RunConfig from parsed flags, or from --config with an optional --out override."""
    if args.config:
        config = RunConfig.from_dict(read_json(args.config))
        if args.out:
            config.out = args.out
        return config
    values = {key: value for key, value in vars(args).items() if key not in ('command', 'config', 'samples')}
    values['exact'] = args.samples is None
    if args.samples is not None:
        values['num_samples'] = args.samples
    return RunConfig(**values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL, logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    try:
        config = config_from_args(args)
        COMMANDS[args.command](config)
    except TernaryGameError as e:
        print(f'{e.category}: {e}', file=sys.stderr)
        return 1
    except OSError as e:
        print(f'io: {" ".join(str(e).split())}', file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
