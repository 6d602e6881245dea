"""
Embedding file ingestion and JSON artifact writing.
Token files look like {"dim": D, "tokens": [[D floats], ...]}; matrices use
{"rows": R, "cols": C, "weights": [[...]], "bias": [...]}.
"""

import json
import logging
import math
import os
import tempfile
from pathlib import Path

from alignment.answer_head import AnswerHead
from alignment.revenue import ProjectionG
from data_collection.tokens import AnswerEmbedding, TokenSet
from game_core.errors import ParseError, TernaryGameError
from token_merge.fusion import AttentionProjections
from token_merge.temporal_conv import ConvKernel

logger = logging.getLogger(__name__)


def read_json(path):
    """Parse a JSON file, turning I/O and syntax problems into ParseError."""
    path = Path(path)
    if not path.is_file():
        raise ParseError(f'{path}: file not found')
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f'{path}: malformed JSON at line {e.lineno} column {e.colno}') from None
    except UnicodeDecodeError:
        raise ParseError(f'{path}: file is not valid UTF-8') from None


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_token_payload(payload, path):
    """Validate a token payload, naming the first violated rule."""
    if not isinstance(payload, dict) or 'dim' not in payload or 'tokens' not in payload:
        raise ParseError(f'{path}: expected an object with "dim" and "tokens"')
    dim, tokens = payload['dim'], payload['tokens']
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f'{path}: "dim" must be a positive integer, got {dim!r}')
    if not isinstance(tokens, list) or not tokens:
        raise ParseError(f'{path}: token list is empty')
    for row_index, row in enumerate(tokens):
        if not isinstance(row, list) or len(row) != dim:
            length = len(row) if isinstance(row, list) else 'not a list'
            raise ParseError(f'{path}: ragged rows, row {row_index} has length {length}, expected {dim}')
        for value in row:
            if not _is_number(value):
                raise ParseError(f'{path}: row {row_index} holds a non-numeric value {value!r}')
            try:
                value = float(value)
            except OverflowError:
                raise ParseError(f'{path}: row {row_index} holds a value outside float64 range') from None
            if not math.isfinite(value):
                raise ParseError(f'{path}: row {row_index} holds a non-finite value {value!r}')
    return TokenSet(tokens)


def load_embeddings(path):
    """Load a token set from an embedding file."""
    tokens = parse_token_payload(read_json(path), path)
    logger.info('loaded %d tokens of dim %d from %s', len(tokens), tokens.dim, path)
    return tokens


def load_answer(path):
    """Load the answer embedding; the file must hold exactly one token."""
    tokens = load_embeddings(path)
    if len(tokens) != 1:
        raise ParseError(f'{path}: an answer file must hold exactly one token, got {len(tokens)}')
    try:
        return AnswerEmbedding.from_token_set(tokens)
    except TernaryGameError as e:
        raise ParseError(f'{path}: {e}') from None


def _load_structure(path, build):
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise ParseError(f'{path}: expected a JSON object')
    try:
        return build(payload)
    except KeyError as e:
        raise ParseError(f'{path}: missing key {e}') from None
    except (TypeError, ValueError, OverflowError) as e:
        raise ParseError(f'{path}: {e}') from None


def load_projection(path):
    return _load_structure(path, ProjectionG.from_dict)


def load_kernel(path):
    return _load_structure(path, ConvKernel.from_dict)


def load_head(path):
    return _load_structure(path, AnswerHead.from_dict)


def load_attention(path):
    return _load_structure(path, AttentionProjections.from_dict)


def write_json_atomic(path, payload):
    """Write JSON to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'w') as f:
            # repr-based float output round-trips every float64 exactly
            json.dump(payload, f, indent=2, allow_nan=False)
            f.write('\n')
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info('wrote %s', path)
    return path


def save_embeddings(tokens, path):
    return write_json_atomic(path, tokens.to_dict())
