"""
Answer prediction network: sigmoid token gates, weighted pooling per modality and an MLP.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from game_core.errors import NonFiniteError, ShapeError


def _array(values, what):
    array = np.array(values, dtype=np.float64)
    if not np.isfinite(array).all():
        raise NonFiniteError(f'{what} contains NaN or infinite entries')
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TokenGate:
    """Linear layer + sigmoid giving each token a fusion weight"""

    weight: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'weight', _array(self.weight, 'gate weight'))
        object.__setattr__(self, 'bias', float(self.bias))

    def __call__(self, tokens):
        if tokens.shape[1] != self.weight.size:
            raise ShapeError(f'gate expects dim {self.weight.size}, tokens have dim {tokens.shape[1]}')
        return expit(tokens @ self.weight + self.bias)

    def to_dict(self):
        return {'weight': self.weight.tolist(), 'bias': self.bias}


@dataclass(frozen=True, eq=False)
class AnswerHead:
    """Gates per modality plus a one-hidden-layer ReLU MLP over concat(v_o, q_o)"""

    gate_v: TokenGate
    gate_q: TokenGate
    hidden_weight: np.ndarray
    hidden_bias: np.ndarray
    output_weight: np.ndarray
    output_bias: np.ndarray
    normalize_gates: bool = False

    def __post_init__(self):
        for name in ('hidden_weight', 'hidden_bias', 'output_weight', 'output_bias'):
            object.__setattr__(self, name, _array(getattr(self, name), name))
        width = self.gate_v.weight.size + self.gate_q.weight.size
        hidden, inputs = self.hidden_weight.shape
        if inputs != width:
            raise ShapeError(f'MLP input width {inputs} must equal dim_v + dim_q = {width}')
        if self.hidden_bias.shape != (hidden,):
            raise ShapeError(f'hidden bias must have {hidden} entries')
        if self.output_weight.ndim != 2 or self.output_weight.shape[1] != hidden:
            raise ShapeError(f'output weight must have {hidden} columns')
        if self.output_bias.shape != (self.output_weight.shape[0],):
            raise ShapeError(f'output bias must have {self.output_weight.shape[0]} entries')

    @classmethod
    def random(cls, dim_v, dim_q, num_answers, seed, normalize_gates=False):
        """Seeded head; hidden width equals the input width."""
        rng = np.random.default_rng(seed)
        width = dim_v + dim_q

        def layer(rows, cols):
            return rng.normal(0.0, 1.0 / np.sqrt(cols), size=(rows, cols))

        return cls(
            gate_v=TokenGate(layer(1, dim_v)[0]),
            gate_q=TokenGate(layer(1, dim_q)[0]),
            hidden_weight=layer(width, width),
            hidden_bias=np.zeros(width),
            output_weight=layer(num_answers, width),
            output_bias=np.zeros(num_answers),
            normalize_gates=normalize_gates,
        )

    @classmethod
    def from_dict(cls, payload):
        return cls(
            gate_v=TokenGate(**payload['gate_v']),
            gate_q=TokenGate(**payload['gate_q']),
            hidden_weight=payload['hidden_weight'],
            hidden_bias=payload['hidden_bias'],
            output_weight=payload['output_weight'],
            output_bias=payload['output_bias'],
            normalize_gates=payload.get('normalize_gates', False),
        )

    @property
    def num_answers(self):
        return self.output_weight.shape[0]

    def to_dict(self):
        return {
            'gate_v': self.gate_v.to_dict(),
            'gate_q': self.gate_q.to_dict(),
            'hidden_weight': self.hidden_weight.tolist(),
            'hidden_bias': self.hidden_bias.tolist(),
            'output_weight': self.output_weight.tolist(),
            'output_bias': self.output_bias.tolist(),
            'normalize_gates': self.normalize_gates,
        }


def pool_tokens(tokens, gate, normalize=False):
    """Sum of gate-weighted tokens; divided by the weight total when normalize is set."""
    weights = gate(tokens)
    pooled = weights @ tokens
    if normalize:
        pooled = pooled / weights.sum()
    return pooled


def answer_forward(visual, question, head):
    """Answer logits for one (visual, question) token pair."""
    v_o = pool_tokens(visual.tokens, head.gate_v, head.normalize_gates)
    q_o = pool_tokens(question.tokens, head.gate_q, head.normalize_gates)
    hidden = np.maximum(head.hidden_weight @ np.concatenate([v_o, q_o]) + head.hidden_bias, 0.0)
    return head.output_weight @ hidden + head.output_bias


def predict_answer(visual, question, head):
    """Index of the highest-scoring answer; ties go to the lower index."""
    return int(np.argmax(answer_forward(visual, question, head)))
