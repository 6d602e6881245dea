"""
Ternary-game distillation loss, answer cross-entropy and the combined objective.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, rel_entr

from alignment.guidance import row_softmax
from game_core.errors import ArgumentError, ConfigError, DivergenceError, ShapeError

DEFAULT_ALPHA = 0.5


def kl_divergence(teacher, student):
    """Mean over rows of KL(teacher_row || student_row)."""
    p = np.asarray(teacher, dtype=np.float64)
    q = np.asarray(student, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 2:
        raise ShapeError(f'teacher shape {p.shape} and student shape {q.shape} must be equal 2-D')
    if ((q == 0) & (p > 0)).any():
        raise DivergenceError('student assigns zero probability where the teacher does not')
    # rel_entr is p*ln(p/q), and 0 where p == 0
    return float(np.sum(rel_entr(p, q)) / p.shape[0])


def tg_loss_with_grad(teacher, student):
    """L_TG and its gradient with respect to the student logits.

    The gradient of the mean-over-rows KL through a temperature softmax is
    (q - p) / (tau * rows).
    """
    p = teacher.normalized
    q = student.normalized
    if p.shape != q.shape:
        raise ShapeError(f'teacher shape {p.shape} and student shape {q.shape} differ')
    loss = kl_divergence(p, q)
    grad = (q - p) / (student.temperature * p.shape[0])
    return loss, grad


def finite_difference_grad(teacher_normalized, logits, tau, h=1e-4):
    """Central differences of L_TG over each student logit."""
    logits = np.asarray(logits, dtype=np.float64)
    grad = np.zeros_like(logits)
    for index in np.ndindex(logits.shape):
        shifted = logits.copy()
        shifted[index] += h
        upper = kl_divergence(teacher_normalized, row_softmax(shifted, tau))
        shifted[index] -= 2 * h
        lower = kl_divergence(teacher_normalized, row_softmax(shifted, tau))
        grad[index] = (upper - lower) / (2 * h)
    return grad


def cross_entropy(logits, label):
    """-ln softmax(logits)[label] via log-sum-exp."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.size < 1:
        raise ShapeError(f'logits must be a non-empty vector, got shape {logits.shape}')
    if not 0 <= label < logits.size:
        raise ArgumentError(f'label {label} outside 0..{logits.size - 1}')
    return max(0.0, float(logsumexp(logits) - logits[label]))


@dataclass(frozen=True, eq=False)
class LossReport:
    l_vqa: float
    l_tg: float
    alpha: float
    total: float
    grad_student_logits: np.ndarray

    def to_dict(self):
        return {
            'l_vqa': self.l_vqa,
            'l_tg': self.l_tg,
            'alpha': self.alpha,
            'total': self.total,
            'grad_student_logits': np.asarray(self.grad_student_logits).tolist(),
        }


def total_loss(l_vqa, l_tg, alpha=DEFAULT_ALPHA, grad_student_logits=None):
    """L = L_vqa + alpha * L_TG."""
    if not alpha >= 0:
        raise ConfigError(f'alpha must be non-negative, got {alpha}')
    grad = np.zeros((0, 0)) if grad_student_logits is None else grad_student_logits
    return LossReport(l_vqa, l_tg, alpha, l_vqa + alpha * l_tg, grad)
