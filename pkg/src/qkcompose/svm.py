"""Soft-margin kernel SVM on a precomputed Gram matrix.

The dual

    max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0

is solved by SMO with maximal-violating-pair working-set selection. The
inner loop lives in the backend core (compiled when available).
"""
from dataclasses import dataclass
import warnings

import numpy as np

from . import _backend

MAX_ITER = 100_000


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class SvmModel:
    alpha: np.ndarray
    bias: float
    labels_pm: np.ndarray
    C: float
    n_iter: int = 0
    kkt_gap: float = 0.0

    @property
    def support(self):
        return np.flatnonzero(self.alpha > 0)


def to_pm(y):
    y = np.asarray(y)
    if not np.all((y == 0) | (y == 1)):
        raise TrainingError("labels must be 0 or 1")
    return np.where(y == 1, 1.0, -1.0)


def train_dual(K, y, C=1.0, tol=1e-3, max_iter=MAX_ITER, backend=None):
    """Fit the dual on Gram matrix ``K`` with labels ``y`` in {0, 1}.

    Stops when the maximal KKT violation drops below ``tol`` or after
    ``max_iter`` pair updates (a warning is raised in the latter case only
    when ``max_iter`` is the default cap).
    """
    K = np.ascontiguousarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise TrainingError(f"kernel matrix must be square, got shape {K.shape}")
    y_pm = to_pm(y)
    if y_pm.shape[0] != K.shape[0]:
        raise TrainingError(f"{y_pm.shape[0]} labels for a {K.shape[0]}-point kernel")
    if np.all(y_pm == y_pm[0]):
        raise TrainingError("training labels contain a single class")
    if not C > 0:
        raise TrainingError(f"C must be positive, got {C}")
    core = _backend.core if backend is None else _backend.get(backend)
    alpha, bias, n_iter, gap = core.smo(K, np.ascontiguousarray(y_pm), float(C), float(tol), int(max_iter))
    if n_iter >= max_iter and max_iter == MAX_ITER:
        warnings.warn(f"SMO hit the iteration cap with KKT gap {gap:.3g}", RuntimeWarning)
    return SvmModel(np.asarray(alpha), float(bias), y_pm, float(C), int(n_iter), float(gap))


def decision_function(model, K_eval):
    K_eval = np.atleast_2d(np.asarray(K_eval, dtype=float))
    if K_eval.shape[1] != model.alpha.shape[0]:
        raise ValueError(
            f"kernel has {K_eval.shape[1]} columns, model has {model.alpha.shape[0]} training points"
        )
    return K_eval @ (model.alpha * model.labels_pm) + model.bias


def predict(model, K_eval):
    """Class labels in {0, 1}; a zero decision value goes to class 1."""
    return (decision_function(model, K_eval) >= 0).astype(int)


def dual_objective(alpha, K, y_pm):
    ay = np.asarray(alpha) * np.asarray(y_pm)
    return float(np.sum(alpha) - 0.5 * ay @ np.asarray(K) @ ay)


def kkt_violation(model, K):
    """Maximal violating-pair gap of ``model.alpha``, recomputed from scratch."""
    a, y, C = model.alpha, model.labels_pm, model.C
    grad = y * (np.asarray(K) @ (a * y)) - 1.0
    v = -y * grad
    up = np.where(y > 0, a < C, a > 0)
    low = np.where(y > 0, a > 0, a < C)
    if not up.any() or not low.any():
        return 0.0
    return max(float(v[up].max() - v[low].min()), 0.0)
