"""Classical-kernel SVM baselines tuned on the validation set."""
from dataclasses import asdict, dataclass
import itertools
import logging
import warnings

import numpy as np
from scipy.spatial.distance import cdist

from . import metrics, svm

log = logging.getLogger(__name__)

KINDS = ("rbf", "linear", "poly3", "sigmoid")
GAMMA_GRID = tuple(float(g) for g in np.geomspace(1e-3, 1e3, 13))
COEF0_GRID = (-1.0, 0.0, 1.0)
C_GRID = tuple(float(c) for c in np.geomspace(1e-2, 1e2, 9))


class KernelSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ClassicalKernelSpec:
    kind: str
    gamma: float = 1.0
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KernelSpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "linear" and not self.gamma > 0:
            raise KernelSpecError(f"gamma must be positive, got {self.gamma}")


def classical_gram(X, Xp, spec):
    """Kernel matrix ``k(X[i], Xp[j])`` for a classical spec."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Xp = np.atleast_2d(np.asarray(Xp, dtype=float))
    if X.shape[1] != Xp.shape[1]:
        raise ValueError(f"feature dimensions differ: {X.shape[1]} vs {Xp.shape[1]}")
    if spec.kind == "rbf":
        return np.exp(-spec.gamma * cdist(X, Xp, "sqeuclidean"))
    dot = X @ Xp.T
    if spec.kind == "linear":
        return dot
    if spec.kind == "poly3":
        return (spec.gamma * dot + spec.coef0) ** 3
    return np.tanh(spec.gamma * dot + spec.coef0)


def _grid(kind):
    if kind == "linear":
        return [ClassicalKernelSpec("linear")]
    if kind == "rbf":
        return [ClassicalKernelSpec("rbf", g) for g in GAMMA_GRID]
    return [ClassicalKernelSpec(kind, g, c0) for g, c0 in itertools.product(GAMMA_GRID, COEF0_GRID)]


@dataclass
class BaselineResult:
    spec: ClassicalKernelSpec
    C: float
    model: svm.SvmModel
    X_train: np.ndarray
    validation: dict

    def decision(self, X):
        return svm.decision_function(self.model, classical_gram(X, self.X_train, self.spec))

    def predict(self, X):
        return (self.decision(X) >= 0).astype(int)

    def summary(self):
        return {**asdict(self.spec), "C": self.C, "validation": self.validation}


def tune_baseline(data, kind, tol=1e-3, max_iter=20_000):
    """Grid search maximising validation balanced accuracy.

    ``data`` needs ``X_train, y_train, X_valid, y_valid``. Grid points are
    visited in a fixed order and the first best one wins. Points whose
    training fails are skipped.
    """
    if kind not in KINDS:
        raise KernelSpecError(f"kind must be one of {KINDS}, got {kind!r}")
    X_tr = np.asarray(data.X_train, dtype=float)
    X_va = np.asarray(data.X_valid, dtype=float)
    y_tr, y_va = np.asarray(data.y_train), np.asarray(data.y_valid)
    best, best_score = None, -np.inf
    for spec in _grid(kind):
        K = classical_gram(X_tr, X_tr, spec)
        K_va = classical_gram(X_va, X_tr, spec)
        for C in C_GRID:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    model = svm.train_dual(K, y_tr, C, tol, max_iter=max_iter)
            except (ValueError, ArithmeticError) as exc:
                log.debug("skipping %s C=%g: %s", spec, C, exc)
                continue
            pred = (svm.decision_function(model, K_va) >= 0).astype(int)
            score = metrics.balanced_accuracy(metrics.ConfusionCounts.from_labels(y_va, pred))
            if score > best_score:
                best_score = score
                best = BaselineResult(spec, C, model, X_tr, metrics.report(y_va, pred))
    if best is None:
        raise svm.TrainingError(f"every grid point failed for kind {kind!r}")
    return best


def tune_all(data, kinds=KINDS):
    return {kind: tune_baseline(data, kind) for kind in kinds}
