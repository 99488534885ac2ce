"""Platt calibration of SVM outputs and BIC scoring of candidate circuits.

Class-1 probabilities are ``p = 1 / (1 + exp(a*f + b))`` for decision value
``f``. ``(a, b)`` are fitted on pooled out-of-fold decision values from the
training set, then applied to the validation set, whose log-likelihood
feeds ``BIC = -2 log L + d log N``.
"""
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.special import expit

from . import kernelmat, metrics, svm
from .circuit import circuit_states, param_count, serialize

PROB_EPS = 1e-12


class CalibrationError(ValueError):
    pass


class OrientationWarning(UserWarning):
    """Fitted slope says higher SVM scores mean class 0."""


@dataclass(frozen=True)
class PlattCoefficients:
    a: float
    b: float


def platt_probability(f_hat, coef):
    return expit(-(coef.a * np.asarray(f_hat, dtype=float) + coef.b))


def _targets(y, smoothing):
    y = np.asarray(y, dtype=float)
    if not smoothing:
        return y
    n_pos = y.sum()
    n_neg = y.size - n_pos
    return np.where(y == 1, (n_pos + 1) / (n_pos + 2), 1 / (n_neg + 2))


def fit_platt(f_hat, y, smoothing=False, tol=1e-10, max_iter=200):
    """Maximum-likelihood sigmoid fit by damped Newton with backtracking.

    Targets are the raw labels unless ``smoothing`` is set, in which case
    Platt's prior-corrected targets are used. If the scores are constant the
    slope is unidentifiable and ``a = 0``, ``b = log(n0 / n1)`` is returned.
    """
    f = np.asarray(f_hat, dtype=float)
    y = np.asarray(y)
    if f.shape != y.shape:
        raise CalibrationError(f"shape mismatch: {f.shape} vs {y.shape}")
    if not (np.any(y == 1) and np.any(y == 0)):
        raise CalibrationError("Platt fit needs samples of both classes")
    if not np.all(np.isfinite(f)):
        raise CalibrationError("decision values must be finite")
    t = _targets(y, smoothing)
    n = f.size
    prior_b = float(np.log((n - t.sum()) / t.sum()))
    if np.ptp(f) == 0:
        return PlattCoefficients(0.0, prior_b)

    def nll(a, b):
        z = a * f + b
        return float(np.sum(np.logaddexp(0.0, z) - (1.0 - t) * z))

    a, b = 0.0, prior_b
    value = nll(a, b)
    for _ in range(max_iter):
        p = expit(-(a * f + b))
        r = t - p
        g = np.array([r @ f, r.sum()])
        if np.max(np.abs(g)) / n < tol:
            break
        w = p * (1.0 - p)
        H = np.array([[w @ (f * f), w @ f], [w @ f, w.sum()]])
        H += 1e-12 * np.eye(2)
        if np.linalg.cond(H) < 1e12:
            step = -np.linalg.solve(H, g)
        else:
            step = -g / max(np.max(np.abs(g)), 1.0)
        slope = g @ step
        if slope >= 0:  # not a descent direction
            step, slope = -g, -(g @ g)
        s = 1.0
        while s >= 1e-10:
            cand = nll(a + s * step[0], b + s * step[1])
            if cand <= value + 1e-4 * s * slope:
                break
            s /= 2.0
        else:
            break
        a, b, value = a + s * step[0], b + s * step[1], cand
    if a > 0:
        warnings.warn(f"Platt slope a={a:.3g} is positive", OrientationWarning, stacklevel=2)
    return PlattCoefficients(float(a), float(b))


def stratified_folds(y, folds, seed):
    """Fold id per sample: seeded shuffle within each class, then round-robin."""
    y = np.asarray(y)
    if not 2 <= folds <= y.size:
        raise ValueError(f"folds must be in [2, {y.size}], got {folds}")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == cls)) for cls in np.unique(y)])
    fold_of = np.empty(y.size, dtype=int)
    fold_of[order] = np.arange(y.size) % folds
    return fold_of


def out_of_fold_scores(train_f_producer, y_train, folds=4, seed=0):
    """Pool decision values for each fold from a model fitted on its complement.

    ``train_f_producer(train_idx, held_out_idx)`` must return decision
    values for ``held_out_idx``.
    """
    fold_of = stratified_folds(y_train, folds, seed)
    scores = np.empty(len(fold_of))
    for k in range(folds):
        held = np.flatnonzero(fold_of == k)
        rest = np.flatnonzero(fold_of != k)
        scores[held] = train_f_producer(rest, held)
    return scores


def fit_platt_cv(train_f_producer, y_train, folds=4, seed=0, smoothing=False):
    scores = out_of_fold_scores(train_f_producer, y_train, folds, seed)
    return fit_platt(scores, y_train, smoothing=smoothing)


def log_likelihood(p, y, eps=PROB_EPS):
    """Signed Bernoulli log-likelihood (<= 0) with ``p`` clipped to ``[eps, 1-eps]``."""
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    if p.shape != y.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {y.shape}")
    p = np.clip(p, eps, 1.0 - eps)
    return float(np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def bic(log_lik, d, n):
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    return -2.0 * log_lik + d * np.log(n)


def model_probabilities(bics):
    """Selection probabilities ``exp(-BIC/2)`` normalised over the family."""
    z = -0.5 * np.asarray(bics, dtype=float)
    if z.size == 0:
        raise ValueError("need at least one BIC value")
    z = z - np.max(z)
    w = np.exp(z)
    return w / w.sum()


@dataclass(frozen=True)
class EvalSettings:
    C: float = 1.0
    tol: float = 1e-3
    cv_folds: int = 4
    cv_seed: int = 0
    bic_n: str = "validation"  # or "train"
    platt_smoothing: bool = False


@dataclass(frozen=True)
class CalibratedModel:
    descriptor: object
    theta: np.ndarray
    svm: svm.SvmModel
    platt: PlattCoefficients
    log_likelihood: float
    bic: float
    d: int
    n_eval: int
    val_balanced_accuracy: float
    val_f1: float
    train_X: np.ndarray = field(repr=False, default=None)
    val_decision: np.ndarray = field(repr=False, default=None)

    def decision(self, X):
        K = kernelmat.cross_kernel(X, self.train_X, self.descriptor, self.theta)
        return svm.decision_function(self.svm, K)

    def predict(self, X):
        return (self.decision(X) >= 0).astype(int)

    def predict_proba(self, X):
        return platt_probability(self.decision(X), self.platt)

    def summary(self):
        return {
            "descriptor": serialize(self.descriptor, sep=";"),
            "theta": [float(v) for v in self.theta],
            "d": self.d,
            "platt_a": self.platt.a,
            "platt_b": self.platt.b,
            "log_likelihood": self.log_likelihood,
            "bic": self.bic,
            "n_eval": self.n_eval,
            "val_balanced_accuracy": self.val_balanced_accuracy,
            "val_f1": self.val_f1,
        }


def _safe(metric, counts):
    try:
        return float(metric(counts))
    except metrics.UndefinedMetricError:
        return float("nan")


def evaluate_candidate(c, theta, data, settings=EvalSettings()):
    """Train, calibrate and BIC-score one circuit on a train/validation split.

    ``data`` needs ``X_train, y_train, X_valid, y_valid``.
    """
    theta = np.asarray(theta, dtype=float)
    y_tr = np.asarray(data.y_train)
    y_va = np.asarray(data.y_valid)
    S_tr = circuit_states(c, theta, data.X_train)
    S_va = circuit_states(c, theta, data.X_valid)
    K = kernelmat.gram_from_states(S_tr)
    model = svm.train_dual(K, y_tr, settings.C, settings.tol)

    def producer(rest, held):
        sub = svm.train_dual(K[np.ix_(rest, rest)], y_tr[rest], settings.C, settings.tol)
        return svm.decision_function(sub, K[np.ix_(held, rest)])

    platt = fit_platt_cv(producer, y_tr, settings.cv_folds, settings.cv_seed,
                         settings.platt_smoothing)
    f_va = svm.decision_function(model, kernelmat.cross_from_states(S_va, S_tr))
    ll = log_likelihood(platt_probability(f_va, platt), y_va)
    n = y_va.size if settings.bic_n == "validation" else y_tr.size
    d = param_count(c)
    counts = metrics.ConfusionCounts.from_labels(y_va, (f_va >= 0).astype(int))
    return CalibratedModel(
        descriptor=c,
        theta=theta,
        svm=model,
        platt=platt,
        log_likelihood=ll,
        bic=float(bic(ll, d, n)),
        d=d,
        n_eval=int(n),
        val_balanced_accuracy=_safe(metrics.balanced_accuracy, counts),
        val_f1=_safe(metrics.f1, counts),
        train_X=np.asarray(data.X_train, dtype=float),
        val_decision=f_va,
    )
