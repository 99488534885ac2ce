"""Gaussian-process Bayesian optimisation over a box of circuit parameters.

The surrogate models the *negated* objective so that the upper confidence
bound ``mu + kappa * sigma`` is maximised while the objective (BIC) is
minimised.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist, pdist


class GpFitError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class GpModel:
    X: np.ndarray
    y: np.ndarray
    lengthscale: float
    signal_variance: float
    jitter: float
    y_mean: float = field(repr=False)
    y_std: float = field(repr=False)
    chol: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)


def rbf(A, B, lengthscale, signal_variance=1.0):
    return signal_variance * np.exp(-cdist(A, B, "sqeuclidean") / (2.0 * lengthscale**2))


def gp_fit(X, y, lengthscale, signal_variance=1.0, jitter=1e-8, max_jitter=1e-2):
    """Exact GP regression on standardised targets.

    The jitter added to the covariance diagonal grows tenfold until the
    Cholesky factorisation succeeds or ``max_jitter`` is exceeded.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.size or y.size == 0:
        raise ValueError(f"need matching non-empty inputs, got {X.shape[0]} points and {y.size} targets")
    if not np.all(np.isfinite(y)):
        raise ValueError("GP targets must be finite")
    if not lengthscale > 0:
        raise ValueError("lengthscale must be positive")
    y_mean = float(y.mean())
    y_std = float(y.std())
    if not y_std > 0:
        y_std = 1.0
    ys = (y - y_mean) / y_std
    K0 = rbf(X, X, lengthscale, signal_variance)
    eps = jitter
    while True:
        try:
            L = cholesky(K0 + eps * np.eye(y.size), lower=True)
            break
        except np.linalg.LinAlgError:
            eps = eps * 10 if eps > 0 else 1e-10
            if eps > max_jitter:
                raise GpFitError("covariance is not positive definite even with maximal jitter") from None
    weights = cho_solve((L, True), ys)
    return GpModel(X, y, float(lengthscale), float(signal_variance), eps, y_mean, y_std, L, weights)


def gp_predict(model, theta):
    """Posterior mean and standard deviation at one point or a batch of points."""
    T = np.asarray(theta, dtype=float)
    single = T.ndim == 1
    T = np.atleast_2d(T)
    if T.shape[1] != model.X.shape[1]:
        raise ValueError(f"query has dimension {T.shape[1]}, model has {model.X.shape[1]}")
    Ks = rbf(T, model.X, model.lengthscale, model.signal_variance)
    mean = Ks @ model.weights
    v = solve_triangular(model.chol, Ks.T, lower=True)
    var = np.clip(model.signal_variance - np.sum(v * v, axis=0), 0.0, None)
    mean = mean * model.y_std + model.y_mean
    std = np.sqrt(var) * model.y_std
    if single:
        return float(mean[0]), float(std[0])
    return mean, std


def ucb_acquisition(model, theta, kappa=1.0):
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    mean, std = gp_predict(model, theta)
    return mean + kappa * std


def log_marginal_likelihood(model):
    ys = (model.y - model.y_mean) / model.y_std
    return float(-0.5 * ys @ model.weights - np.log(np.diag(model.chol)).sum()
                 - 0.5 * ys.size * np.log(2 * np.pi))


def median_lengthscale(X, fallback):
    d = pdist(np.atleast_2d(X))
    d = d[d > 0]
    return float(np.median(d)) if d.size else float(fallback)


def fit_lengthscale(X, y, span, jitter=1e-8):
    """Lengthscale maximising the marginal likelihood over a log grid."""
    best, best_ll = None, -np.inf
    for ell in np.geomspace(1e-2 * span, 10 * span, 31):
        try:
            ll = log_marginal_likelihood(gp_fit(X, y, ell, jitter=jitter))
        except GpFitError:
            continue
        if ll > best_ll:
            best, best_ll = ell, ll
    return best if best is not None else span


@dataclass(frozen=True)
class BoConfig:
    n_init: int = 50
    iterations: int | None = None  # None -> 10 * d
    kappa: float = 1.0
    bounds: tuple = (0.0, 2.0 * np.pi)
    seed: int = 0
    n_candidates: int = 256
    n_starts: int = 16
    jitter: float = 1e-8
    learn_hyperparameters: bool = False

    def __post_init__(self):
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.iterations is not None and self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError(f"invalid bounds {self.bounds}")

    def n_iterations(self, d):
        return 10 * d if self.iterations is None else self.iterations


@dataclass
class BoResult:
    theta: np.ndarray
    value: float
    trace: list


def _box(bounds, d):
    lo, hi = (float(b) for b in bounds)
    # upper bound is open
    return np.full(d, lo), np.full(d, np.nextafter(hi, lo))


def maximize_acquisition(model, lo, hi, kappa, rng, n_candidates=256, n_starts=16, max_sweeps=200):
    """Random multi-start followed by coordinate ascent from the best starts."""
    d = lo.size
    cand = rng.uniform(lo, hi, size=(n_candidates, d))
    vals = ucb_acquisition(model, cand, kappa)
    top = np.argsort(-vals, kind="stable")[:n_starts]
    P, v = cand[top].copy(), vals[top].copy()
    span = hi - lo
    h = 0.1 * span
    for _ in range(max_sweeps):
        moved = False
        for k in range(d):
            for sign in (1.0, -1.0):
                Q = P.copy()
                Q[:, k] = np.clip(Q[:, k] + sign * h[k], lo[k], hi[k])
                q = ucb_acquisition(model, Q, kappa)
                better = q > v
                if better.any():
                    P[better], v[better] = Q[better], q[better]
                    moved = True
        if not moved:
            h = h / 2.0
            if np.all(h < 1e-4 * span):
                break
    best = int(np.argmax(v))
    return P[best], float(v[best])


def bo_minimize(objective, d, config=BoConfig(), x0=None):
    """Minimise ``objective`` over the configured box.

    The initial design is the rows of ``x0`` (if any) topped up with uniform
    random points to ``n_init``; ``config.n_iterations(d)`` acquisition steps
    follow. Non-finite objective values count as ``+inf`` and are left out
    of the surrogate.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(config.seed)
    lo, hi = _box(config.bounds, d)
    design = np.empty((0, d)) if x0 is None else np.atleast_2d(np.asarray(x0, dtype=float))
    if design.shape[1] != d:
        raise ValueError(f"x0 has dimension {design.shape[1]}, expected {d}")
    n_rand = max(config.n_init - design.shape[0], 0)
    design = np.vstack([design, rng.uniform(lo, hi, size=(n_rand, d))])

    X, vals, trace = [], [], []
    best_val, best_x = np.inf, design[0].copy()

    def record(x, phase):
        nonlocal best_val, best_x
        val = float(objective(x.copy()))
        if not np.isfinite(val):
            val = np.inf
        X.append(x.copy())
        vals.append(val)
        if val < best_val:
            best_val, best_x = val, x.copy()
        trace.append({"iteration": len(trace), "phase": phase,
                      "theta": [float(t) for t in x], "value": val, "best": best_val})

    for x in design:
        record(x, "init")

    ell = median_lengthscale(design, fallback=float(np.mean(hi - lo)))
    for _ in range(config.n_iterations(d)):
        Xa, va = np.array(X), np.array(vals)
        ok = np.isfinite(va)
        if not ok.any():
            record(rng.uniform(lo, hi), "random")
            continue
        if config.learn_hyperparameters:
            ell = fit_lengthscale(Xa[ok], -va[ok], float(np.mean(hi - lo)), config.jitter)
        model = gp_fit(Xa[ok], -va[ok], ell, jitter=config.jitter)
        x_next, _ = maximize_acquisition(model, lo, hi, config.kappa, rng,
                                         config.n_candidates, config.n_starts)
        if np.min(np.linalg.norm(Xa - x_next, axis=1)) < 1e-9:
            record(rng.uniform(lo, hi), "random")
        else:
            record(x_next, "bo")
    return BoResult(best_x, best_val, trace)
