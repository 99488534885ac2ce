"""Layer-wise compositional circuit search with BIC ranking and BO refinement.

Starting from the encoding-only circuit, every layer appends each valid
gate layer to each beam member, scores all children, keeps the ``K`` best
and then Bayesian-optimises the parameters of the top ``M``. Refined
parameters stay in the beam and are inherited by the next layer's
children; new R_Z gates start at ``theta = 1``.

Variants
--------
``full``
    as above.
``m_zero``
    no parameter optimisation.
``m_zero_one``
    growth as ``m_zero``; after each layer a copy of the best circuit is
    refined for reporting only and does not re-enter the beam.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
import logging
import math

import numpy as np

from . import calibration, metrics
from .bayesopt import BoConfig, bo_minimize
from .circuit import CircuitDescriptor, enumerate_layers, extend_theta

log = logging.getLogger(__name__)

VARIANTS = ("full", "m_zero", "m_zero_one")
METRICS = ("bic", "validation_accuracy", "f1")


class SearchConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    K: int = 5
    M: int = 2
    L_max: int = 4
    bo: BoConfig = field(default_factory=BoConfig)
    svm_C: float = 1.0
    svm_tol: float = 1e-3
    cv_folds: int = 4
    bic_n: str = "validation"
    platt_smoothing: bool = False
    seed: int = 0
    variant: str = "full"
    threads: int = 1

    def __post_init__(self):
        if self.K < 1:
            raise SearchConfigError(f"K must be >= 1, got {self.K}")
        if not 0 <= self.M <= self.K:
            raise SearchConfigError(f"M must satisfy 0 <= M <= K, got M={self.M}, K={self.K}")
        if self.L_max < 1:
            raise SearchConfigError(f"L_max must be >= 1, got {self.L_max}")
        if self.variant not in VARIANTS:
            raise SearchConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.bic_n not in ("validation", "train"):
            raise SearchConfigError(f"bic_n must be 'validation' or 'train', got {self.bic_n!r}")

    @property
    def effective_M(self):
        return self.M if self.variant == "full" else 0

    def eval_settings(self):
        return calibration.EvalSettings(self.svm_C, self.svm_tol, self.cv_folds, self.seed,
                                        self.bic_n, self.platt_smoothing)

    def to_dict(self):
        d = asdict(self)
        d["bo"]["bounds"] = list(d["bo"]["bounds"])
        return d


@dataclass
class BeamEntry:
    model: calibration.CalibratedModel
    bo_trace: list | None = None

    def to_dict(self):
        out = _finite(self.model.summary())
        if self.bo_trace is not None:
            out["bo_trace"] = [_finite(t) for t in self.bo_trace]
        return out


@dataclass
class SearchRecord:
    layer: int
    metric: str
    beam: list
    n_candidates: int
    n_failed: int = 0
    n_bo_evaluations: int = 0
    space_size: int = 0
    refined: BeamEntry | None = None

    @property
    def best(self):
        return self.beam[0].model

    @property
    def evaluations_count(self):
        return self.n_candidates + self.n_bo_evaluations

    def to_dict(self):
        return {
            "layer": self.layer,
            "metric": self.metric,
            "n_candidates": self.n_candidates,
            "n_failed": self.n_failed,
            "n_bo_evaluations": self.n_bo_evaluations,
            "space_size": self.space_size,
            "best_bic": _num(self.best.bic),
            "beam": [e.to_dict() for e in self.beam],
            "refined": None if self.refined is None else self.refined.to_dict(),
        }


def _num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _finite(d):
    return {k: _num(v) for k, v in d.items()}


def _nan_last(v):
    return -v if np.isfinite(v) else np.inf


BIC_DECIMALS = 9


def rank_key(model, metric="bic"):
    """Sort key: active metric, then BIC, then canonical descriptor order.

    BIC is rounded to ``BIC_DECIMALS`` so that kernels equal up to
    floating-point noise (e.g. H/CNOT layers that cancel in the overlap)
    fall back to the descriptor order instead of roundoff.
    """
    bic = round(model.bic, BIC_DECIMALS) if np.isfinite(model.bic) else np.inf
    tail = (bic, model.descriptor.sort_key(), tuple(model.theta))
    if metric == "bic":
        return tail
    if metric == "validation_accuracy":
        return (_nan_last(model.val_balanced_accuracy),) + tail
    if metric == "f1":
        return (_nan_last(model.val_f1),) + tail
    raise ValueError(f"unknown metric {metric!r}")


def _evaluate(c, theta, data, settings):
    try:
        return calibration.evaluate_candidate(c, theta, data, settings)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        log.warning("candidate %s failed: %s", c, exc)
        return None


def _map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _seed(*parts):
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def bo_refine(model, data, settings, bo):
    """Optimise all parameters of ``model``'s circuit, starting from its theta.

    Returns ``(model, trace)``; the starting point is part of the initial
    design so the returned BIC never exceeds the input's.
    """
    if model.d == 0:
        return model, []
    c = model.descriptor
    best = {"bic": model.bic, "model": model}

    def objective(theta):
        if np.array_equal(theta, model.theta):
            return model.bic
        m = _evaluate(c, theta, data, settings)
        if m is None:
            return np.inf
        if m.bic < best["bic"]:
            best["bic"], best["model"] = m.bic, m
        return m.bic

    result = bo_minimize(objective, model.d, bo, x0=model.theta[None, :])
    return best["model"], result.trace


def refine_best(record, bo, data, settings=calibration.EvalSettings()):
    """BO-refine the lowest-ranked circuit of ``record`` (unchanged if d = 0)."""
    if not record.beam:
        raise ValueError("record has an empty beam")
    model, _ = bo_refine(record.beam[0].model, data, settings, bo)
    return model


def compositional_search(data, config, metric="bic"):
    """Grow circuits layer by layer; returns one SearchRecord per layer.

    ``data`` carries only training and validation arrays.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    n = np.asarray(data.X_train).shape[1]
    layer_specs = enumerate_layers(n)
    settings = config.eval_settings()
    parents = [(CircuitDescriptor(n), np.zeros(0))] * config.K
    records = []
    for L in range(1, config.L_max + 1):
        tasks, seen = [], set()
        for pc, ptheta in parents:
            for layer in layer_specs:
                c = pc.append(layer)
                theta = extend_theta(ptheta, layer)
                key = (c.layers, theta.tobytes())
                if key not in seen:
                    seen.add(key)
                    tasks.append((c, theta))
        models = _map(lambda t: _evaluate(t[0], t[1], data, settings), tasks, config.threads)
        pool = sorted((m for m in models if m is not None), key=lambda m: rank_key(m, metric))
        if not pool:
            raise RuntimeError(f"every candidate failed at layer {L}")
        beam = [BeamEntry(m) for m in pool[:config.K]]

        jobs = [(r, e.model) for r, e in enumerate(beam[:config.effective_M]) if e.model.d > 0]
        refined = _map(
            lambda job: bo_refine(job[1], data, settings,
                                  replace(config.bo, seed=_seed(config.seed, L, job[0]))),
            jobs, config.threads)
        n_bo = 0
        for (r, _), (m, trace) in zip(jobs, refined):
            beam[r] = BeamEntry(m, trace)
            n_bo += len(trace)
        beam.sort(key=lambda e: rank_key(e.model, metric))

        report_copy = None
        if config.variant == "m_zero_one":
            m, trace = bo_refine(beam[0].model, data, settings,
                                 replace(config.bo, seed=_seed(config.seed, L, 0)))
            report_copy = BeamEntry(m, trace)
            n_bo += len(trace)

        rec = SearchRecord(L, metric, beam, len(tasks), len(tasks) - len(pool), n_bo,
                           len(layer_specs) ** L, report_copy)
        log.info("layer %d: best %s BIC %.4f (%d candidates)", L, rec.best.descriptor,
                 rec.best.bic, rec.n_candidates)
        records.append(rec)
        parents = [(e.model.descriptor, e.model.theta) for e in beam]
    return records


def metric_ablation_search(data, config, metric):
    """Same search with the beam ranked by ``metric`` (BO still minimises BIC)."""
    return compositional_search(data, config, metric=metric)


def evaluate_final(model, X_test, y_test):
    """Held-out metrics for a calibrated model; never fed back into the search."""
    return metrics.report(y_test, model.predict(X_test))
