"""Command-line entry point: ``qkcompose <command> [options]``.

Commands
--------
search           compositional search, per-layer table and held-out metrics
baselines        tuned classical-kernel SVMs on the same split
convergence      search over a sweep of (K, M) pairs
metric-ablation  beam ranked by BIC, validation accuracy and F1
fixed-kernel     retrain one circuit's kernel at several training sizes

Settings come from a flat JSON file (``--config``); command-line flags
override file values. Every output file echoes the resolved settings, the
package version and the split digest.

Exit codes: 0 success, 1 runtime failure, 2 configuration or I/O error.
"""
import argparse
import csv
from dataclasses import asdict, dataclass, field, fields
import io
import json
import logging
import os
from pathlib import Path
import sys
import warnings

import numpy as np

from . import __version__, _backend, classical, data, kernelmat, metrics, svm
from .bayesopt import BoConfig
from .calibration import OrientationWarning
from .circuit import DescriptorParseError, default_theta, deserialize, param_count
from .search import METRICS, SearchConfig, SearchConfigError, compositional_search, evaluate_final

log = logging.getLogger("qkcompose")

DATASETS = ("adhoc", "synthetic4d", "csv")
CSV_COLUMNS = ("layer", "rank", "descriptor_text", "d", "bic", "val_balanced_acc", "val_f1")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dataset: str = "adhoc"
    csv_path: str | None = None
    label_column: str = "label"
    feature_columns: list | None = None
    scaling: str = "auto"  # none for generated ad hoc data, to_0_2pi otherwise
    count: int | None = None  # generator size; None -> 1300 ad hoc, 1500 synthetic
    adhoc_n: int = 3
    adhoc_gap: float = 0.3
    adhoc_feature_map: str = "product"
    n_train: int = 100
    n_valid: int = 100
    K: int = 5
    M: int = 2
    L_max: int = 4
    variant: str = "full"
    bo_n_init: int = 50
    bo_iterations: int | None = None
    bo_kappa: float = 1.0
    svm_C: float = 1.0
    svm_tol: float = 1e-3
    cv_folds: int = 4
    bic_n: str = "validation"
    platt_smoothing: bool = False
    baselines: list = field(default_factory=lambda: list(classical.KINDS))
    k_list: list | None = None
    m_list: list = field(default_factory=lambda: [0, 1, 2, 5])
    circuit: str | None = None
    theta: list | None = None
    train_sizes: list = field(default_factory=lambda: [100, 200])
    dump_gram: bool = False
    out_dir: str = "qkcompose_out"
    seed: int = 0
    threads: int = 1

    def validate(self):
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.dataset == "csv" and not self.csv_path:
            raise ConfigError("dataset 'csv' needs csv_path")
        if self.scaling != "auto" and self.scaling not in data.SCALING_MODES:
            raise ConfigError(f"scaling must be 'auto' or one of {data.SCALING_MODES}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        unknown = set(self.baselines) - set(classical.KINDS)
        if unknown:
            raise ConfigError(f"unknown baseline kernels {sorted(unknown)}")
        self.search_config()  # raises on invalid K/M/L_max/variant

    def search_config(self, K=None, M=None, variant=None):
        bo = BoConfig(n_init=self.bo_n_init, iterations=self.bo_iterations, kappa=self.bo_kappa)
        try:
            return SearchConfig(K=self.K if K is None else K, M=self.M if M is None else M,
                                L_max=self.L_max, bo=bo, svm_C=self.svm_C, svm_tol=self.svm_tol,
                                cv_folds=self.cv_folds, bic_n=self.bic_n,
                                platt_smoothing=self.platt_smoothing, seed=self.seed,
                                variant=variant or self.variant, threads=self.threads)
        except (SearchConfigError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError(f"unknown config keys in {path}: {extra}")
    return doc


# -- data -------------------------------------------------------------------

@dataclass
class Prepared:
    dataset: data.Dataset
    split: data.DataSplit

    @property
    def tv(self):
        return data.train_validation(self.dataset, self.split)

    @property
    def test(self):
        return data.test_set(self.dataset, self.split)


def prepare_data(cfg):
    if cfg.dataset == "csv":
        path = Path(cfg.csv_path)
        if not path.is_file():
            raise ConfigError(f"dataset file not found: {path}")
        ds = data.load_csv(path, cfg.label_column, cfg.feature_columns)
    elif cfg.dataset == "adhoc":
        ds = data.adhoc_generate(cfg.adhoc_n, cfg.adhoc_gap, cfg.count or 1300, cfg.seed,
                                 feature_map=cfg.adhoc_feature_map)
    else:
        ds = data.synthetic_4d_generate(cfg.count or 1500, cfg.seed)
    sp = data.split(ds, cfg.n_train, cfg.n_valid, cfg.seed)
    mode = cfg.scaling
    if mode == "auto":
        mode = "none" if cfg.dataset == "adhoc" else "to_0_2pi"
    ds = data.scale_features(ds, mode, fit_indices=sp.train)
    return Prepared(ds, sp)


# -- output -----------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def _envelope(cfg, prep, command, body):
    return {"command": command, "version": __version__, "config": asdict(cfg),
            "dataset": {"name": prep.dataset.name, "size": len(prep.dataset),
                        "features": prep.dataset.feature_dim,
                        "provenance": prep.dataset.provenance},
            "split": {"digest": prep.split.digest(), "n_train": int(prep.split.train.size),
                      "n_valid": int(prep.split.validation.size),
                      "n_test": int(prep.split.test.size)},
            **body}


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows, cfg=None):
    """CSV with a leading ``#`` comment carrying version and settings."""
    buf = io.StringIO()
    if cfg is not None:
        buf.write(f"# qkcompose {__version__} config={json.dumps(asdict(cfg), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else _fmt(v) for v in r])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "" if not np.isfinite(v) else repr(float(v))
    return v


def _nan(v):
    return v if v is not None and np.isfinite(v) else float("nan")


# -- commands ---------------------------------------------------------------

def _layer_rows(records):
    rows = []
    for rec in records:
        for rank, entry in enumerate(rec.beam):
            m = entry.model
            rows.append((rec.layer, rank, str(m.descriptor), m.d, m.bic,
                         _nan(m.val_balanced_accuracy), _nan(m.val_f1)))
    return rows


def _final_model(records, variant):
    last = records[-1]
    if variant == "m_zero_one" and last.refined is not None:
        return last.refined.model
    return last.best


def run_search(cfg, prep, K=None, M=None, metric="bic", variant=None):
    sc = cfg.search_config(K, M, variant)
    records = compositional_search(prep.tv, sc, metric=metric)
    X_test, y_test = prep.test
    per_layer = []
    for rec in records:
        row = {"layer": rec.layer, "best_bic": rec.best.bic,
               "descriptor": str(rec.best.descriptor),
               "test": evaluate_final(rec.best, X_test, y_test)}
        if rec.refined is not None:
            row["refined_test"] = evaluate_final(rec.refined.model, X_test, y_test)
        per_layer.append(row)
    final = _final_model(records, sc.variant)
    return sc, records, per_layer, final, evaluate_final(final, X_test, y_test)


def cmd_search(cfg, out):
    prep = prepare_data(cfg)
    sc, records, per_layer, final, test = run_search(cfg, prep)
    doc = _envelope(cfg, prep, "search", {
        "search_config": sc.to_dict(), "backend": _backend.NAME,
        "layers": [r.to_dict() for r in records], "per_layer": per_layer,
        "final": {**final.summary(), "test": test}})
    write_json(out / "search.json", doc)
    write_csv(out / "search.csv", CSV_COLUMNS, _layer_rows(records), cfg)
    if cfg.dump_gram:
        for rec in records:
            K = kernelmat.gram_matrix(prep.tv.X_train, rec.best.descriptor, rec.best.theta)
            kernelmat.save_csv(out / f"gram_L{rec.layer}.csv", K)
    print(f"{'L':>2}  {'best BIC':>12}  {'d':>2}  {'test bal.acc':>12}  {'lowest cls':>10}  descriptor")
    for row, rec in zip(per_layer, records):
        t = row["test"]
        print(f"{row['layer']:>2}  {row['best_bic']:>12.4f}  {rec.best.d:>2}  "
              f"{t['balanced_accuracy']:>12.4f}  {t['lowest_class_accuracy']:>10.4f}  {row['descriptor']}")
    print(f"final: {final.descriptor}  theta={np.round(final.theta, 4).tolist()}  "
          f"test TPR={test['tpr']:.4f} TNR={test['tnr']:.4f}")
    return 0


def cmd_baselines(cfg, out):
    prep = prepare_data(cfg)
    X_test, y_test = prep.test
    report, pred_cols = {}, {}
    for kind in cfg.baselines:
        res = classical.tune_baseline(prep.tv, kind, cfg.svm_tol)
        pred = res.predict(X_test)
        report[kind] = {**res.summary(), "test": metrics.report(y_test, pred)}
        pred_cols[kind] = pred
        print(f"{kind:>8}: C={res.C:.4g} gamma={res.spec.gamma:.4g} coef0={res.spec.coef0:g}  "
              f"val bal.acc={res.validation['balanced_accuracy']:.4f}  "
              f"test lowest cls={report[kind]['test']['lowest_class_accuracy']:.4f}")
    write_json(out / "baselines.json", _envelope(cfg, prep, "baselines", {
        "grids": {"gamma": classical.GAMMA_GRID, "coef0": classical.COEF0_GRID, "C": classical.C_GRID},
        "kernels": report}))
    rows = [(int(i), int(y), *(int(pred_cols[k][j]) for k in cfg.baselines))
            for j, (i, y) in enumerate(zip(prep.split.test, y_test))]
    write_csv(out / "baselines_test_predictions.csv", ("index", "y_true", *cfg.baselines), rows, cfg)
    return 0


def convergence_pairs(cfg):
    """(K, M) pairs: explicit ``k_list``, else base ``K`` with ``K = M`` once ``M`` exceeds it."""
    if cfg.k_list is not None:
        if len(cfg.k_list) != len(cfg.m_list):
            raise ConfigError("k_list and m_list must have the same length")
        pairs = list(zip(cfg.k_list, cfg.m_list))
    else:
        pairs = [(max(cfg.K, m), m) for m in cfg.m_list]
    for K, M in pairs:
        if M > K:
            raise ConfigError(f"M={M} exceeds K={K}")
        cfg.search_config(K, M)
    return pairs


def cmd_convergence(cfg, out):
    pairs = convergence_pairs(cfg)
    prep = prepare_data(cfg)
    rows, runs = [], []
    for K, M in pairs:
        _, records, per_layer, final, test = run_search(cfg, prep, K, M)
        rows.append((K, M, final.bic, test["lowest_class_accuracy"], test["balanced_accuracy"],
                     str(final.descriptor)))
        runs.append({"K": K, "M": M, "per_layer": per_layer, "final_test": test,
                     "final_bic": final.bic, "evaluations": sum(r.evaluations_count for r in records)})
        print(f"K={K:>3} M={M:>3}  BIC={final.bic:.4f}  lowest cls={test['lowest_class_accuracy']:.4f}")
    write_json(out / "convergence.json", _envelope(cfg, prep, "convergence", {"runs": runs}))
    write_csv(out / "convergence.csv",
              ("K", "M", "bic", "test_lowest_class_acc", "test_balanced_acc", "descriptor_text"),
              rows, cfg)
    return 0


def cmd_metric_ablation(cfg, out):
    prep = prepare_data(cfg)
    series, rows = {}, []
    for metric in METRICS:
        _, records, per_layer, _, _ = run_search(cfg, prep, metric=metric)
        series[metric] = per_layer
        for row, rec in zip(per_layer, records):
            rows.append((metric, rec.layer, str(rec.best.descriptor), rec.best.bic,
                         row["test"]["balanced_accuracy"], row["test"]["lowest_class_accuracy"]))
    print(f"{'L':>2}  " + "  ".join(f"{m:>20}" for m in METRICS))
    for L in range(cfg.L_max):
        print(f"{L + 1:>2}  " + "  ".join(
            f"{series[m][L]['test']['balanced_accuracy']:>20.4f}" for m in METRICS))
    write_json(out / "metric_ablation.json",
               _envelope(cfg, prep, "metric-ablation", {"series": series}))
    write_csv(out / "metric_ablation.csv",
              ("metric", "layer", "descriptor_text", "bic", "test_balanced_acc",
               "test_lowest_class_acc"), rows, cfg)
    return 0


def cmd_fixed_kernel(cfg, out):
    if not cfg.circuit:
        raise ConfigError("fixed-kernel needs --circuit")
    try:
        c = deserialize(cfg.circuit)
    except DescriptorParseError as exc:
        raise ConfigError(f"cannot parse circuit: {exc}") from exc
    theta = default_theta(c) if cfg.theta is None else np.asarray(cfg.theta, dtype=float)
    if theta.size != param_count(c):
        raise ConfigError(f"circuit has {param_count(c)} parameters, theta has {theta.size}")
    prep = prepare_data(cfg)
    if c.n_qubits != prep.dataset.feature_dim:
        raise ConfigError(f"circuit has {c.n_qubits} qubits, data has {prep.dataset.feature_dim} features")
    pool = np.concatenate([prep.split.train, prep.split.validation])
    too_big = [s for s in cfg.train_sizes if s > pool.size or s < 2]
    if too_big:
        raise ConfigError(f"training sizes {too_big} outside [2, {pool.size}] (non-test rows)")
    X_test, y_test = prep.test
    rows, results = [], []
    for size in cfg.train_sizes:
        idx = pool[:size]
        X, y = prep.dataset.X[idx], prep.dataset.y[idx]
        K = kernelmat.gram_matrix(X, c, theta)
        model = svm.train_dual(K, y, cfg.svm_C, cfg.svm_tol)
        pred = (svm.decision_function(model, kernelmat.cross_kernel(X_test, X, c, theta)) >= 0)
        rep = metrics.report(y_test, pred.astype(int))
        rows.append((size, rep["tpr"], rep["tnr"], rep["lowest_class_accuracy"], rep["balanced_accuracy"]))
        results.append({"train_size": size, "test": rep})
        print(f"n_train={size:>5}  TPR={rep['tpr']:.4f}  TNR={rep['tnr']:.4f}")
    write_json(out / "fixed_kernel.json", _envelope(cfg, prep, "fixed-kernel", {
        "circuit": str(c), "theta": theta, "results": results}))
    write_csv(out / "fixed_kernel.csv",
              ("train_size", "tpr", "tnr", "lowest_class_acc", "balanced_acc"), rows, cfg)
    return 0


COMMANDS = {
    "search": cmd_search,
    "baselines": cmd_baselines,
    "convergence": cmd_convergence,
    "metric-ablation": cmd_metric_ablation,
    "fixed-kernel": cmd_fixed_kernel,
}


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="qkcompose", description="Compositional quantum-kernel search.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="flat JSON settings file")
        s.add_argument("--seed", type=int)
        s.add_argument("--threads", type=int, help="worker threads (default: all CPUs)")
        s.add_argument("--out-dir", dest="out_dir")
        s.add_argument("--dataset", choices=DATASETS)
        s.add_argument("--csv-path", dest="csv_path")
        s.add_argument("--label-column", dest="label_column")
        s.add_argument("--scaling", choices=("auto",) + data.SCALING_MODES)
        s.add_argument("--count", type=int)
        s.add_argument("--n-train", dest="n_train", type=int)
        s.add_argument("--n-valid", dest="n_valid", type=int)
        s.add_argument("-K", dest="K", type=int)
        s.add_argument("-M", dest="M", type=int)
        s.add_argument("--L-max", dest="L_max", type=int)
        s.add_argument("--variant", choices=("full", "m_zero", "m_zero_one"))
        s.add_argument("--bo-n-init", dest="bo_n_init", type=int)
        s.add_argument("--bo-iterations", dest="bo_iterations", type=int)
        s.add_argument("--svm-C", dest="svm_C", type=float)
        s.add_argument("--dump-gram", dest="dump_gram", action="store_const", const=True)
        s.add_argument("--circuit", help="descriptor text, rows separated by ';' or newlines")
        s.add_argument("--theta", type=_float_list)
        s.add_argument("--train-sizes", dest="train_sizes", type=_int_list)
        s.add_argument("--k-list", dest="k_list", type=_int_list)
        s.add_argument("--m-list", dest="m_list", type=_int_list)
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args):
    values = load_config(args.config) if args.config else {}
    names = {f.name for f in fields(RunConfig)}
    for k, v in vars(args).items():
        if k in names and v is not None:
            values[k] = v
    values.setdefault("threads", os.cpu_count() or 1)
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", OrientationWarning)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, Path(cfg.out_dir))
    except (ConfigError, data.IngestionError, DescriptorParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
